#pragma once

// Line protocol for driving an Environment from another process.
//
//   server greeting:  IAMFLOOD-BRIDGE 1
//   RESET <config> <seed>  ->  OBS <v...>
//   STEP <action_index>    ->  STEP <reward> <done> <repeat_elevation> <v...>
//   LEDGER                 ->  LEDGER <row>;<row>;...   (ledger CSV rows, no header)
//   LAYOUT                 ->  LAYOUT <name...>
//   QUIT                   ->  BYE
// Any failure answers `ERR <message>` and leaves the session usable.
// Action 0 is NO_OP, k >= 1 elevates the k-th zone of the zones file.

#include "iamflood/env.hpp"
#include "iamflood/text.hpp"

#include <istream>
#include <memory>
#include <ostream>
#include <string>
#include <vector>

namespace iamflood {

inline constexpr const char* kBridgeGreeting = "IAMFLOOD-BRIDGE 1";

/// [year_norm, period_index, rain_mm, then R_i, D_i, max_depth, elevated per zone].
inline std::vector<double> flatten_observation(const Observation& obs, const Environment& env)
{
  std::vector<double> v;
  v.reserve(3 + 4 * obs.zones.size());
  v.push_back(static_cast<double>(obs.year - env.year_start()) / env.episode_length());
  v.push_back(obs.period_index);
  v.push_back(obs.rainfall_mm);
  for (const auto& z : obs.zones) {
    v.push_back(z.damage);
    v.push_back(z.delay);
    v.push_back(z.max_depth_m);
    v.push_back(z.elevated ? 1.0 : 0.0);
  }
  return v;
}

inline std::vector<std::string> observation_layout(const Environment& env)
{
  std::vector<std::string> names{"year_norm", "period_index", "rain_mm"};
  for (const auto& z : env.zones())
    for (const char* f : {"R", "D", "max_depth", "elevated"}) names.push_back(z.id + "." + f);
  return names;
}

class BridgeSession {
 public:
  /// Handles one request line and returns the single response line.
  std::string handle(const std::string& request)
  {
    try {
      return dispatch(request);
    } catch (const std::exception& e) {
      std::string msg = e.what();
      for (auto& ch : msg)
        if (ch == '\n' || ch == '\r') ch = ' ';
      return "ERR " + msg;
    }
  }

  bool finished() const { return quit_; }

 private:
  std::string dispatch(const std::string& request)
  {
    const std::string line(text::trim(request));
    const auto sp = line.find(' ');
    const std::string verb = line.substr(0, sp);
    const std::string rest = sp == std::string::npos ? "" : std::string(text::trim(line.substr(sp + 1)));

    if (verb == "RESET") {
      const auto last = rest.rfind(' ');
      if (last == std::string::npos) throw std::invalid_argument("usage: RESET <config> <seed>");
      const std::string path(text::trim(rest.substr(0, last)));
      long long seed = 0;
      if (!text::parse_int(rest.substr(last + 1), seed) || seed < 0)
        throw std::invalid_argument("seed must be a non-negative integer");
      env_ = std::make_unique<Environment>(load_config(path));
      const auto obs = env_->reset(static_cast<std::uint64_t>(seed), 0);
      return "OBS" + join(flatten_observation(obs, *env_));
    }
    if (verb == "STEP") {
      need_env();
      long long k = 0;
      if (!text::parse_int(rest, k)) throw std::invalid_argument("usage: STEP <action_index>");
      if (k < 0 || static_cast<std::size_t>(k) >= env_->action_count())
        throw std::out_of_range("action index " + rest + " out of range 0.." + std::to_string(env_->action_count() - 1));
      const auto r = env_->step(Action::from_index(static_cast<std::size_t>(k)));
      return "STEP " + text::format_double(r.reward) + (r.done ? " 1" : " 0") +
             (r.info.repeat_elevation ? " 1" : " 0") + join(flatten_observation(r.observation, *env_));
    }
    if (verb == "LEDGER") {
      need_env();
      std::string out = "LEDGER ";
      for (std::size_t k = 0; k < env_->ledger().size(); ++k) out += (k ? ";" : "") + ledger_line(env_->ledger()[k]);
      return out;
    }
    if (verb == "LAYOUT") {
      need_env();
      std::string out = "LAYOUT";
      for (const auto& n : observation_layout(*env_)) out += " " + n;
      return out;
    }
    if (verb == "QUIT") {
      quit_ = true;
      return "BYE";
    }
    throw std::invalid_argument("unknown request '" + verb + "'");
  }

  void need_env() const
  {
    if (!env_) throw std::logic_error("no environment; send RESET first");
  }

  static std::string join(const std::vector<double>& v)
  {
    std::string out;
    for (double x : v) out += " " + text::format_double(x);
    return out;
  }

  std::unique_ptr<Environment> env_;
  bool quit_ = false;
};

/// Greets, then answers one line per request until QUIT or end of input.
inline void serve(std::istream& in, std::ostream& out)
{
  out << kBridgeGreeting << '\n' << std::flush;
  BridgeSession session;
  std::string line;
  while (!session.finished() && std::getline(in, line)) {
    if (text::trim(line).empty()) continue;
    out << session.handle(line) << '\n' << std::flush;
  }
}

} // namespace iamflood
