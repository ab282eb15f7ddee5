#pragma once

#include "iamflood/disruption.hpp"
#include "iamflood/error.hpp"
#include "iamflood/flood.hpp"
#include "iamflood/text.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace iamflood {

struct RewardWeights {
  double beta_r = 1.0;
  double beta_d = 1.0;
  double beta_a = 1.0;
};

/// Everything one episode needs. File paths are stored resolved against the
/// directory of the config file.
struct EpisodeConfig {
  std::string source = "<config>";
  std::string rainfall;
  std::string dem;
  std::string zones;
  std::string adjacency;
  std::string roads;
  std::string cost_table;
  std::string damage_curves;  // empty: built-in curve
  RewardWeights weights;
  double vot_per_hour = 0.0;
  double impedance_lambda_m = 0.0;
  double elevation_height_m = 1.0;
  double elevation_cost_per_km = 0.0;
  std::optional<double> stranded_cost;  // default 8 h of VoT
  double free_flow_kmh = kDefaultFreeFlowKmh;
  std::uint64_t seed = 0;
  std::optional<int> year_start;
  std::optional<int> year_end;
  Boundary boundary = Boundary::Open;
  DisruptionCurve disruption;
  std::vector<std::pair<std::string, std::string>> entries;  // as written, in file order

  double stranded_trip_cost() const { return stranded_cost ? *stranded_cost : 8.0 * vot_per_hour; }

  std::vector<std::pair<std::string, std::string>> input_files() const
  {
    std::vector<std::pair<std::string, std::string>> out{{"rainfall", rainfall}, {"dem", dem},     {"zones", zones},
                                                         {"adjacency", adjacency}, {"roads", roads},
                                                         {"cost_table", cost_table}};
    if (!damage_curves.empty()) out.emplace_back("damage_curves", damage_curves);
    return out;
  }
};

namespace detail {

inline double config_double(const std::string& path, std::size_t line, const std::string& key, const std::string& v)
{
  double out = 0.0;
  if (!text::parse_double(v, out) || !std::isfinite(out))
    throw input_error(path, line, "'" + key + "' expects a number, got '" + v + "'");
  return out;
}

inline double config_nonneg(const std::string& path, std::size_t line, const std::string& key, const std::string& v)
{
  const double d = config_double(path, line, key, v);
  if (d < 0.0) throw input_error(path, line, "'" + key + "' must be >= 0");
  return d;
}

inline double config_positive(const std::string& path, std::size_t line, const std::string& key, const std::string& v)
{
  const double d = config_double(path, line, key, v);
  if (!(d > 0.0)) throw input_error(path, line, "'" + key + "' must be > 0");
  return d;
}

inline long long config_int(const std::string& path, std::size_t line, const std::string& key, const std::string& v)
{
  long long out = 0;
  if (!text::parse_int(v, out)) throw input_error(path, line, "'" + key + "' expects an integer, got '" + v + "'");
  return out;
}

} // namespace detail

/// `key = value` lines; `#` starts a comment. Unknown and repeated keys are errors.
inline EpisodeConfig parse_config(const std::string& content, const std::string& path, const std::filesystem::path& base)
{
  EpisodeConfig cfg;
  cfg.source = path;
  auto resolve = [&](const std::string& v) {
    const std::filesystem::path p(v);
    return (p.is_absolute() ? p : base / p).lexically_normal().string();
  };
  std::istringstream in(content);
  std::string raw;
  std::size_t lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    if (lineno == 1 && raw.compare(0, 3, "\xEF\xBB\xBF") == 0) raw.erase(0, 3);
    const auto hash = raw.find('#');
    const std::string line(text::trim(std::string_view(raw).substr(0, hash)));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw input_error(path, lineno, "expected key = value");
    const std::string key(text::trim(std::string_view(line).substr(0, eq)));
    const std::string value(text::trim(std::string_view(line).substr(eq + 1)));
    if (value.empty()) throw input_error(path, lineno, "empty value for '" + key + "'");
    for (const auto& [k, _] : cfg.entries)
      if (k == key) throw input_error(path, lineno, "duplicate key '" + key + "'");
    cfg.entries.emplace_back(key, value);
    using namespace detail;
    if (key == "rainfall") cfg.rainfall = resolve(value);
    else if (key == "dem") cfg.dem = resolve(value);
    else if (key == "zones") cfg.zones = resolve(value);
    else if (key == "adjacency") cfg.adjacency = resolve(value);
    else if (key == "roads") cfg.roads = resolve(value);
    else if (key == "cost_table") cfg.cost_table = resolve(value);
    else if (key == "damage_curves") cfg.damage_curves = resolve(value);
    else if (key == "beta_r") cfg.weights.beta_r = config_nonneg(path, lineno, key, value);
    else if (key == "beta_d") cfg.weights.beta_d = config_nonneg(path, lineno, key, value);
    else if (key == "beta_a") cfg.weights.beta_a = config_nonneg(path, lineno, key, value);
    else if (key == "vot_per_hour") cfg.vot_per_hour = config_nonneg(path, lineno, key, value);
    else if (key == "impedance_lambda_m") cfg.impedance_lambda_m = config_positive(path, lineno, key, value);
    else if (key == "elevation_height_m") cfg.elevation_height_m = config_nonneg(path, lineno, key, value);
    else if (key == "elevation_cost_per_km") cfg.elevation_cost_per_km = config_nonneg(path, lineno, key, value);
    else if (key == "stranded_cost") cfg.stranded_cost = config_nonneg(path, lineno, key, value);
    else if (key == "free_flow_kmh") cfg.free_flow_kmh = config_positive(path, lineno, key, value);
    else if (key == "seed") {
      const auto s = config_int(path, lineno, key, value);
      if (s < 0) throw input_error(path, lineno, "'seed' must be >= 0");
      cfg.seed = static_cast<std::uint64_t>(s);
    } else if (key == "year_start") cfg.year_start = static_cast<int>(config_int(path, lineno, key, value));
    else if (key == "year_end") cfg.year_end = static_cast<int>(config_int(path, lineno, key, value));
    else if (key == "boundary") {
      if (value == "open") cfg.boundary = Boundary::Open;
      else if (value == "sealed") cfg.boundary = Boundary::Sealed;
      else throw input_error(path, lineno, "'boundary' must be open or sealed");
    } else if (key == "disruption_a") cfg.disruption.a = config_double(path, lineno, key, value);
    else if (key == "disruption_b") cfg.disruption.b = config_double(path, lineno, key, value);
    else if (key == "disruption_c") cfg.disruption.c = config_positive(path, lineno, key, value);
    else if (key == "disruption_cutoff_mm") cfg.disruption.cutoff_mm = config_positive(path, lineno, key, value);
    else throw input_error(path, lineno, "unknown key '" + key + "'");
  }
  const std::pair<const char*, const std::string*> required[] = {
      {"rainfall", &cfg.rainfall}, {"dem", &cfg.dem},     {"zones", &cfg.zones},
      {"adjacency", &cfg.adjacency}, {"roads", &cfg.roads}, {"cost_table", &cfg.cost_table}};
  for (const auto& [key, field] : required)
    if (field->empty()) throw InputError(path + ": missing required key '" + key + "'");
  auto has = [&](const char* key) {
    for (const auto& e : cfg.entries)
      if (e.first == key) return true;
    return false;
  };
  for (const char* key : {"vot_per_hour", "impedance_lambda_m", "elevation_cost_per_km"})
    if (!has(key)) throw InputError(path + ": missing required key '" + std::string(key) + "'");
  if (cfg.year_start && cfg.year_end && *cfg.year_end < *cfg.year_start)
    throw InputError(path + ": year_end before year_start");
  return cfg;
}

inline EpisodeConfig load_config(const std::string& path)
{
  return parse_config(text::read_file(path), path, std::filesystem::path(path).parent_path());
}

} // namespace iamflood
