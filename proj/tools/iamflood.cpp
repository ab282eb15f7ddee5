// iamflood: command-line front end for the flood / transport / impact chain.

#include "manifest.hpp"

#include "iamflood/agents.hpp"
#include "iamflood/bridge.hpp"
#include "iamflood/env.hpp"
#include "iamflood/error.hpp"
#include "iamflood/flood.hpp"
#include "iamflood/grid.hpp"
#include "iamflood/text.hpp"
#include "iamflood/version.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace iamflood;
using text::format_double;

namespace {

constexpr int kExitInput = 2;
constexpr int kExitRuntime = 3;

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  int episodes = 1;
  std::string out;
  std::string dem;
  double rain_mm = 0.0;
  std::string boundary = "open";
  std::vector<std::string> policies;
  double alpha = 0.1;
  double gamma = 0.95;
};

std::ofstream open_out(const fs::path& p)
{
  std::ofstream f(p, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + p.string());
  return f;
}

fs::path prepare_out_dir(const std::string& out)
{
  if (out.empty()) throw InputError("--out is required");
  fs::create_directories(out);
  return fs::path(out);
}

cli::RunManifest manifest_for(const std::string& command, const Environment& env, std::uint64_t seed,
                              const Options& o)
{
  cli::RunManifest m;
  m.command = command;
  m.settings = {{"seed", std::to_string(seed)}, {"episodes", std::to_string(o.episodes)}};
  m.config = env.config().entries;
  m.inputs.emplace_back("config", env.config().source);
  for (const auto& in : env.config().input_files()) m.inputs.push_back(in);
  return m;
}

Environment load_env(const Options& o)
{
  if (o.config.empty()) throw InputError("--config is required");
  return Environment::from_file(o.config);
}

int cmd_flood(const Options& o)
{
  if (o.dem.empty()) throw InputError("--dem is required");
  if (o.out.empty()) throw InputError("--out is required");
  if (!(o.rain_mm >= 0.0) || !std::isfinite(o.rain_mm)) throw InputError("--rain-mm must be a finite value >= 0");
  const Boundary b = o.boundary == "sealed" ? Boundary::Sealed : Boundary::Open;
  const auto dem = load_dem(o.dem);
  const auto field = compute_flood(dem, o.rain_mm, b);
  write_depth_raster(o.out, dem, field);
  std::cout << "stored=" << format_double(field.stored_m3()) << " outflow=" << format_double(field.outflow_m3) << "\n";
  return 0;
}

int cmd_validate(const Options& o)
{
  const auto env = load_env(o);
  std::cout << "config: " << env.config().source << "\n";
  std::cout << "years: " << env.year_start() << "-" << env.year_end() << " (" << env.episode_length() << " steps, "
            << env.scenario().cdfs().size() << " rainfall periods)\n";
  std::cout << "dem: " << env.dem().nrows << "x" << env.dem().ncols << " cells of " << format_double(env.dem().cell_size_m)
            << " m\n";
  std::cout << "zones: " << env.zone_count() << ", graph edges: " << env.graph().edges().size()
            << ", road segments: " << env.segments().size() << "\n";
  for (std::size_t z = 0; z < env.zone_count(); ++z)
    std::cout << "  " << env.zones()[z].id << ": " << format_double(env.zone_road_km(z))
              << " km of road, elevation cost " << format_double(env.elevation_cost(z)) << "\n";
  double trips = 0.0;
  for (double v : env.od().data()) trips += v;
  std::cout << "trips: " << format_double(trips) << ", dry stranded: " << format_double(env.dry_routing().stranded_trips)
            << "\n";
  for (const auto& w : env.warnings()) std::cout << "warning: " << w << "\n";
  std::cout << "OK\n";
  return 0;
}

int cmd_simulate(const Options& o)
{
  auto env = load_env(o);
  const auto seed = o.seed.value_or(env.config().seed);
  if (o.episodes < 1) throw InputError("--episodes must be >= 1");
  const auto dir = prepare_out_dir(o.out);
  NoOpPolicy noop;
  ImpactLedger ledger;
  const auto summary = evaluate_policy(env, noop, o.episodes, seed, &ledger);

  {
    auto f = open_out(dir / "ledger.csv");
    write_ledger_csv(f, ledger);
  }
  {
    const std::size_t n = env.zone_count();
    std::vector<double> r(n, 0.0), d(n, 0.0), a(n, 0.0);
    for (std::size_t k = 0; k < ledger.size(); ++k) {
      const auto z = k % n;
      r[z] += ledger[k].damage;
      d[z] += ledger[k].delay;
      a[z] += ledger[k].action_cost;
    }
    auto f = open_out(dir / "expected_loss.csv");
    f << "taz_id,mean_R,mean_D,mean_A,mean_total\n";
    const double e = o.episodes;
    for (std::size_t z = 0; z < n; ++z)
      f << env.zones()[z].id << ',' << format_double(r[z] / e) << ',' << format_double(d[z] / e) << ','
        << format_double(a[z] / e) << ',' << format_double((r[z] + d[z] + a[z]) / e) << '\n';
  }
  auto m = manifest_for("simulate", env, seed, o);
  m.outputs = {(dir / "ledger.csv").string(), (dir / "expected_loss.csv").string()};
  m.write((dir / "manifest.txt").string());
  std::cout << "episodes=" << o.episodes << " mean_return=" << format_double(summary.mean_return)
            << " mean_R=" << format_double(summary.mean_damage) << " mean_D=" << format_double(summary.mean_delay)
            << "\n";
  return 0;
}

int cmd_train(const Options& o)
{
  auto env = load_env(o);
  const auto seed = o.seed.value_or(env.config().seed);
  if (o.episodes < 0) throw InputError("--episodes must be >= 0");
  QLearningParams hp;
  hp.alpha = o.alpha;
  hp.gamma = o.gamma;
  try {
    hp.validate();
  } catch (const std::invalid_argument& e) {
    throw InputError(e.what());
  }
  const auto dir = prepare_out_dir(o.out);
  const auto result = q_learning_train(env, hp, o.episodes, seed);
  {
    auto f = open_out(dir / "qtable.csv");
    result.table.write_csv(f);
  }
  {
    auto f = open_out(dir / "curve.csv");
    write_curve_csv(f, result.returns);
  }
  auto m = manifest_for("train", env, seed, o);
  m.settings.emplace_back("alpha", format_double(hp.alpha));
  m.settings.emplace_back("gamma", format_double(hp.gamma));
  m.settings.emplace_back("epsilon", format_double(hp.epsilon_start) + "->" + format_double(hp.epsilon_end));
  m.outputs = {(dir / "qtable.csv").string(), (dir / "curve.csv").string()};
  m.write((dir / "manifest.txt").string());
  std::cout << "episodes=" << o.episodes << " states=" << result.table.size();
  if (!result.returns.empty()) std::cout << " last_return=" << format_double(result.returns.back());
  std::cout << "\n";
  return 0;
}

int cmd_evaluate(const Options& o)
{
  auto env = load_env(o);
  const auto seed = o.seed.value_or(env.config().seed);
  if (o.episodes < 1) throw InputError("--episodes must be >= 1");
  const auto policies = o.policies.empty() ? std::vector<std::string>{"noop"} : o.policies;
  std::vector<EvaluationSummary> rows;
  auto m = manifest_for("evaluate", env, seed, o);
  for (const auto& spec : policies) {
    std::unique_ptr<Policy> p;
    try {
      p = make_policy(spec, env, seed);
    } catch (const std::invalid_argument& e) {
      throw InputError(spec + ": " + e.what());
    }
    if (fs::exists(spec)) m.inputs.emplace_back("policy", spec);
    rows.push_back(evaluate_policy(env, *p, o.episodes, seed));
    rows.back().policy = spec;
  }
  const auto dir = prepare_out_dir(o.out);
  {
    auto f = open_out(dir / "summary.csv");
    f << "policy,episodes,mean_return,stdev_return,mean_R,mean_D,mean_A,mean_paired_diff,stdev_paired_diff\n";
    for (const auto& s : rows) {
      // Paired against the first policy: same weather per episode.
      std::vector<double> diff;
      for (std::size_t e = 0; e < s.returns.size(); ++e) diff.push_back(s.returns[e] - rows.front().returns[e]);
      double mean = 0.0, ss = 0.0;
      for (double x : diff) mean += x / diff.size();
      for (double x : diff) ss += (x - mean) * (x - mean);
      const double sd = diff.size() > 1 ? std::sqrt(ss / (diff.size() - 1.0)) : 0.0;
      f << s.policy << ',' << o.episodes << ',' << format_double(s.mean_return) << ','
        << format_double(s.stdev_return) << ',' << format_double(s.mean_damage) << ','
        << format_double(s.mean_delay) << ',' << format_double(s.mean_action_cost) << ','
        << format_double(mean) << ',' << format_double(sd) << '\n';
      std::cout << s.policy << " mean_return=" << format_double(s.mean_return) << "\n";
    }
  }
  {
    auto f = open_out(dir / "actions.csv");
    f << "policy,episode,year,elevated_taz\n";
    for (const auto& s : rows)
      for (std::size_t e = 0; e < s.actions.size(); ++e)
        for (std::size_t k = 0; k < s.actions[e].size(); ++k)
          if (s.actions[e][k] != 0)
            f << s.policy << ',' << e << ',' << env.year_start() + static_cast<int>(k) << ','
              << env.zones()[s.actions[e][k] - 1].id << '\n';
  }
  m.outputs = {(dir / "summary.csv").string(), (dir / "actions.csv").string()};
  m.write((dir / "manifest.txt").string());
  return 0;
}

int cmd_serve()
{
  serve(std::cin, std::cout);
  return 0;
}

} // namespace

int main(int argc, char** argv)
{
  CLI::App app{"Pluvial flood, transport and adaptation simulator"};
  app.set_version_flag("--version", std::string("iamflood ") + kVersion);
  app.require_subcommand(1);
  Options o;

  auto add_config = [&](CLI::App* c) { c->add_option("--config", o.config, "Episode config file")->required(); };
  auto add_seed = [&](CLI::App* c) { c->add_option("--seed", o.seed, "Weather seed (defaults to the config's)"); };

  auto* flood = app.add_subcommand("flood", "Route one rainfall over a DEM and write the depth raster");
  flood->add_option("--dem", o.dem, "ESRI ASCII DEM")->required();
  flood->add_option("--rain-mm", o.rain_mm, "Uniform rainfall depth in mm")->required();
  flood->add_option("--out", o.out, "Output depth raster")->required();
  flood->add_option("--boundary", o.boundary, "open (edges drain) or sealed")->check(CLI::IsMember({"open", "sealed"}));

  auto* validate = app.add_subcommand("validate", "Load every input of a config and report");
  add_config(validate);

  auto* simulate = app.add_subcommand("simulate", "NO_OP Monte Carlo baseline");
  add_config(simulate);
  add_seed(simulate);
  simulate->add_option("--episodes", o.episodes, "Number of episodes")->check(CLI::PositiveNumber);
  simulate->add_option("--out", o.out, "Output directory")->required();

  auto* train = app.add_subcommand("train", "Tabular Q-learning");
  add_config(train);
  add_seed(train);
  train->add_option("--episodes", o.episodes, "Training episodes")->check(CLI::NonNegativeNumber);
  train->add_option("--alpha", o.alpha, "Learning rate in (0, 1]");
  train->add_option("--gamma", o.gamma, "Discount in [0, 1]");
  train->add_option("--out", o.out, "Output directory")->required();

  auto* evaluate = app.add_subcommand("evaluate", "Compare policies under common random numbers");
  add_config(evaluate);
  add_seed(evaluate);
  evaluate->add_option("--episodes", o.episodes, "Episodes per policy")->check(CLI::PositiveNumber);
  evaluate->add_option("--policy", o.policies, "noop, random, greedy or a Q-table CSV; repeatable");
  evaluate->add_option("--out", o.out, "Output directory")->required();

  auto* serve_cmd = app.add_subcommand("serve", "Line protocol on stdin/stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitInput;
  }

  try {
    if (*flood) return cmd_flood(o);
    if (*validate) return cmd_validate(o);
    if (*simulate) return cmd_simulate(o);
    if (*train) {
      if (train->count("--episodes") == 0) o.episodes = 500;
      return cmd_train(o);
    }
    if (*evaluate) return cmd_evaluate(o);
    if (*serve_cmd) return cmd_serve();
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return 0;
}
