// Acceptance suite: one PASS/FAIL line per criterion. Exit status is the
// number of failed criteria.

#include "iamflood/agents.hpp"
#include "iamflood/env.hpp"
#include "iamflood/flood.hpp"
#include "iamflood/rng.hpp"
#include "iamflood/transport.hpp"
#include "support/fixtures.hpp"
#include "support/flood_checks.hpp"
#include "support/flood_oracle.hpp"
#include "support/random_dem.hpp"
#include "support/random_graph.hpp"
#include "support/routing_oracle.hpp"
#include "support/run_cli.hpp"
#include "support/tempdir.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

using namespace iamflood;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string num(double v)
{
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

// Shared by criteria 1-3.
struct FloodCase {
  DemGrid dem;
  double rain_mm;
  DepthField field;
};

std::vector<FloodCase> g_large;
std::vector<FloodCase> g_small;

Outcome mass_balance()
{
  SplitMix64 rng(501);
  double worst = 0.0;
  const auto t0 = Clock::now();
  for (int t = 0; t < 200; ++t) {
    auto dem = testsupport::random_dem(50000 + t, 50, 50, t % 5 == 0 ? 0.02 : 0.0);
    const double mm = 2000.0 * rng.uniform();
    auto f = compute_flood(dem, mm);
    if (f.input_m3 > 0.0) worst = std::max(worst, testsupport::mass_imbalance(f) / f.input_m3);
    g_large.push_back({std::move(dem), mm, std::move(f)});
  }
  const double secs = seconds_since(t0);
  return {worst <= 1e-6 && secs < 30.0,
          "max |in-stored-out|/in = " + num(worst) + " over 200 50x50 grids in " + num(secs) + " s (limits 1e-6, 30 s)"};
}

Outcome oracle_equivalence()
{
  SplitMix64 rng(502);
  double worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    auto dem = testsupport::random_dem(60000 + t, 10, 10, t % 4 == 0 ? 0.05 : 0.0);
    const double mm = 2000.0 * rng.uniform();
    auto f = compute_flood(dem, mm);
    worst = std::max(worst, testsupport::max_abs_diff(f.depth_m, oracle::flood(dem, mm).depth_m));
    g_small.push_back({std::move(dem), mm, std::move(f)});
  }
  return {worst <= 1e-4, "max per-cell |depth - oracle| = " + num(worst) + " m over 100 10x10 grids (limit 1e-4)"};
}

Outcome flatness_and_monotonicity()
{
  SplitMix64 rng(503);
  double spread = 0.0, violation = 0.0;
  std::size_t n = 0;
  for (auto* set : {&g_large, &g_small})
    for (const auto& c : *set) {
      spread = std::max(spread, testsupport::max_pond_spread(c.dem, c.field));
      const auto more = compute_flood(c.dem, c.rain_mm + 500.0 * rng.uniform());
      violation = std::max(violation, testsupport::max_monotonicity_violation(c.field, more));
      ++n;
    }
  const bool ran = n == 300;
  return {ran && spread <= 1e-6 && violation <= 1e-9,
          "max pond surface spread " + num(spread) + " m, max depth decrease under more rain " + num(violation) +
              " m over " + std::to_string(n) + " fixtures (limits 1e-6, 1e-9)"};
}

Outcome ipf()
{
  SplitMix64 rng(504);
  double worst = 0.0;
  bool all_converged = true;
  for (int t = 0; t < 100; ++t) {
    const std::size_t n = 10;
    Matrix seed(n, n), truth(n, n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        seed(i, j) = (i != j && rng.uniform() < 0.15) ? 0.0 : 0.05 + rng.uniform();
        truth(i, j) = seed(i, j) * (0.2 + 3.0 * rng.uniform());
      }
    std::vector<double> rows(n), cols(n);
    for (std::size_t i = 0; i < n; ++i) rows[i] = truth.row_sum(i), cols[i] = truth.col_sum(i);
    const auto r = ipf_fit(seed, rows, cols, 1e-6, 1000);
    all_converged = all_converged && r.converged;
    for (std::size_t i = 0; i < n; ++i) {
      worst = std::max(worst, std::abs(r.trips.row_sum(i) - rows[i]) / rows[i]);
      worst = std::max(worst, std::abs(r.trips.col_sum(i) - cols[i]) / cols[i]);
    }
  }
  const Matrix cross(2, 2, {2, 1, 1, 1});
  const std::vector<double> ones{1, 1};
  const double a = ipf_fit(cross, ones, ones).trips(0, 0);
  return {all_converged && worst <= 1e-6 && std::abs(a - 0.585786) <= 1e-5,
          "max relative marginal deviation " + num(worst) + " over 100 10x10 problems; 2x2 cross-product a = " +
              std::to_string(a) + " (target 0.585786 +- 1e-5)"};
}

Outcome routing()
{
  std::size_t mismatches = 0, pairs = 0;
  for (int t = 0; t < 50; ++t) {
    const auto rg = testsupport::random_graph(80000 + t, 20);
    const auto ap = shortest_paths(rg.graph, rg.times);
    const auto fw = oracle::floyd_warshall(rg.graph, rg.times);
    for (std::size_t i = 0; i < 20; ++i)
      for (std::size_t j = 0; j < 20; ++j, ++pairs) {
        const double d = fw.dist[i * 20 + j];
        const auto got = ap.at(i, j);
        const bool same = std::isfinite(d) ? (got && *got == d && ap.route(i, j) == fw.path[i * 20 + j]) : !got;
        mismatches += same ? 0 : 1;
      }
  }
  return {mismatches == 0, std::to_string(mismatches) + " of " + std::to_string(pairs) +
                               " (time, path) pairs differ from Floyd-Warshall on 50 random 20-node graphs"};
}

Outcome reward_consistency()
{
  Environment one = Environment::from_file(testsupport::toy_config());
  Environment two(testsupport::config_with(testsupport::toy_config(), "beta_d = 2\n"));
  one.reset(17, 0);
  two.reset(17, 0);
  std::vector<double> rewards;
  for (int k = 0; !one.done(); ++k) {
    const auto a = k % 11 == 3 ? Action::elevate_zone(static_cast<std::size_t>(k % 3)) : Action::noop();
    rewards.push_back(one.step(a).reward);
    two.step(a);
  }
  testsupport::TempDir dir;
  std::ostringstream csv;
  write_ledger_csv(csv, one.ledger());
  const auto ledger = read_ledger_csv(dir.write("ledger.csv", csv.str()));
  const std::size_t n = one.zone_count();
  double worst = 0.0;
  for (std::size_t k = 0; k < rewards.size(); ++k) {
    double sum = 0.0;
    for (std::size_t z = 0; z < n; ++z) {
      const auto& r = ledger[k * n + z];
      sum += r.damage + r.delay + r.action_cost;
    }
    worst = std::max(worst, std::abs(rewards[k] + sum) / std::max(1.0, std::abs(rewards[k])));
  }
  bool doubled = one.ledger().size() == two.ledger().size();
  for (std::size_t k = 0; doubled && k < one.ledger().size(); ++k) {
    const auto& a = one.ledger()[k];
    const auto& b = two.ledger()[k];
    doubled = a.damage == b.damage && a.action_cost == b.action_cost && a.delay == b.delay &&
              -reward_component({0, 2, 0}, b.damage, b.delay, b.action_cost) ==
                  2.0 * -reward_component({0, 1, 0}, a.damage, a.delay, a.action_cost);
  }
  return {rewards.size() == 90 && worst <= 1e-9 && doubled,
          std::to_string(rewards.size()) + " steps, max relative |reward + ledger sum| = " + num(worst) +
              " (limit 1e-9); beta_D doubling " + (doubled ? "doubles" : "does NOT double") +
              " the D-component exactly"};
}

Outcome mitigation_dominance()
{
  const auto cfg = testsupport::config_with(testsupport::toy_config(), "beta_a = 0\n");
  Environment base(cfg), raised(cfg);
  std::vector<std::size_t> all(base.zone_count());
  for (std::size_t z = 0; z < all.size(); ++z) all[z] = z;
  int violations = 0, years = 0, flooded = 0;
  for (int s = 0; s < 10; ++s) {
    base.reset(1000 + s, s);
    raised.reset(1000 + s, s, all);
    while (!base.done()) {
      const auto b = base.step(Action::noop());
      const auto r = raised.step(Action::noop());
      ++years;
      flooded += b.info.damage + b.info.delay > 0.0 ? 1 : 0;
      if (r.info.damage + r.info.delay > b.info.damage + b.info.delay) ++violations;
    }
  }
  return {violations == 0 && years == 900,
          std::to_string(violations) + " of " + std::to_string(years) + " years (10 seeds x 90) where all-elevated R+D "
                                                                          "exceeds NO_OP; " + std::to_string(flooded) +
              " baseline years had losses"};
}

Outcome simulate_determinism()
{
  testsupport::TempDir a, b;
  const std::string args = "simulate --config " + testsupport::quote(testsupport::toy_config()) +
                           " --episodes 3 --seed 99 --out ";
  const auto ra = testsupport::run_cli(args + testsupport::quote(a.path().string()));
  const auto rb = testsupport::run_cli(args + testsupport::quote(b.path().string()));
  const auto la = testsupport::slurp(a.path() / "ledger.csv");
  const auto lb = testsupport::slurp(b.path() / "ledger.csv");
  const bool ok = ra.exit_code == 0 && rb.exit_code == 0 && !la.empty() && la == lb;
  return {ok, "two `simulate` runs: exit " + std::to_string(ra.exit_code) + "/" + std::to_string(rb.exit_code) + ", " +
                  std::to_string(la.size()) + "-byte ledgers " + (la == lb ? "identical" : "DIFFER")};
}

Outcome learning_sanity()
{
  Environment env = Environment::from_file(testsupport::crafted_config());
  const auto t0 = Clock::now();
  int good = 0;
  for (int run = 0; run < 20; ++run) {
    QPolicy p(q_learning_train(env, {}, 500, 1000 + run).table);
    const auto s = evaluate_policy(env, p, 1, run);
    bool a = false, b = false;
    for (auto x : s.actions[0]) a |= x == 1, b |= x == 2;
    good += a && !b;
  }
  const double secs = seconds_since(t0);
  return {good >= 18 && secs < 120.0, std::to_string(good) + "/20 runs elevate the flooding zone and never the dry "
                                                              "zone (need 18), 500 episodes each, " + num(secs) +
                                          " s (limit 120 s)"};
}

} // namespace

int main()
{
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"flood mass balance", mass_balance},
      {"flood oracle equivalence", oracle_equivalence},
      {"pond flatness and rainfall monotonicity", flatness_and_monotonicity},
      {"IPF marginals and fixed point", ipf},
      {"routing oracle", routing},
      {"reward equals negated ledger sum", reward_consistency},
      {"mitigation dominance", mitigation_dominance},
      {"simulate determinism", simulate_determinism},
      {"learning sanity", learning_sanity},
  };
  int failed = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    Outcome o;
    try {
      o = criteria[k].second();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    failed += o.pass ? 0 : 1;
    std::printf("%s %zu %s: %s\n", o.pass ? "PASS" : "FAIL", k + 1, criteria[k].first, o.detail.c_str());
    std::fflush(stdout);
  }
  return failed;
}
