#include "iamflood/agents.hpp"
#include "support/fixtures.hpp"
#include "support/tempdir.hpp"

#include <gtest/gtest.h>

#include <sstream>

using namespace iamflood;
using testsupport::config_with;

namespace {

Observation blank(std::size_t zones)
{
  Observation o;
  o.year = 2011;
  o.zones.assign(zones, ZoneObservation{});
  return o;
}

bool elevates(const EvaluationSummary& s, std::size_t action)
{
  for (const auto& ep : s.actions)
    for (auto a : ep)
      if (a == action) return true;
  return false;
}

} // namespace

TEST(RandomPolicy, OnlyNoOpWhenAllElevated)
{
  Environment env = Environment::from_file(testsupport::toy_config());
  RandomPolicy p(1);
  auto obs = blank(3);
  for (auto& z : obs.zones) z.elevated = true;
  for (int k = 0; k < 200; ++k) EXPECT_EQ(p.act(obs, env), Action::noop());
}

TEST(RandomPolicy, SeededAndUniform)
{
  Environment env = Environment::from_file(testsupport::toy_config());
  RandomPolicy a(5), b(5);
  auto obs = blank(3);
  obs.zones[1].elevated = true;
  std::map<std::size_t, int> counts;
  const int n = 30000;
  for (int k = 0; k < n; ++k) {
    const auto x = a.act(obs, env);
    EXPECT_EQ(x, b.act(obs, env));
    ++counts[x.index()];
  }
  EXPECT_EQ(counts.size(), 3u);
  EXPECT_EQ(counts.count(2), 0u);
  for (auto idx : {0u, 1u, 3u}) EXPECT_NEAR(counts[idx] / double(n), 1.0 / 3.0, 0.01);
}

TEST(GreedyPolicy, ThresholdAndTieBreak)
{
  Environment env = Environment::from_file(testsupport::crafted_config());
  GreedyMyopicPolicy p;
  p.begin_episode(env);
  auto obs = blank(2);
  EXPECT_EQ(p.act(obs, env), Action::noop());
  ASSERT_DOUBLE_EQ(env.elevation_cost(0), 1000.0);
  obs.year = 2012;
  obs.zones[0].damage = 5000.0;
  EXPECT_EQ(p.act(obs, env), Action::elevate_zone(0));

  GreedyMyopicPolicy tie;
  tie.begin_episode(env);
  auto t = blank(2);
  tie.act(t, env);
  t.year = 2012;
  t.zones[0].damage = t.zones[1].damage = 3000.0;
  EXPECT_EQ(tie.act(t, env), Action::elevate_zone(0));

  GreedyMyopicPolicy below;
  below.begin_episode(env);
  auto u = blank(2);
  u.year = 2012;
  u.zones[1].delay = 999.0;
  EXPECT_EQ(below.act(u, env), Action::noop());
}

TEST(QTable, EmptyAfterZeroEpisodes)
{
  Environment env = Environment::from_file(testsupport::crafted_config());
  const auto r = q_learning_train(env, {}, 0, 1);
  EXPECT_TRUE(r.table.empty());
  EXPECT_TRUE(r.returns.empty());
}

TEST(QTable, RejectsBadHyperparameters)
{
  Environment env = Environment::from_file(testsupport::crafted_config());
  QLearningParams hp;
  hp.alpha = 0.0;
  EXPECT_THROW(q_learning_train(env, hp, 1, 1), std::invalid_argument);
  hp.alpha = 1.5;
  EXPECT_THROW(q_learning_train(env, hp, 1, 1), std::invalid_argument);
  hp.alpha = 1.0;
  hp.gamma = 1.01;
  EXPECT_THROW(q_learning_train(env, hp, 1, 1), std::invalid_argument);
}

TEST(QTable, DiscretisationBins)
{
  const Discretization d;
  EXPECT_EQ(d.loss_bin(0.0), 0);
  EXPECT_EQ(d.loss_bin(0.5), 0);
  EXPECT_EQ(d.loss_bin(1.0), 1);
  EXPECT_EQ(d.loss_bin(99.0), 2);
  EXPECT_EQ(d.loss_bin(1e30), 7);
  auto obs = blank(2);
  obs.zones[1].elevated = true;
  obs.zones[0].damage = 150.0;
  EXPECT_EQ(d.key(obs), "p0|e1|b3");
}

TEST(QTable, CsvRoundTripAndArgmaxTies)
{
  QTable q(3);
  q.row("s")[1] = 2.5;
  q.row("s")[2] = 2.5;
  EXPECT_EQ(q.argmax("s", {0, 1, 2}), 1u);
  EXPECT_EQ(q.argmax("unseen", {0, 2}), 0u);
  std::ostringstream out;
  q.write_csv(out);
  testsupport::TempDir dir;
  const auto back = QTable::read_csv(dir.write("q.csv", out.str()), 3);
  EXPECT_EQ(back.values(), q.values());
  EXPECT_THROW(QTable::read_csv(dir.write("bad.csv", "state_key,action,value\ns,3,1\n"), 3), InputError);
}

TEST(QLearning, BanditReductionPicksDominantAction)
{
  Environment env(config_with(testsupport::crafted_config(), "year_start = 2011\nyear_end = 2011\n"));
  QLearningParams hp;
  hp.gamma = 0.0;
  hp.alpha = 0.5;
  const auto r = q_learning_train(env, hp, 200, 3);
  const auto key = hp.discretization.key(env.reset());
  EXPECT_EQ(r.table.argmax(key, {0, 1, 2}), 1u);
  EXPECT_NEAR(r.table.value(key, 1), -1000.0, 1e-6);
}

TEST(QLearning, ReproducibleTraining)
{
  Environment env = Environment::from_file(testsupport::crafted_config());
  const auto a = q_learning_train(env, {}, 30, 11);
  const auto b = q_learning_train(env, {}, 30, 11);
  EXPECT_EQ(a.table.values(), b.table.values());
  EXPECT_EQ(a.returns, b.returns);
}

TEST(QLearning, CraftedScenarioLearnsToProtectFloodingZone)
{
  Environment env = Environment::from_file(testsupport::crafted_config());
  int good = 0;
  for (int run = 0; run < 20; ++run) {
    QPolicy p(q_learning_train(env, {}, 500, 1000 + run).table);
    const auto s = evaluate_policy(env, p, 1, run);
    good += elevates(s, 1) && !elevates(s, 2);
  }
  EXPECT_GE(good, 18);
}

TEST(Evaluate, Basics)
{
  Environment env = Environment::from_file(testsupport::zero_rain_config());
  EXPECT_THROW(
      {
        NoOpPolicy p;
        evaluate_policy(env, p, 0, 1);
      },
      std::invalid_argument);
  NoOpPolicy noop;
  const auto s = evaluate_policy(env, noop, 2, 1);
  EXPECT_EQ(s.mean_return, 0.0);
  EXPECT_EQ(s.returns[0], s.returns[1]);
  RandomPolicy rnd(4);
  const auto r = evaluate_policy(env, rnd, 2, 1);
  EXPECT_LE(r.mean_return, s.mean_return);
  EXPECT_LE(r.mean_return, -1.0);
}

TEST(Evaluate, GreedyBeatsNoOpOnCraftedScenario)
{
  Environment env = Environment::from_file(testsupport::crafted_config());
  NoOpPolicy noop;
  GreedyMyopicPolicy greedy;
  const auto a = evaluate_policy(env, noop, 3, 5);
  const auto b = evaluate_policy(env, greedy, 3, 5);
  EXPECT_GT(b.mean_return, a.mean_return);
  EXPECT_TRUE(elevates(b, 1));
  EXPECT_FALSE(elevates(b, 2));
}

TEST(Evaluate, CommonRandomNumbersAcrossPolicies)
{
  Environment env = Environment::from_file(testsupport::toy_config());
  NoOpPolicy noop;
  ImpactLedger la, lb;
  evaluate_policy(env, noop, 2, 77, &la);
  GreedyMyopicPolicy greedy;
  evaluate_policy(env, greedy, 2, 77, &lb);
  ASSERT_EQ(la.size(), lb.size());
  for (std::size_t k = 0; k < la.size(); ++k) EXPECT_EQ(la[k].rainfall_mm, lb[k].rainfall_mm);
  const auto again = evaluate_policy(env, noop, 2, 77);
  EXPECT_EQ(again.returns, evaluate_policy(env, noop, 2, 77).returns);
}
