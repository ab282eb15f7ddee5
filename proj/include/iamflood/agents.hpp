#pragma once

#include "iamflood/env.hpp"
#include "iamflood/rng.hpp"
#include "iamflood/text.hpp"

#include <cmath>
#include <map>
#include <memory>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

namespace iamflood {

/// NO_OP plus every zone not yet elevated, as action indices in increasing order.
inline std::vector<std::size_t> valid_actions(const Observation& obs)
{
  std::vector<std::size_t> out{0};
  for (std::size_t z = 0; z < obs.zones.size(); ++z)
    if (!obs.zones[z].elevated) out.push_back(z + 1);
  return out;
}

class Policy {
 public:
  virtual ~Policy() = default;
  virtual std::string name() const = 0;
  /// Called after each reset.
  virtual void begin_episode(const Environment&) {}
  virtual Action act(const Observation& obs, const Environment& env) = 0;
};

class NoOpPolicy : public Policy {
 public:
  std::string name() const override { return "noop"; }
  Action act(const Observation&, const Environment&) override { return Action::noop(); }
};

/// Uniform over the valid actions.
class RandomPolicy : public Policy {
 public:
  explicit RandomPolicy(std::uint64_t seed) : rng_(seed) {}
  std::string name() const override { return "random"; }
  Action act(const Observation& obs, const Environment&) override
  {
    const auto valid = valid_actions(obs);
    return Action::from_index(valid[rng_.below(valid.size())]);
  }

 private:
  SplitMix64 rng_;
};

/// Elevates the un-elevated zone with the largest remembered loss once that
/// loss exceeds the zone's elevation cost. Remembered loss decays by
/// lookback_weight per year; 1 keeps the plain cumulative total.
class GreedyMyopicPolicy : public Policy {
 public:
  explicit GreedyMyopicPolicy(double lookback_weight = 1.0) : weight_(lookback_weight)
  {
    if (!(weight_ >= 0.0 && weight_ <= 1.0)) throw std::invalid_argument("lookback weight must be in [0, 1]");
  }
  std::string name() const override { return "greedy"; }
  void begin_episode(const Environment& env) override
  {
    memory_.assign(env.zone_count(), 0.0);
    last_year_ = 0;
  }

  Action act(const Observation& obs, const Environment& env) override
  {
    if (memory_.size() != obs.zones.size()) begin_episode(env);
    if (obs.year != last_year_ && obs.year != env.year_start())
      for (std::size_t z = 0; z < memory_.size(); ++z)
        memory_[z] = weight_ * memory_[z] + obs.zones[z].damage + obs.zones[z].delay;
    last_year_ = obs.year;
    std::optional<std::size_t> best;
    for (std::size_t z = 0; z < memory_.size(); ++z) {
      if (obs.zones[z].elevated || !(memory_[z] > env.elevation_cost(z))) continue;
      if (!best || memory_[z] > memory_[*best]) best = z;
    }
    return best ? Action::elevate_zone(*best) : Action::noop();
  }

 private:
  double weight_;
  std::vector<double> memory_;
  int last_year_ = 0;
};

/// State discretisation: period, number of elevated zones, and the last
/// year's total R + D in logarithmic bins. Bin 0 holds losses below
/// `first_edge`; bin k covers [first_edge * ratio^(k-1), first_edge * ratio^k).
struct Discretization {
  int loss_bins = 8;
  double first_edge = 1.0;
  double ratio = 10.0;

  int loss_bin(double loss) const
  {
    if (!(loss >= first_edge)) return 0;
    const double k = std::floor(std::log(loss / first_edge) / std::log(ratio)) + 1.0;
    return static_cast<int>(std::min<double>(k, loss_bins - 1));
  }

  std::string key(const Observation& obs) const
  {
    int elevated = 0;
    double loss = 0.0;
    for (const auto& z : obs.zones) {
      elevated += z.elevated ? 1 : 0;
      loss += z.damage + z.delay;
    }
    return "p" + std::to_string(obs.period_index) + "|e" + std::to_string(elevated) + "|b" +
           std::to_string(loss_bin(loss));
  }
};

class QTable {
 public:
  QTable() = default;
  explicit QTable(std::size_t actions) : actions_(actions) {}

  std::size_t action_count() const { return actions_; }
  std::size_t size() const { return values_.size(); }
  bool empty() const { return values_.empty(); }
  bool contains(const std::string& key) const { return values_.count(key) != 0; }
  const std::map<std::string, std::vector<double>>& values() const { return values_; }

  std::vector<double>& row(const std::string& key)
  {
    auto it = values_.find(key);
    if (it == values_.end()) it = values_.emplace(key, std::vector<double>(actions_, 0.0)).first;
    return it->second;
  }

  double value(const std::string& key, std::size_t action) const
  {
    const auto it = values_.find(key);
    return it == values_.end() ? 0.0 : it->second.at(action);
  }

  /// Highest-valued action among `candidates`; ties go to the lowest index.
  std::size_t argmax(const std::string& key, const std::vector<std::size_t>& candidates) const
  {
    std::size_t best = candidates.front();
    for (auto a : candidates)
      if (value(key, a) > value(key, best)) best = a;
    return best;
  }

  double max_value(const std::string& key, const std::vector<std::size_t>& candidates) const
  {
    return value(key, argmax(key, candidates));
  }

  void write_csv(std::ostream& out) const
  {
    out << "state_key,action,value\n";
    for (const auto& [key, row] : values_)
      for (std::size_t a = 0; a < row.size(); ++a) out << key << ',' << a << ',' << text::format_double(row[a]) << '\n';
  }

  static QTable read_csv(const std::string& path, std::size_t actions)
  {
    const auto t = text::read_csv(path, {"state_key", "action", "value"});
    QTable q(actions);
    for (const auto& row : t.rows) {
      const auto a = text::field_int(t, row, 1);
      if (a < 0 || static_cast<std::size_t>(a) >= actions)
        throw input_error(path, row.line, "action " + std::to_string(a) + " out of range for " +
                                              std::to_string(actions) + " actions");
      const double v = text::field_double(t, row, 2);
      if (!std::isfinite(v)) throw input_error(path, row.line, "non-finite value");
      q.row(row.fields[0])[static_cast<std::size_t>(a)] = v;
    }
    return q;
  }

 private:
  std::size_t actions_ = 0;
  std::map<std::string, std::vector<double>> values_;
};

/// Greedy (epsilon = 0) policy over a QTable. Unseen states fall to NO_OP.
class QPolicy : public Policy {
 public:
  QPolicy(QTable table, Discretization disc = {}) : table_(std::move(table)), disc_(disc) {}
  std::string name() const override { return "qtable"; }
  Action act(const Observation& obs, const Environment& env) override
  {
    if (table_.action_count() != env.action_count())
      throw std::invalid_argument("Q-table was trained for " + std::to_string(table_.action_count()) +
                                  " actions, environment has " + std::to_string(env.action_count()));
    return Action::from_index(table_.argmax(disc_.key(obs), valid_actions(obs)));
  }
  const QTable& table() const { return table_; }

 private:
  QTable table_;
  Discretization disc_;
};

struct QLearningParams {
  double alpha = 0.1;
  double gamma = 0.95;
  double epsilon_start = 1.0;
  double epsilon_end = 0.05;
  Discretization discretization;

  void validate() const
  {
    if (!(alpha > 0.0 && alpha <= 1.0)) throw std::invalid_argument("alpha must be in (0, 1]");
    if (!(gamma >= 0.0 && gamma <= 1.0)) throw std::invalid_argument("gamma must be in [0, 1]");
    if (!(epsilon_start >= 0.0 && epsilon_start <= 1.0 && epsilon_end >= 0.0 && epsilon_end <= 1.0))
      throw std::invalid_argument("epsilon must be in [0, 1]");
    if (discretization.loss_bins < 1 || !(discretization.first_edge > 0.0) || !(discretization.ratio > 1.0))
      throw std::invalid_argument("bad loss discretisation");
  }

  /// Linear from epsilon_start to epsilon_end over the first half of training.
  double epsilon(int episode, int episodes) const
  {
    const double half = episodes / 2.0;
    if (half <= 0.0 || episode >= half) return epsilon_end;
    return epsilon_start + (epsilon_end - epsilon_start) * (episode / half);
  }
};

struct TrainingResult {
  QTable table;
  std::vector<double> returns;  // per episode
};

inline void write_curve_csv(std::ostream& out, const std::vector<double>& returns)
{
  out << "episode,return\n";
  for (std::size_t e = 0; e < returns.size(); ++e) out << e << ',' << text::format_double(returns[e]) << '\n';
}

/// One-step tabular Q-learning. Episode e uses weather seed episode_seed(seed, e).
inline TrainingResult q_learning_train(Environment& env, const QLearningParams& hp, int episodes, std::uint64_t seed)
{
  hp.validate();
  if (episodes < 0) throw std::invalid_argument("episodes must be >= 0");
  TrainingResult out{QTable(env.action_count()), {}};
  SplitMix64 explore(stream_key(seed, 0x7165786c6f7265ULL));
  const auto& disc = hp.discretization;
  for (int e = 0; e < episodes; ++e) {
    const double eps = hp.epsilon(e, episodes);
    Observation obs = env.reset(episode_seed(seed, e), e);
    double ret = 0.0;
    while (!env.done()) {
      const auto key = disc.key(obs);
      const auto valid = valid_actions(obs);
      const std::size_t a =
          explore.uniform() < eps ? valid[explore.below(valid.size())] : out.table.argmax(key, valid);
      const auto step = env.step(Action::from_index(a));
      ret += step.reward;
      double target = step.reward;
      if (!step.done) target += hp.gamma * out.table.max_value(disc.key(step.observation), valid_actions(step.observation));
      auto& q = out.table.row(key)[a];
      q += hp.alpha * (target - q);
      obs = step.observation;
    }
    out.returns.push_back(ret);
  }
  return out;
}

struct EvaluationSummary {
  std::string policy;
  std::vector<double> returns;
  double mean_return = 0.0;
  double stdev_return = 0.0;
  double mean_damage = 0.0;
  double mean_delay = 0.0;
  double mean_action_cost = 0.0;
  std::vector<std::vector<std::size_t>> actions;  // per episode, per step
};

/// Runs n episodes with weather seeds episode_seed(seed, e), so every policy
/// evaluated with the same seed faces the same events.
inline EvaluationSummary evaluate_policy(Environment& env, Policy& policy, int n_episodes, std::uint64_t seed,
                                         ImpactLedger* ledger = nullptr)
{
  if (n_episodes < 1) throw std::invalid_argument("evaluation needs at least one episode");
  EvaluationSummary s;
  s.policy = policy.name();
  for (int e = 0; e < n_episodes; ++e) {
    Observation obs = env.reset(episode_seed(seed, e), e);
    policy.begin_episode(env);
    double ret = 0.0;
    std::vector<std::size_t> log;
    while (!env.done()) {
      const auto action = policy.act(obs, env);
      const auto step = env.step(action);
      log.push_back(action.index());
      ret += step.reward;
      s.mean_damage += step.info.damage;
      s.mean_delay += step.info.delay;
      s.mean_action_cost += step.info.action_cost;
      obs = step.observation;
    }
    if (ledger) ledger->insert(ledger->end(), env.ledger().begin(), env.ledger().end());
    s.returns.push_back(ret);
    s.actions.push_back(std::move(log));
  }
  const double n = n_episodes;
  for (double r : s.returns) s.mean_return += r / n;
  s.mean_damage /= n;
  s.mean_delay /= n;
  s.mean_action_cost /= n;
  if (n_episodes > 1) {
    double ss = 0.0;
    for (double r : s.returns) ss += (r - s.mean_return) * (r - s.mean_return);
    s.stdev_return = std::sqrt(ss / (n - 1.0));
  }
  return s;
}

/// Builds a policy from a name (`noop`, `random`, `greedy`) or a Q-table CSV path.
inline std::unique_ptr<Policy> make_policy(const std::string& spec, const Environment& env, std::uint64_t seed)
{
  if (spec == "noop") return std::make_unique<NoOpPolicy>();
  if (spec == "random") return std::make_unique<RandomPolicy>(seed);
  if (spec == "greedy") return std::make_unique<GreedyMyopicPolicy>();
  return std::make_unique<QPolicy>(QTable::read_csv(spec, env.action_count()));
}

} // namespace iamflood
