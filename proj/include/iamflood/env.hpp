#pragma once

#include "iamflood/config.hpp"
#include "iamflood/flood.hpp"
#include "iamflood/grid.hpp"
#include "iamflood/impacts.hpp"
#include "iamflood/rainfall.hpp"
#include "iamflood/roads.hpp"
#include "iamflood/transport.hpp"

#include <charconv>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace iamflood {

/// NO_OP, or raise the roads of one zone (index into the zones file order).
struct Action {
  std::optional<std::size_t> elevate;

  static Action noop() { return {}; }
  static Action elevate_zone(std::size_t z) { return {z}; }
  /// 0 is NO_OP, k >= 1 elevates zone k-1.
  static Action from_index(std::size_t k) { return k == 0 ? noop() : elevate_zone(k - 1); }
  std::size_t index() const { return elevate ? *elevate + 1 : 0; }
  friend bool operator==(const Action&, const Action&) = default;
};

struct ZoneObservation {
  double damage = 0.0;       // last R_i
  double delay = 0.0;        // last D_i
  double max_depth_m = 0.0;  // worst effective road depth last year
  bool elevated = false;
  double cumulative_loss = 0.0;  // R_i + D_i to date
};

struct Observation {
  int year = 0;          // the year the next step simulates
  int period_index = 0;
  double rainfall_mm = 0.0;  // last event
  std::vector<ZoneObservation> zones;
  double cumulative_loss = 0.0;  // R + D + A over all zones to date
};

struct StepInfo {
  int year = 0;
  double rainfall_mm = 0.0;
  bool repeat_elevation = false;
  double damage = 0.0;
  double delay = 0.0;
  double action_cost = 0.0;
  double stranded_trips = 0.0;
};

struct StepResult {
  Observation observation;
  double reward = 0.0;
  bool done = false;
  StepInfo info;
};

struct LedgerRow {
  int episode = 0;
  int year = 0;
  std::string taz_id;
  double rainfall_mm = 0.0;
  double damage = 0.0;
  double delay = 0.0;
  double action_cost = 0.0;
  double reward_component = 0.0;
};

using ImpactLedger = std::vector<LedgerRow>;

inline constexpr const char* kLedgerHeader = "episode,year,taz_id,rainfall_mm,R_i,D_i,A_i,reward_component";

inline std::string ledger_line(const LedgerRow& r)
{
  using text::format_double;
  return std::to_string(r.episode) + "," + std::to_string(r.year) + "," + r.taz_id + "," +
         format_double(r.rainfall_mm) + "," + format_double(r.damage) + "," + format_double(r.delay) + "," +
         format_double(r.action_cost) + "," + format_double(r.reward_component);
}

inline void write_ledger_csv(std::ostream& out, const ImpactLedger& ledger, bool header = true)
{
  if (header) out << kLedgerHeader << '\n';
  for (const auto& r : ledger) out << ledger_line(r) << '\n';
}

inline ImpactLedger read_ledger_csv(const std::string& path)
{
  const auto t = text::read_csv(path, text::split(kLedgerHeader, ','));
  ImpactLedger out;
  for (const auto& row : t.rows)
    out.push_back({static_cast<int>(text::field_int(t, row, 0)), static_cast<int>(text::field_int(t, row, 1)),
                   row.fields[2], text::field_double(t, row, 3), text::field_double(t, row, 4),
                   text::field_double(t, row, 5), text::field_double(t, row, 6), text::field_double(t, row, 7)});
  return out;
}

/// -(beta_R R + beta_D D + beta_A A) for one zone-year: a loss, negated so that larger is better.
inline double reward_component(const RewardWeights& w, double damage, double delay, double action_cost)
{
  return 0.0 - (w.beta_r * damage + w.beta_d * delay + w.beta_a * action_cost);
}

/// Derives the per-episode weather seed so that episode k of every policy
/// sees the same rainfall.
inline std::uint64_t episode_seed(std::uint64_t base, int episode) { return base + static_cast<std::uint64_t>(episode); }

/// One environment instance: static inputs are loaded once, reset() starts
/// a new episode. Single-threaded.
class Environment {
 public:
  explicit Environment(EpisodeConfig cfg) : cfg_(std::move(cfg)) { load(); }

  static Environment from_file(const std::string& path) { return Environment(load_config(path)); }

  const EpisodeConfig& config() const { return cfg_; }
  const std::vector<TazZone>& zones() const { return zones_; }
  std::size_t zone_count() const { return zones_.size(); }
  std::size_t action_count() const { return zones_.size() + 1; }
  int year_start() const { return year_start_; }
  int year_end() const { return year_end_; }
  int episode_length() const { return year_end_ - year_start_ + 1; }
  const ClimateScenario& scenario() const { return scenario_; }
  const DemGrid& dem() const { return dem_; }
  const OdMatrix& od() const { return od_; }
  const TazGraph& graph() const { return graph_; }
  const RoutingResult& dry_routing() const { return dry_; }
  const std::vector<RoadSegment>& segments() const { return segments_; }
  const std::vector<std::size_t>& segment_zone() const { return segment_zone_; }
  const CostTable& cost_table() const { return costs_; }
  const DamageCurves& damage_curves() const { return curves_; }
  const std::vector<std::string>& warnings() const { return warnings_; }
  double zone_road_km(std::size_t z) const { return road_km_.at(z); }
  double elevation_cost(std::size_t z) const { return cfg_.elevation_cost_per_km * road_km_.at(z); }

  Observation reset() { return reset(cfg_.seed, 0); }

  /// Starts an episode with the given zones already elevated, as a given
  /// state and with no action cost booked.
  Observation reset(std::uint64_t seed, int episode, const std::vector<std::size_t>& pre_elevated)
  {
    reset(seed, episode);
    for (auto z : pre_elevated) {
      obs_.zones.at(z).elevated = true;
      offsets_[z] = cfg_.elevation_height_m;
    }
    return obs_;
  }

  Observation reset(std::uint64_t seed, int episode = 0)
  {
    seed_ = seed;
    episode_ = episode;
    year_ = year_start_;
    active_ = true;
    offsets_.assign(zones_.size(), 0.0);
    ledger_.clear();
    obs_ = Observation{};
    obs_.year = year_;
    obs_.period_index = static_cast<int>(scenario_.period_index(year_));
    obs_.zones.assign(zones_.size(), ZoneObservation{});
    return obs_;
  }

  bool done() const { return !active_; }
  const Observation& observation() const { return obs_; }
  const ImpactLedger& ledger() const { return ledger_; }
  std::uint64_t seed() const { return seed_; }
  int episode() const { return episode_; }

  bool valid(const Action& a) const
  {
    return !a.elevate || *a.elevate < zones_.size();
  }

  StepResult step(const Action& action)
  {
    if (!active_) throw std::logic_error("step called on a finished episode; call reset first");
    if (!valid(action)) throw std::out_of_range("action elevates unknown zone index " + std::to_string(*action.elevate));
    const std::size_t n = zones_.size();
    StepResult res;
    res.info.year = year_;

    std::vector<double> action_cost(n, 0.0);
    if (action.elevate) {
      const auto z = *action.elevate;
      if (obs_.zones[z].elevated) {
        res.info.repeat_elevation = true;
      } else {
        obs_.zones[z].elevated = true;
        offsets_[z] = cfg_.elevation_height_m;
        action_cost[z] = elevation_cost(z);
      }
    }

    const auto event = sample_annual_event(scenario_, year_, seed_);
    res.info.rainfall_mm = event.rainfall_mm;
    const DepthField& field = flood(event.rainfall_mm);

    std::vector<EdgeTime> times(graph_.edges().size());
    for (std::size_t e = 0; e < times.size(); ++e)
      times[e] = edge_travel_time(graph_.edges()[e], segments_, &field, offsets_, segment_zone_, cfg_.disruption);
    const auto wet = assign_trips(od_, graph_, shortest_paths(graph_, times));

    const auto damage = zone_damage(n, segments_, segment_zone_, field, offsets_, costs_, curves_);
    const auto delay = zone_delay(dry_, wet, od_, cfg_.vot_per_hour, cfg_.stranded_trip_cost());
    res.info.stranded_trips = delay.total_stranded;

    std::vector<double> max_depth(n, 0.0);
    for (std::size_t k = 0; k < segments_.size(); ++k) {
      const auto z = segment_zone_[k];
      max_depth[z] = std::max(max_depth[z], depth_at_cells(field, segments_[k].cells, offsets_[z]));
    }

    for (std::size_t z = 0; z < n; ++z) {
      const double c = reward_component(cfg_.weights, damage[z], delay.delay[z], action_cost[z]);
      res.reward += c;
      ledger_.push_back(
          {episode_, year_, zones_[z].id, event.rainfall_mm, damage[z], delay.delay[z], action_cost[z], c});
      auto& zo = obs_.zones[z];
      zo.damage = damage[z];
      zo.delay = delay.delay[z];
      zo.max_depth_m = max_depth[z];
      zo.cumulative_loss += damage[z] + delay.delay[z];
      obs_.cumulative_loss += damage[z] + delay.delay[z] + action_cost[z];
      res.info.damage += damage[z];
      res.info.delay += delay.delay[z];
      res.info.action_cost += action_cost[z];
    }
    obs_.rainfall_mm = event.rainfall_mm;

    ++year_;
    active_ = year_ <= year_end_;
    obs_.year = year_;
    obs_.period_index = static_cast<int>(scenario_.period_index(std::min(year_, year_end_)));
    res.observation = obs_;
    res.done = !active_;
    return res;
  }

  /// Text snapshot of the dynamic state. Restoring it into an environment
  /// built from the same config reproduces the rest of the episode.
  std::string snapshot() const
  {
    using text::format_double;
    std::ostringstream out;
    out << "iamflood-state 1\n";
    out << "episode=" << episode_ << "\nseed=" << seed_ << "\nyear=" << year_ << "\nactive=" << (active_ ? 1 : 0)
        << "\nrainfall_mm=" << format_double(obs_.rainfall_mm)
        << "\ncumulative_loss=" << format_double(obs_.cumulative_loss) << '\n';
    for (std::size_t z = 0; z < zones_.size(); ++z) {
      const auto& zo = obs_.zones[z];
      out << "zone=" << zones_[z].id << ',' << (zo.elevated ? 1 : 0) << ',' << format_double(zo.damage) << ','
          << format_double(zo.delay) << ',' << format_double(zo.max_depth_m) << ','
          << format_double(zo.cumulative_loss) << '\n';
    }
    return out.str();
  }

  /// Restores a snapshot. The ledger restarts empty.
  void restore(const std::string& snap)
  {
    std::istringstream in(snap);
    std::string line;
    if (!std::getline(in, line) || line != "iamflood-state 1") throw InputError("not an iamflood state snapshot");
    Observation obs;
    obs.zones.assign(zones_.size(), ZoneObservation{});
    std::size_t zone_rows = 0;
    long long episode = 0, year = 0, active = 0;
    bool have_seed = false;
    auto num = [](const std::string& v) {
      double d = 0.0;
      if (!text::parse_double(v, d)) throw InputError("bad number '" + v + "' in snapshot");
      return d;
    };
    auto integer = [](const std::string& v) {
      long long i = 0;
      if (!text::parse_int(v, i)) throw InputError("bad integer '" + v + "' in snapshot");
      return i;
    };
    std::uint64_t useed = 0;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const auto eq = line.find('=');
      if (eq == std::string::npos) throw InputError("bad snapshot line '" + line + "'");
      const auto key = line.substr(0, eq);
      const auto value = line.substr(eq + 1);
      if (key == "episode") episode = integer(value);
      else if (key == "seed") {
        const auto [p, ec] = std::from_chars(value.data(), value.data() + value.size(), useed);
        if (ec != std::errc() || p != value.data() + value.size()) throw InputError("bad seed in snapshot");
        have_seed = true;
      } else if (key == "year") year = integer(value);
      else if (key == "active") active = integer(value);
      else if (key == "rainfall_mm") obs.rainfall_mm = num(value);
      else if (key == "cumulative_loss") obs.cumulative_loss = num(value);
      else if (key == "zone") {
        const auto f = text::split(value, ',');
        if (f.size() != 6 || zone_rows >= zones_.size() || f[0] != zones_[zone_rows].id)
          throw InputError("snapshot zone row does not match the zones of this environment");
        auto& zo = obs.zones[zone_rows++];
        zo.elevated = integer(f[1]) != 0;
        zo.damage = num(f[2]);
        zo.delay = num(f[3]);
        zo.max_depth_m = num(f[4]);
        zo.cumulative_loss = num(f[5]);
      } else throw InputError("unknown snapshot key '" + key + "'");
    }
    if (zone_rows != zones_.size() || !have_seed) throw InputError("incomplete snapshot");
    if (year < year_start_ || year > year_end_ + 1) throw InputError("snapshot year outside the episode span");
    episode_ = static_cast<int>(episode);
    seed_ = useed;
    year_ = static_cast<int>(year);
    active_ = active != 0 && year_ <= year_end_;
    obs.year = year_;
    obs.period_index = static_cast<int>(scenario_.period_index(std::min(year_, year_end_)));
    offsets_.assign(zones_.size(), 0.0);
    for (std::size_t z = 0; z < zones_.size(); ++z)
      if (obs.zones[z].elevated) offsets_[z] = cfg_.elevation_height_m;
    obs_ = std::move(obs);
    ledger_.clear();
  }

  /// Flood depths for a rainfall amount, memoised. Offsets do not enter the
  /// flood itself, only its reading at road cells.
  const DepthField& flood(double rainfall_mm)
  {
    auto it = flood_cache_.find(rainfall_mm);
    if (it != flood_cache_.end()) return it->second;
    if (flood_cache_.size() >= kFloodCacheLimit) flood_cache_.clear();
    return flood_cache_.emplace(rainfall_mm, compute_flood(dem_, rainfall_mm, cfg_.boundary)).first->second;
  }

 private:
  static constexpr std::size_t kFloodCacheLimit = 4096;

  template <class F>
  static auto with_context(const std::string& what, F&& f)
  {
    try {
      return f();
    } catch (const InputError&) {
      throw;
    } catch (const std::exception& e) {
      throw InputError(what + ": " + e.what());
    }
  }

  void load()
  {
    scenario_ = load_quantile_tables(cfg_.rainfall);
    dem_ = load_dem(cfg_.dem);
    zones_ = load_zones(cfg_.zones);
    const auto adjacency = load_adjacency(cfg_.adjacency);
    segments_ = load_roads(cfg_.roads);
    costs_ = load_cost_table(cfg_.cost_table);
    if (cfg_.damage_curves.empty()) curves_.set("*", default_damage_curve());
    else curves_ = load_damage_curves(cfg_.damage_curves);

    year_start_ = cfg_.year_start.value_or(scenario_.first_year());
    year_end_ = cfg_.year_end.value_or(scenario_.last_year());
    if (year_start_ < scenario_.first_year() || year_end_ > scenario_.last_year())
      throw InputError(cfg_.source + ": year span " + std::to_string(year_start_) + "-" + std::to_string(year_end_) +
                       " is outside the rainfall scenario " + std::to_string(scenario_.first_year()) + "-" +
                       std::to_string(scenario_.last_year()));

    for (const auto& s : segments_)
      for (const auto& c : s.cells)
        if (!dem_.in_bounds(c.row, c.col))
          throw InputError(cfg_.roads + ": segment '" + s.id + "' cell " + std::to_string(c.row) + ":" +
                           std::to_string(c.col) + " is outside the DEM");
    with_context(cfg_.roads, [&] {
      check_coverage(segments_, costs_, curves_);
      return 0;
    });

    segment_zone_.clear();
    road_km_.assign(zones_.size(), 0.0);
    for (const auto& s : segments_) {
      const auto z = zone_index(zones_, s.taz_id);
      if (!z) throw InputError(cfg_.roads + ": segment '" + s.id + "' names unknown zone '" + s.taz_id + "'");
      segment_zone_.push_back(*z);
      road_km_[*z] += s.length_m / 1000.0;
    }

    graph_ = build_taz_graph(zones_, adjacency, segments_, cfg_.free_flow_kmh, &warnings_);

    std::vector<double> out(zones_.size()), in(zones_.size());
    for (std::size_t i = 0; i < zones_.size(); ++i) out[i] = zones_[i].trips_out, in[i] = zones_[i].trips_in;
    const auto fit = with_context(cfg_.zones, [&] {
      return ipf_fit(build_seed_matrix(zones_, cfg_.impedance_lambda_m), out, in);
    });
    if (!fit.converged)
      warnings_.push_back("trip distribution did not converge after " + std::to_string(fit.iterations) +
                          " sweeps (max relative deviation " + text::format_double(fit.max_deviation) + ")");
    od_ = fit.trips;

    std::vector<EdgeTime> dry_times(graph_.edges().size());
    for (std::size_t e = 0; e < dry_times.size(); ++e)
      dry_times[e] = edge_travel_time(graph_.edges()[e], segments_, nullptr, {}, {}, cfg_.disruption);
    dry_ = assign_trips(od_, graph_, shortest_paths(graph_, dry_times));
    reset();
  }

 public:
  /// Fallback depth-damage curve used when the config names none.
  static std::vector<DamagePoint> default_damage_curve()
  {
    return {{0.0, 0.0}, {0.1, 0.05}, {0.3, 0.2}, {0.6, 0.45}, {1.0, 0.7}, {2.0, 1.0}};
  }

 private:
  EpisodeConfig cfg_;
  ClimateScenario scenario_;
  DemGrid dem_;
  std::vector<TazZone> zones_;
  std::vector<RoadSegment> segments_;
  std::vector<std::size_t> segment_zone_;
  std::vector<double> road_km_;
  CostTable costs_;
  DamageCurves curves_;
  TazGraph graph_{0};
  OdMatrix od_;
  RoutingResult dry_;
  std::vector<std::string> warnings_;
  int year_start_ = 0;
  int year_end_ = 0;

  std::uint64_t seed_ = 0;
  int episode_ = 0;
  int year_ = 0;
  bool active_ = false;
  std::vector<double> offsets_;
  Observation obs_;
  ImpactLedger ledger_;
  std::map<double, DepthField> flood_cache_;
};

/// Reward recomputed from the R, D and A columns of a ledger.
inline double ledger_reward(const ImpactLedger& ledger, const RewardWeights& w)
{
  double total = 0.0;
  for (const auto& r : ledger) total += reward_component(w, r.damage, r.delay, r.action_cost);
  return total;
}

} // namespace iamflood
