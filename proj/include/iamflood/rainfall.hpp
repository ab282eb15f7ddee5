#pragma once

// Per-period rainfall distributions stored as quantile tables, and the
// one-event-per-year sampler built on them.

#include "iamflood/error.hpp"
#include "iamflood/rng.hpp"
#include "iamflood/text.hpp"

#include <algorithm>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace iamflood {

struct QuantilePoint {
  double cum_probability = 0.0;
  double rainfall_mm = 0.0;
};

/// Stationary distribution for the years [period_start, period_end].
struct RainfallCdf {
  int period_start = 0;
  int period_end = 0;
  std::vector<QuantilePoint> points;

  double min_mm() const { return points.front().rainfall_mm; }
  double max_mm() const { return points.back().rainfall_mm; }
  bool covers(int year) const { return year >= period_start && year <= period_end; }
};

/// Checks the table invariants; returns an empty string when valid.
inline std::string validate_cdf(const RainfallCdf& cdf)
{
  if (cdf.period_start > cdf.period_end) return "period_start after period_end";
  if (cdf.points.size() < 2) return "a table needs at least two points";
  if (cdf.points.front().cum_probability != 0.0) return "first cum_probability must be 0";
  if (cdf.points.back().cum_probability != 1.0) return "last cum_probability must be 1";
  for (std::size_t i = 0; i < cdf.points.size(); ++i) {
    const auto& p = cdf.points[i];
    if (p.cum_probability < 0.0 || p.cum_probability > 1.0) return "cum_probability outside [0,1]";
    if (p.rainfall_mm < 0.0) return "negative rainfall_mm";
    if (i > 0) {
      if (p.cum_probability <= cdf.points[i - 1].cum_probability) return "cum_probability not strictly increasing";
      if (p.rainfall_mm < cdf.points[i - 1].rainfall_mm) return "rainfall_mm decreasing";
    }
  }
  return {};
}

struct RainEvent {
  int year = 0;
  double rainfall_mm = 0.0;
};

/// Ordered, gap-free sequence of period tables.
class ClimateScenario {
public:
  ClimateScenario() = default;

  /// Sorts by period start and checks contiguity. Throws InputError on gaps or overlaps.
  explicit ClimateScenario(std::vector<RainfallCdf> cdfs) : cdfs_(std::move(cdfs))
  {
    if (cdfs_.empty()) throw InputError("climate scenario has no periods");
    std::sort(cdfs_.begin(), cdfs_.end(),
              [](const RainfallCdf& a, const RainfallCdf& b) { return a.period_start < b.period_start; });
    for (const auto& c : cdfs_) {
      if (auto err = validate_cdf(c); !err.empty())
        throw InputError("period " + std::to_string(c.period_start) + "-" + std::to_string(c.period_end) + ": " + err);
    }
    for (std::size_t i = 1; i < cdfs_.size(); ++i) {
      const int expected = cdfs_[i - 1].period_end + 1;
      if (cdfs_[i].period_start > expected) throw InputError("year gap at " + std::to_string(expected));
      if (cdfs_[i].period_start < expected) throw InputError("year overlap at " + std::to_string(cdfs_[i].period_start));
    }
  }

  const std::vector<RainfallCdf>& cdfs() const { return cdfs_; }
  int first_year() const { return cdfs_.front().period_start; }
  int last_year() const { return cdfs_.back().period_end; }
  bool covers(int year) const { return !cdfs_.empty() && year >= first_year() && year <= last_year(); }

  /// Index of the period governing `year`. Throws std::out_of_range outside the span.
  std::size_t period_index(int year) const
  {
    for (std::size_t i = 0; i < cdfs_.size(); ++i)
      if (cdfs_[i].covers(year)) return i;
    throw std::out_of_range("year " + std::to_string(year) + " outside scenario span " +
                            std::to_string(cdfs_.empty() ? 0 : first_year()) + "-" +
                            std::to_string(cdfs_.empty() ? 0 : last_year()));
  }

private:
  std::vector<RainfallCdf> cdfs_;
};

/// Loads `period_start,period_end,cum_probability,rainfall_mm`. Rows of one
/// period must be contiguous and sorted by probability.
inline ClimateScenario load_quantile_tables(const std::string& path)
{
  const auto table = text::read_csv(path, {"period_start", "period_end", "cum_probability", "rainfall_mm"});
  std::vector<RainfallCdf> cdfs;
  for (const auto& row : table.rows) {
    const auto start = text::field_int(table, row, 0);
    const auto end = text::field_int(table, row, 1);
    const double p = text::field_double(table, row, 2);
    const double mm = text::field_double(table, row, 3);
    if (start > end) throw input_error(path, row.line, "period_start after period_end");
    if (p < 0.0 || p > 1.0) throw input_error(path, row.line, "cum_probability outside [0,1]");
    if (mm < 0.0) throw input_error(path, row.line, "negative rainfall_mm");

    const bool continues = !cdfs.empty() && cdfs.back().period_start == start && cdfs.back().period_end == end;
    if (!continues) {
      for (const auto& c : cdfs)
        if (c.period_start == start && c.period_end == end)
          throw input_error(path, row.line, "rows of period " + std::to_string(start) + "-" + std::to_string(end) +
                                                " are not contiguous");
      if (!cdfs.empty() && cdfs.back().points.back().cum_probability != 1.0)
        throw input_error(path, row.line, "previous period does not end at cum_probability 1");
      if (p != 0.0) throw input_error(path, row.line, "period must start at cum_probability 0");
      cdfs.push_back({static_cast<int>(start), static_cast<int>(end), {}});
    } else {
      const auto& prev = cdfs.back().points.back();
      if (p <= prev.cum_probability) throw input_error(path, row.line, "unsorted probabilities");
      if (mm < prev.rainfall_mm) throw input_error(path, row.line, "rainfall_mm decreasing with probability");
    }
    cdfs.back().points.push_back({p, mm});
  }
  if (cdfs.empty()) throw input_error(path, 1, "no quantile rows");
  if (cdfs.back().points.back().cum_probability != 1.0)
    throw input_error(path, table.rows.back().line, "last period does not end at cum_probability 1");

  std::sort(cdfs.begin(), cdfs.end(),
            [](const RainfallCdf& a, const RainfallCdf& b) { return a.period_start < b.period_start; });
  for (std::size_t i = 1; i < cdfs.size(); ++i) {
    const int expected = cdfs[i - 1].period_end + 1;
    // Locate the first row of the offending period so the message carries a line number.
    std::size_t line = 0;
    for (const auto& row : table.rows)
      if (text::field_int(table, row, 0) == cdfs[i].period_start) {
        line = row.line;
        break;
      }
    if (cdfs[i].period_start > expected) throw input_error(path, line, "year gap at " + std::to_string(expected));
    if (cdfs[i].period_start < expected)
      throw input_error(path, line, "year overlap at " + std::to_string(cdfs[i].period_start));
  }
  return ClimateScenario(std::move(cdfs));
}

inline const RainfallCdf& cdf_for_year(const ClimateScenario& scenario, int year)
{
  return scenario.cdfs()[scenario.period_index(year)];
}

/// Piecewise-linear inverse CDF. Flat steps in probability cannot occur
/// (strictly increasing), so every u has a unique image.
inline double inverse_cdf(const RainfallCdf& cdf, double u)
{
  if (!(u >= 0.0 && u <= 1.0)) throw std::domain_error("probability outside [0,1]");
  const auto& pts = cdf.points;
  auto hi = std::lower_bound(pts.begin(), pts.end(), u,
                             [](const QuantilePoint& p, double v) { return p.cum_probability < v; });
  if (hi == pts.begin()) return pts.front().rainfall_mm;
  if (hi == pts.end()) return pts.back().rainfall_mm;
  const auto lo = hi - 1;
  const double t = (u - lo->cum_probability) / (hi->cum_probability - lo->cum_probability);
  const double v = lo->rainfall_mm + t * (hi->rainfall_mm - lo->rainfall_mm);
  return std::clamp(v, lo->rainfall_mm, hi->rainfall_mm);
}

/// Uniform draw for (seed, year). Independent of call order, so every policy
/// evaluated with the same seed sees the same weather.
inline double annual_uniform(std::uint64_t seed, int year)
{
  return to_unit(stream_key(seed, static_cast<std::uint64_t>(static_cast<std::int64_t>(year))));
}

inline RainEvent sample_annual_event(const ClimateScenario& scenario, int year, std::uint64_t seed)
{
  const auto& cdf = cdf_for_year(scenario, year);
  return {year, inverse_cdf(cdf, annual_uniform(seed, year))};
}

} // namespace iamflood
