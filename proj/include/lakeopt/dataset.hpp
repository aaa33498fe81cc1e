#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace lakeopt {

// Core monthly variables, in canonical column order.
//   P   precipitation on the lake area [mm]
//   R   total surface runoff into the lake [m3/s]
//   G   groundwater level in adjacent aquifers [m a.m.s.l]
//   E   evaporation from the lake [mm]
//   Ur  agricultural use of river water [mm]
//   Ug  agricultural use of groundwater [mm]
//   H   lake water level [m a.m.s.l]
inline constexpr std::array<std::string_view, 7> kCoreVariables = {
    "P", "R", "G", "E", "Ur", "Ug", "H"};

inline constexpr std::array<std::string_view, 12> kMonthNames = {
    "January", "February", "March",     "April",   "May",      "June",
    "July",    "August",   "September", "October", "November", "December"};

struct MonthlyRecord {
  int year = 0;
  int month = 0;  // 1..12
  double P = 0.0;
  double R = 0.0;
  double G = 0.0;
  double E = 0.0;
  double Ur = 0.0;
  double Ug = 0.0;
  double H = 0.0;
  std::optional<double> Hcon;  // optional target level for the month

  double value(std::string_view name) const;
  void set_value(std::string_view name, double v);
};

enum class Provenance { kMeasured, kSynthetic };

// Ordered, duplicate-free monthly series. Immutable after construction.
class TimeSeriesDataset {
 public:
  TimeSeriesDataset() = default;
  // Sorts by (year, month), validates per-record invariants and rejects
  // duplicate (year, month) pairs.
  TimeSeriesDataset(std::vector<MonthlyRecord> records, Provenance provenance);

  const std::vector<MonthlyRecord>& records() const { return records_; }
  std::size_t size() const { return records_.size(); }
  Provenance provenance() const { return provenance_; }
  bool has_constraint_column() const;

 private:
  std::vector<MonthlyRecord> records_;
  Provenance provenance_ = Provenance::kMeasured;
};

struct VariableStats {
  double min = 0.0;
  double max = 0.0;
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation (n-1); 0 for a single value
};

// Per-variable summary in canonical order; Hcon appears only when present.
class FeatureStats {
 public:
  void add(std::string name, VariableStats stats);
  bool has(std::string_view name) const;
  const VariableStats& at(std::string_view name) const;  // throws kLookup
  const std::vector<std::pair<std::string, VariableStats>>& items() const {
    return items_;
  }

 private:
  std::vector<std::pair<std::string, VariableStats>> items_;
};

// Per-variable min-max mapping onto [0, 1], captured at fit time.
class MinMaxScaler {
 public:
  static MinMaxScaler fit(const TimeSeriesDataset& ds,
                          std::span<const std::string> variables);

  // (x - min) / (max - min); values outside the fitted range map outside
  // [0, 1] without clipping.
  double transform(std::string_view variable, double x) const;
  double inverse(std::string_view variable, double x) const;
  bool has(std::string_view variable) const;
  std::pair<double, double> range(std::string_view variable) const;

  std::vector<double> transform_row(const MonthlyRecord& record,
                                    std::span<const std::string> variables) const;

 private:
  std::map<std::string, std::pair<double, double>, std::less<>> ranges_;
};

// CSV interface. Header: year,month,P,R,G,E,Ur,Ug,H[,Hcon], '.' decimal
// separator, values written with 6 significant digits (no exponent for
// magnitudes in [1e-3, 1e7)).
TimeSeriesDataset load_csv(const std::string& path,
                           const std::map<std::string, std::string>& schema = {});
TimeSeriesDataset parse_csv(std::istream& in, Provenance provenance,
                            const std::map<std::string, std::string>& schema = {});
void save_csv(const TimeSeriesDataset& ds, const std::string& path);
std::string to_csv(const TimeSeriesDataset& ds);

// Canonical 6-significant-digit number formatting used by save_csv.
std::string format_sig6(double x);

FeatureStats compute_stats(const TimeSeriesDataset& ds);
std::string stats_to_json(const FeatureStats& stats);
std::string stats_to_csv(const FeatureStats& stats);

MinMaxScaler fit_scaler(const TimeSeriesDataset& ds,
                        std::span<const std::string> variables);

// Bundled reference ranges for the study basin; used as default synthesis
// bounds and for the constraint-envelope check.
FeatureStats reference_stats();

struct SynthesisOptions {
  int n_years = 19;
  int start_year = 2001;
  std::uint64_t seed = 42;
  // Scales the noise term of the planted level function; 0 makes the level an
  // exact function of the other variables.
  double target_noise = 1.0;
};

// Seasonal sinusoid + seeded noise per variable, clipped to the given bounds.
// The lake level is planted as a known function dominated by G and R, so the
// synthetic series has a ground-truth sensitivity ranking.
TimeSeriesDataset synthesize_dataset(const FeatureStats& bounds,
                                     const SynthesisOptions& options);

struct ConstraintPattern {
  std::array<double, 12> level{};      // index 0 = January
  bool within_reference_envelope = true;
};

// Monthly level targets copied from the given reference year. Values outside
// the bundled reference envelope only clear the flag; they are not an error.
ConstraintPattern monthly_constraint_pattern(const TimeSeriesDataset& ds,
                                             int reference_year);

}  // namespace lakeopt
