#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "lakeopt/dataset.hpp"
#include "lakeopt/mlp.hpp"
#include "lakeopt/optimize.hpp"
#include "lakeopt/sensitivity.hpp"

namespace lakeopt {

// Which monthly decision variables stay free in the runoff maximization.
// The level coordinate is always pinned to the constraint pattern.
enum class BoundPolicy {
  kMonthlyEnvelope,  // P, G, E free within the month's historical min/max
  kAllFree,          // P, G, E, Ur, Ug free within monthly envelopes
  kClimatology,      // everything pinned to monthly means; pure evaluation
};

std::string to_string(BoundPolicy policy);
BoundPolicy bound_policy_from_string(std::string_view name);

struct SobolSettings {
  int initial_sample_size = 1000;
  double growth_factor = 2.0;
  double tolerance = 0.02;
  int max_sample_size = 32000;
};

struct MorrisSettings {
  int levels = 4;
  int trajectories = 100;
};

// Defaults reproduce the reference configuration: 30/20/10 hidden layers,
// Sobol' start at s=1000 over 6 factors, reference year 2018. Every random
// component inside the pipeline draws a sub-seed derived from `seed`, so one
// value pins the whole run.
struct PipelineConfig {
  std::vector<int> hidden_sizes = {30, 20, 10};
  TrainConfig train_level;    // lake-level model (stage 1)
  TrainConfig train_runoff;   // runoff model (stage 2)
  SobolSettings sobol;
  MorrisSettings morris;
  std::vector<std::string> optimizers = {"ga", "pattern_search", "nlp"};
  SolverConfig solver;
  int reference_year = 2018;
  BoundPolicy bound_policy = BoundPolicy::kMonthlyEnvelope;
  std::uint64_t seed = 42;
  int threads = 1;
};

// Input variable order of the two models.
std::vector<std::string> level_model_inputs();   // P,R,G,E,Ur,Ug -> H
std::vector<std::string> runoff_model_inputs();  // H,P,G,E,Ur,Ug -> R

struct Stage1Result {
  MlpModel model;
  TrainReport report;
  MinMaxScaler scaler;  // fitted over all core variables
  std::vector<std::string> factor_names;
  SobolIndices sobol;
  MorrisIndices morris;
  FactorClassification classification;
  FactorRanking ranking;
};

// Trains the lake-level meta-model and screens its inputs with both methods.
Stage1Result run_stage1(const TimeSeriesDataset& ds, const PipelineConfig& config);

// Standardized training pairs for the runoff model: inputs H,P,G,E,Ur,Ug,
// target R, same scaler family as stage 1.
TrainingSet rearrange(const TimeSeriesDataset& ds, const MinMaxScaler& scaler);

struct OptimizerOutcome {
  std::string method;
  double runoff = 0.0;          // maximized runoff, raw units
  double objective_std = 0.0;   // standardized model output at the solution
  std::vector<double> solution_std;  // full standardized input vector
  bool converged = false;
  long evaluations = 0;
};

struct MonthResult {
  int month = 0;  // 1..12
  double hcon = 0.0;
  double runoff_opt = 0.0;       // best across configured optimizers
  double runoff_hist_mean = 0.0;
  double multiplier = 0.0;       // runoff_opt / runoff_hist_mean
  bool extrapolated = false;     // standardized optimum outside [0, 1]
  bool converged = true;         // false when any optimizer failed to converge
  std::vector<OptimizerOutcome> per_optimizer;
};

struct MonthlyPlan {
  std::array<MonthResult, 12> months;
  int reference_year = 0;
};

// Solves the per-month runoff maximization with the level pinned to the
// reference-year pattern. Months are independent and run in parallel when
// config.threads > 1; results are assembled in month order.
MonthlyPlan run_stage2(const MlpModel& runoff_model, const TimeSeriesDataset& ds,
                       const PipelineConfig& config);

struct SeasonalSummary {
  // Filling: Nov-Jun. Draining: Jul-Oct. Ratio of seasonal means.
  double filling_multiplier = 0.0;
  double draining_multiplier = 0.0;
};

SeasonalSummary seasonal_multipliers(const MonthlyPlan& plan);

bool is_filling_month(int month);

struct OptimizerAgreement {
  std::array<double, 12> month_max_rel_diff{};
  double overall_max = 0.0;
  double overall_mean = 0.0;
  std::vector<int> flagged_months;  // relative spread above 5%
};

// Requires at least two optimizers in the plan entries.
OptimizerAgreement compare_optimizers(const MonthlyPlan& plan);

struct PipelineResult {
  Stage1Result stage1;
  MlpModel runoff_model;
  TrainReport runoff_report;
  MonthlyPlan plan;
  SeasonalSummary seasonal;
  std::optional<OptimizerAgreement> agreement;
};

PipelineResult run_pipeline(const TimeSeriesDataset& ds, const PipelineConfig& config);

// Serialization. All outputs are deterministic for a given (dataset, config):
// no timestamps, sorted keys, round-trip-exact numbers.
std::string plan_to_json(const MonthlyPlan& plan, const SeasonalSummary& seasonal);
std::string plan_to_csv(const MonthlyPlan& plan);
std::string pipeline_to_json(const PipelineResult& result, const PipelineConfig& config);

std::string config_to_json(const PipelineConfig& config);
// Applies fields present in `text` on top of `base`; unknown keys are a
// schema error.
PipelineConfig config_from_json(const std::string& text, PipelineConfig base = {});

}  // namespace lakeopt
