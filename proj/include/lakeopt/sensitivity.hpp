#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace lakeopt {

// Pure scalar function over the unit hypercube. Must be shareable read-only
// across workers; rows may be evaluated in parallel.
using Evaluator = std::function<double(std::span<const double>)>;

// Radial sample plan for the Jansen estimators: base matrices A and B plus
// the column-substituted hybrids, s*(n_factors + 2) evaluation rows in total.
class SobolDesign {
 public:
  SobolDesign(int n_factors, int sample_size, std::uint64_t seed);

  int n_factors() const { return n_factors_; }
  int sample_size() const { return sample_size_; }
  std::uint64_t seed() const { return seed_; }
  long total_rows() const {
    return static_cast<long>(sample_size_) * (n_factors_ + 2);
  }

  std::span<const double> a_row(int i) const;
  std::span<const double> b_row(int i) const;
  // Row i of A with column j taken from B.
  void ab_row(int j, int i, std::span<double> out) const;
  std::vector<double> ab_matrix(int j) const;  // materialized, row-major

 private:
  int n_factors_;
  int sample_size_;
  std::uint64_t seed_;
  std::vector<double> a_;  // s x n, row-major
  std::vector<double> b_;
};

SobolDesign sobol_sample(int n_factors, int sample_size, std::uint64_t seed);

struct SobolRound {
  int sample_size = 0;
  std::vector<double> first_order;
  std::vector<double> total;
};

struct SobolIndices {
  std::vector<double> first_order;  // S_j
  std::vector<double> total;        // S_T_j
  double variance = 0.0;            // Var(y) over the pooled A and B evaluations
  int sample_size = 0;
  std::uint64_t seed = 0;
  bool converged = true;
  double tolerance = 0.0;           // convergence tolerance when iterated
  std::vector<SobolRound> history;
};

// Jansen estimators:
//   V_j   = Var(y) - (1/2s) * sum_i (yB_i - yAB_j_i)^2
//   S_j   = V_j / Var(y)
//   S_T_j = (1/2s) * sum_i (yA_i - yAB_j_i)^2 / Var(y)
// Rows are evaluated in the fixed order A, B, AB_1..AB_n; reductions are
// sequential in row order, so results do not depend on the worker count.
// Negative estimates from Monte Carlo noise are reported as-is.
SobolIndices sobol_jansen(const Evaluator& f, const SobolDesign& design,
                          int threads = 1);

struct SobolConvergeOptions {
  int initial_sample_size = 1000;
  double growth_factor = 2.0;
  double tolerance = 0.02;  // max |change| of any index between rounds
  int max_sample_size = 32000;
  std::uint64_t seed = 1;
  int threads = 1;
};

// Repeats sobol_jansen on fresh seeded designs with growing sample size until
// every index moves by at most `tolerance` between consecutive rounds.
// Non-convergence is reported via the flag, not an error.
SobolIndices sobol_converge(const Evaluator& f, int n_factors,
                            const SobolConvergeOptions& options);

// One-at-a-time screening plan on the p-level grid, step
// delta = p / (2(p-1)). Each trajectory visits n_factors+1 points, changing
// exactly one factor per move.
struct MorrisDesign {
  struct Trajectory {
    std::vector<double> points;     // (n+1) x n, row-major
    std::vector<int> factor_order;  // factor changed at each move
    std::vector<int> signs;         // +1 / -1 per move
  };

  int n_factors = 0;
  int levels = 0;
  double delta = 0.0;
  int trajectories = 0;
  std::uint64_t seed = 0;
  std::vector<Trajectory> paths;
};

MorrisDesign morris_trajectories(int n_factors, int levels, int trajectories,
                                 std::uint64_t seed);

struct MorrisIndices {
  std::vector<double> mean;      // mu_i, signed mean of elementary effects
  std::vector<double> mean_abs;  // mu*_i
  std::vector<double> stddev;    // sigma_i, sample standard deviation
  int trajectories = 0;
  std::uint64_t seed = 0;
};

// Elementary effect of a move: (f(after) - f(before)) / (sign * delta).
// Requires at least two trajectories unless allow_single_trajectory (sigma is
// undefined for r = 1).
MorrisIndices elementary_effects(const Evaluator& f, const MorrisDesign& design,
                                 int threads = 1,
                                 bool allow_single_trajectory = false);

enum class FactorClass {
  kLinearEffective,       // I: high mu*, low sigma
  kNonlinearInteracting,  // II: high mu*, high sigma
  kNegligible,            // III: low mu*
};

struct FactorClassification {
  std::vector<FactorClass> classes;
  double mu_star_threshold = 0.0;
  // Global sigma cut; NaN when the default per-factor rule sigma_j >= mu*_j/2
  // was used instead.
  double sigma_threshold = 0.0;
};

FactorClassification classify_factors(const MorrisIndices& morris,
                                      double mu_star_threshold,
                                      double sigma_threshold);
// Default policy: mu* threshold = 0.1 * max_j mu*_j, nonlinearity split at
// sigma_j >= mu*_j / 2.
FactorClassification classify_factors(const MorrisIndices& morris);

struct FactorRanking {
  std::vector<int> order;    // factor indices, S_T descending
  double kendall_tau = 0.0;  // agreement between S_T and mu* rankings
};

FactorRanking rank_factors(const SobolIndices& sobol, const MorrisIndices& morris);

// JSON exports: {method, seed, sample_size, factors: [...], history}.
std::string sobol_to_json(const SobolIndices& indices,
                          std::span<const std::string> factor_names);
std::string morris_to_json(const MorrisIndices& indices,
                           const FactorClassification& classification,
                           std::span<const std::string> factor_names);

}  // namespace lakeopt
