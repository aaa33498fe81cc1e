#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lakeopt/sensitivity.hpp"  // Evaluator

namespace lakeopt {

using GradientFn = std::function<std::vector<double>(std::span<const double>)>;

// Bounded maximization over a box. Fixed coordinates are excluded from the
// search space and reinstated bit-exactly in every candidate and result.
struct BoxedProblem {
  Evaluator objective;   // full input vector -> scalar
  GradientFn gradient;   // optional; empty when unavailable
  int dimension = 0;
  std::vector<double> lower;
  std::vector<double> upper;
  std::map<int, double> fixed;  // index -> pinned value

  std::vector<int> free_indices() const;
  void validate() const;
};

struct OptResult {
  std::vector<double> x;      // full vector, fixed coordinates reinstated
  double value = 0.0;         // objective re-evaluated at x
  long evaluations = 0;
  int iterations = 0;
  bool converged = false;
  std::vector<double> trace;  // best-so-far per iteration
  std::string method;
  std::uint64_t seed = 0;
};

struct GaConfig {
  int population_size = 60;
  int generations = 120;
  int bits_per_variable = 16;
  double crossover_rate = 0.9;
  double mutation_rate = 0.01;        // per-bit flip probability
  double elite_fraction = 0.05;       // individuals exempt from replacement/mutation
  double replacement_fraction = 0.8;  // share of the population replaced per generation
  std::uint64_t seed = 1;
};

struct PsConfig {
  double initial_mesh = 0.25;
  double expansion = 2.0;
  double contraction = 0.5;
  double min_mesh = 1e-6;
  int max_iterations = 400;
};

struct NlpConfig {
  int max_iterations = 500;
  double initial_step = 1.0;
  double backtracking = 0.5;
  double gradient_tolerance = 1e-6;
  int restarts = 4;  // start points: box center + seeded interior points
  std::uint64_t seed = 1;
};

// Binary-coded GA: bits_per_variable genes per free coordinate decoded
// linearly onto [lo, hi]; tournament selection (size 2), single-point
// crossover, bit-flip mutation outside the elite block. Deterministic per
// seed.
OptResult genetic_algorithm(const BoxedProblem& problem, const GaConfig& config);

// Coordinate poll set (+-mesh * e_i, projected to bounds) from the box
// center; accepted improvements expand the mesh, failures contract it.
// Derivative-free and fully deterministic.
OptResult pattern_search(const BoxedProblem& problem, const PsConfig& config);

// Projected gradient ascent with backtracking line search and multi-start.
// Requires problem.gradient.
OptResult nlp_solve(const BoxedProblem& problem, const NlpConfig& config);

struct SolverConfig {
  GaConfig ga;
  PsConfig ps;
  NlpConfig nlp;
};

// Dispatch by method tag: "ga", "pattern_search", "nlp".
OptResult solve(std::string_view method, const BoxedProblem& problem,
                const SolverConfig& config);

bool is_known_method(std::string_view method);

// JSON export: {method, seed, x_star, f_star, evaluations, iterations,
// converged, trace}.
std::string result_to_json(const OptResult& result,
                           std::span<const std::string> variable_names);

}  // namespace lakeopt
