#include "lakeopt/sensitivity.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <json.hpp>

#include "lakeopt/errors.hpp"
#include "lakeopt/parallel.hpp"
#include "lakeopt/rng.hpp"

namespace lakeopt {

SobolDesign::SobolDesign(int n_factors, int sample_size, std::uint64_t seed)
    : n_factors_(n_factors), sample_size_(sample_size), seed_(seed) {
  if (n_factors < 1)
    throw_error(ErrorCode::kInvalidArgument, "n_factors must be at least 1");
  if (sample_size < 2)
    throw_error(ErrorCode::kInvalidArgument,
                "sample size must be at least 2, got " + std::to_string(sample_size));
  std::size_t cells = static_cast<std::size_t>(sample_size) *
                      static_cast<std::size_t>(n_factors);
  a_.resize(cells);
  b_.resize(cells);
  // Independent streams for the two base matrices.
  Rng rng_a(Rng::derive_seed(seed, 0x5341));
  Rng rng_b(Rng::derive_seed(seed, 0x5342));
  for (auto& v : a_) v = rng_a.uniform();
  for (auto& v : b_) v = rng_b.uniform();
}

std::span<const double> SobolDesign::a_row(int i) const {
  return {a_.data() + static_cast<std::size_t>(i) * n_factors_,
          static_cast<std::size_t>(n_factors_)};
}

std::span<const double> SobolDesign::b_row(int i) const {
  return {b_.data() + static_cast<std::size_t>(i) * n_factors_,
          static_cast<std::size_t>(n_factors_)};
}

void SobolDesign::ab_row(int j, int i, std::span<double> out) const {
  auto a = a_row(i);
  std::copy(a.begin(), a.end(), out.begin());
  out[static_cast<std::size_t>(j)] = b_row(i)[static_cast<std::size_t>(j)];
}

std::vector<double> SobolDesign::ab_matrix(int j) const {
  std::vector<double> m(static_cast<std::size_t>(sample_size_) *
                        static_cast<std::size_t>(n_factors_));
  for (int i = 0; i < sample_size_; ++i)
    ab_row(j, i, {m.data() + static_cast<std::size_t>(i) * n_factors_,
                  static_cast<std::size_t>(n_factors_)});
  return m;
}

SobolDesign sobol_sample(int n_factors, int sample_size, std::uint64_t seed) {
  return SobolDesign(n_factors, sample_size, seed);
}

SobolIndices sobol_jansen(const Evaluator& f, const SobolDesign& design, int threads) {
  const int s = design.sample_size();
  const int n = design.n_factors();

  // Fixed evaluation layout: A rows, B rows, then the AB blocks for
  // j = 0..n-1. Workers fill slots by index, reductions below run in slot
  // order, so the outcome is independent of the worker count.
  std::vector<double> ya(static_cast<std::size_t>(s));
  std::vector<double> yb(static_cast<std::size_t>(s));
  std::vector<double> yab(static_cast<std::size_t>(s) * static_cast<std::size_t>(n));

  parallel_for(s, threads, [&](int i) { ya[static_cast<std::size_t>(i)] = f(design.a_row(i)); });
  parallel_for(s, threads, [&](int i) { yb[static_cast<std::size_t>(i)] = f(design.b_row(i)); });
  parallel_for(s * n, threads, [&](int k) {
    int j = k / s;
    int i = k % s;
    std::vector<double> row(static_cast<std::size_t>(n));
    design.ab_row(j, i, row);
    yab[static_cast<std::size_t>(j) * s + i] = f(row);
  });

  // Pooled mean and sample variance over the A and B evaluations.
  double mean = 0.0;
  for (double v : ya) mean += v;
  for (double v : yb) mean += v;
  mean /= static_cast<double>(2 * s);
  double var = 0.0;
  for (double v : ya) var += (v - mean) * (v - mean);
  for (double v : yb) var += (v - mean) * (v - mean);
  var /= static_cast<double>(2 * s - 1);

  if (var < 1e-12)
    throw_error(ErrorCode::kNumeric,
                "evaluator output is constant; sensitivity indices are undefined");

  SobolIndices out;
  out.variance = var;
  out.sample_size = s;
  out.seed = design.seed();
  out.first_order.resize(static_cast<std::size_t>(n));
  out.total.resize(static_cast<std::size_t>(n));
  double half_inv_s = 1.0 / (2.0 * static_cast<double>(s));
  for (int j = 0; j < n; ++j) {
    double acc_first = 0.0;
    double acc_total = 0.0;
    const double* col = yab.data() + static_cast<std::size_t>(j) * s;
    for (int i = 0; i < s; ++i) {
      double db = yb[static_cast<std::size_t>(i)] - col[i];
      double da = ya[static_cast<std::size_t>(i)] - col[i];
      acc_first += db * db;
      acc_total += da * da;
    }
    out.first_order[static_cast<std::size_t>(j)] = (var - half_inv_s * acc_first) / var;
    out.total[static_cast<std::size_t>(j)] = half_inv_s * acc_total / var;
  }
  out.history.push_back({s, out.first_order, out.total});
  return out;
}

SobolIndices sobol_converge(const Evaluator& f, int n_factors,
                            const SobolConvergeOptions& options) {
  if (options.initial_sample_size < 2)
    throw_error(ErrorCode::kInvalidArgument, "initial sample size must be at least 2");
  if (!(options.growth_factor > 1.0))
    throw_error(ErrorCode::kInvalidArgument, "growth factor must exceed 1");
  if (!(options.tolerance > 0.0))
    throw_error(ErrorCode::kInvalidArgument, "tolerance must be positive");

  std::vector<SobolRound> history;
  SobolIndices result;
  int s = options.initial_sample_size;
  int round = 0;
  bool converged = false;
  while (true) {
    SobolDesign design(n_factors, s, Rng::derive_seed(options.seed, static_cast<std::uint64_t>(round)));
    result = sobol_jansen(f, design, options.threads);
    history.push_back({s, result.first_order, result.total});
    if (history.size() >= 2) {
      const auto& prev = history[history.size() - 2];
      double drift = 0.0;
      for (int j = 0; j < n_factors; ++j) {
        drift = std::max(drift, std::fabs(result.first_order[static_cast<std::size_t>(j)] -
                                          prev.first_order[static_cast<std::size_t>(j)]));
        drift = std::max(drift, std::fabs(result.total[static_cast<std::size_t>(j)] -
                                          prev.total[static_cast<std::size_t>(j)]));
      }
      if (drift <= options.tolerance) {
        converged = true;
        break;
      }
    }
    int next = static_cast<int>(std::lround(static_cast<double>(s) * options.growth_factor));
    if (next <= s) next = s + 1;
    if (next > options.max_sample_size) break;
    s = next;
    ++round;
  }
  result.converged = converged;
  result.tolerance = options.tolerance;
  result.seed = options.seed;
  result.history = std::move(history);
  return result;
}

MorrisDesign morris_trajectories(int n_factors, int levels, int trajectories,
                                 std::uint64_t seed) {
  if (n_factors < 1)
    throw_error(ErrorCode::kInvalidArgument, "n_factors must be at least 1");
  if (levels < 2 || levels % 2 != 0)
    throw_error(ErrorCode::kInvalidArgument,
                "levels must be even and at least 2, got " + std::to_string(levels));
  if (trajectories < 1)
    throw_error(ErrorCode::kInvalidArgument, "trajectories must be at least 1");

  MorrisDesign design;
  design.n_factors = n_factors;
  design.levels = levels;
  design.delta = static_cast<double>(levels) / (2.0 * (levels - 1));
  design.trajectories = trajectories;
  design.seed = seed;

  // delta spans levels/2 grid cells; since delta > 1/2 the step direction is
  // forced by the start level.
  const int level_step = levels / 2;
  Rng rng(seed);
  for (int t = 0; t < trajectories; ++t) {
    MorrisDesign::Trajectory traj;
    std::vector<int> level(static_cast<std::size_t>(n_factors));
    std::vector<int> dir(static_cast<std::size_t>(n_factors));
    for (int i = 0; i < n_factors; ++i) {
      int l = rng.uniform_int(levels);
      level[static_cast<std::size_t>(i)] = l;
      dir[static_cast<std::size_t>(i)] = (l + level_step <= levels - 1) ? 1 : -1;
    }
    std::vector<int> order(static_cast<std::size_t>(n_factors));
    std::iota(order.begin(), order.end(), 0);
    for (int i = n_factors; i > 1; --i) {
      int j = rng.uniform_int(i);
      std::swap(order[static_cast<std::size_t>(i - 1)], order[static_cast<std::size_t>(j)]);
    }
    auto push_point = [&]() {
      for (int i = 0; i < n_factors; ++i)
        traj.points.push_back(static_cast<double>(level[static_cast<std::size_t>(i)]) /
                              static_cast<double>(levels - 1));
    };
    push_point();
    for (int k = 0; k < n_factors; ++k) {
      int factor = order[static_cast<std::size_t>(k)];
      level[static_cast<std::size_t>(factor)] +=
          dir[static_cast<std::size_t>(factor)] * level_step;
      traj.factor_order.push_back(factor);
      traj.signs.push_back(dir[static_cast<std::size_t>(factor)]);
      push_point();
    }
    design.paths.push_back(std::move(traj));
  }
  return design;
}

MorrisIndices elementary_effects(const Evaluator& f, const MorrisDesign& design,
                                 int threads, bool allow_single_trajectory) {
  const int n = design.n_factors;
  const int r = design.trajectories;
  if (r < 2 && !allow_single_trajectory)
    throw_error(ErrorCode::kNumeric,
                "sigma is undefined for a single trajectory; need r >= 2");

  // All r*(n+1) points evaluated into index-addressed slots.
  const int points_per_traj = n + 1;
  std::vector<double> y(static_cast<std::size_t>(r) * points_per_traj);
  parallel_for(r * points_per_traj, threads, [&](int k) {
    int t = k / points_per_traj;
    int p = k % points_per_traj;
    const auto& traj = design.paths[static_cast<std::size_t>(t)];
    std::span<const double> point{
        traj.points.data() + static_cast<std::size_t>(p) * n,
        static_cast<std::size_t>(n)};
    y[static_cast<std::size_t>(k)] = f(point);
  });

  // effects[i][t] in trajectory order; reductions below are sequential.
  std::vector<std::vector<double>> effects(
      static_cast<std::size_t>(n), std::vector<double>(static_cast<std::size_t>(r)));
  for (int t = 0; t < r; ++t) {
    const auto& traj = design.paths[static_cast<std::size_t>(t)];
    for (int k = 0; k < n; ++k) {
      int factor = traj.factor_order[static_cast<std::size_t>(k)];
      double before = y[static_cast<std::size_t>(t) * points_per_traj + k];
      double after = y[static_cast<std::size_t>(t) * points_per_traj + k + 1];
      double signed_delta = traj.signs[static_cast<std::size_t>(k)] > 0
                                ? design.delta
                                : -design.delta;
      effects[static_cast<std::size_t>(factor)][static_cast<std::size_t>(t)] =
          (after - before) / signed_delta;
    }
  }

  MorrisIndices out;
  out.trajectories = r;
  out.seed = design.seed;
  out.mean.resize(static_cast<std::size_t>(n));
  out.mean_abs.resize(static_cast<std::size_t>(n));
  out.stddev.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const auto& e = effects[static_cast<std::size_t>(i)];
    double mean = 0.0, mean_abs = 0.0;
    for (double v : e) {
      mean += v;
      mean_abs += std::fabs(v);
    }
    mean /= static_cast<double>(r);
    mean_abs /= static_cast<double>(r);
    double ss = 0.0;
    for (double v : e) ss += (v - mean) * (v - mean);
    out.mean[static_cast<std::size_t>(i)] = mean;
    out.mean_abs[static_cast<std::size_t>(i)] = mean_abs;
    out.stddev[static_cast<std::size_t>(i)] =
        r > 1 ? std::sqrt(ss / static_cast<double>(r - 1)) : 0.0;
  }
  return out;
}

FactorClassification classify_factors(const MorrisIndices& morris,
                                      double mu_star_threshold,
                                      double sigma_threshold) {
  if (!(mu_star_threshold > 0.0) || !(sigma_threshold > 0.0))
    throw_error(ErrorCode::kInvalidArgument, "classification thresholds must be positive");
  FactorClassification out;
  out.mu_star_threshold = mu_star_threshold;
  out.sigma_threshold = sigma_threshold;
  for (std::size_t i = 0; i < morris.mean_abs.size(); ++i) {
    double mu_star = morris.mean_abs[i];
    double sigma = morris.stddev[i];
    if (mu_star < mu_star_threshold)
      out.classes.push_back(FactorClass::kNegligible);
    else if (sigma < sigma_threshold)
      out.classes.push_back(FactorClass::kLinearEffective);
    else
      out.classes.push_back(FactorClass::kNonlinearInteracting);
  }
  return out;
}

FactorClassification classify_factors(const MorrisIndices& morris) {
  double max_mu_star = 0.0;
  for (double v : morris.mean_abs) max_mu_star = std::max(max_mu_star, v);
  FactorClassification out;
  out.mu_star_threshold = 0.1 * max_mu_star;
  out.sigma_threshold = std::numeric_limits<double>::quiet_NaN();  // per-factor rule
  for (std::size_t i = 0; i < morris.mean_abs.size(); ++i) {
    double mu_star = morris.mean_abs[i];
    double sigma = morris.stddev[i];
    if (mu_star < out.mu_star_threshold || max_mu_star == 0.0)
      out.classes.push_back(FactorClass::kNegligible);
    else if (sigma >= mu_star / 2.0)
      out.classes.push_back(FactorClass::kNonlinearInteracting);
    else
      out.classes.push_back(FactorClass::kLinearEffective);
  }
  return out;
}

namespace {

// Ranking of factor indices by descending key; ties keep index order.
std::vector<int> descending_order(const std::vector<double>& key) {
  std::vector<int> order(key.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&key](int a, int b) {
    return key[static_cast<std::size_t>(a)] > key[static_cast<std::size_t>(b)];
  });
  return order;
}

}  // namespace

FactorRanking rank_factors(const SobolIndices& sobol, const MorrisIndices& morris) {
  std::size_t n = sobol.total.size();
  if (n != morris.mean_abs.size())
    throw_error(ErrorCode::kIntegrity,
                "factor sets differ: " + std::to_string(n) + " vs " +
                    std::to_string(morris.mean_abs.size()));
  FactorRanking out;
  out.order = descending_order(sobol.total);

  // Kendall tau between the two orderings over factor pairs.
  long concordant = 0, discordant = 0;
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = a + 1; b < n; ++b) {
      double ds = sobol.total[a] - sobol.total[b];
      double dm = morris.mean_abs[a] - morris.mean_abs[b];
      double prod = ds * dm;
      if (prod > 0)
        ++concordant;
      else if (prod < 0)
        ++discordant;
    }
  }
  long pairs = static_cast<long>(n * (n - 1) / 2);
  out.kendall_tau =
      pairs == 0 ? 1.0
                 : static_cast<double>(concordant - discordant) / static_cast<double>(pairs);
  return out;
}

namespace {

const char* class_label(FactorClass c) {
  switch (c) {
    case FactorClass::kLinearEffective: return "I";
    case FactorClass::kNonlinearInteracting: return "II";
    case FactorClass::kNegligible: return "III";
  }
  return "?";
}

}  // namespace

std::string sobol_to_json(const SobolIndices& indices,
                          std::span<const std::string> factor_names) {
  nlohmann::json j;
  j["method"] = "sobol_jansen";
  j["seed"] = indices.seed;
  j["sample_size"] = indices.sample_size;
  j["variance"] = indices.variance;
  j["converged"] = indices.converged;
  if (indices.tolerance > 0.0) j["tolerance"] = indices.tolerance;
  j["factors"] = nlohmann::json::array();
  for (std::size_t i = 0; i < indices.first_order.size(); ++i) {
    j["factors"].push_back({{"name", std::string(factor_names[i])},
                            {"S", indices.first_order[i]},
                            {"S_T", indices.total[i]}});
  }
  j["history"] = nlohmann::json::array();
  for (const auto& round : indices.history) {
    j["history"].push_back({{"sample_size", round.sample_size},
                            {"S", round.first_order},
                            {"S_T", round.total}});
  }
  return j.dump(2);
}

std::string morris_to_json(const MorrisIndices& indices,
                           const FactorClassification& classification,
                           std::span<const std::string> factor_names) {
  nlohmann::json j;
  j["method"] = "morris";
  j["seed"] = indices.seed;
  j["trajectories"] = indices.trajectories;
  j["factors"] = nlohmann::json::array();
  for (std::size_t i = 0; i < indices.mean.size(); ++i) {
    j["factors"].push_back({{"name", std::string(factor_names[i])},
                            {"mu", indices.mean[i]},
                            {"mu_star", indices.mean_abs[i]},
                            {"sigma", indices.stddev[i]},
                            {"class", class_label(classification.classes[i])}});
  }
  return j.dump(2);
}

}  // namespace lakeopt
