#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "forestgd/errors.hpp"
#include "forestgd/estimators.hpp"
#include "forestgd/linalg.hpp"
#include "forestgd/monte_carlo.hpp"
#include "forestgd/random.hpp"

namespace forestgd {

/// i.i.d. N(0, 1) node signal.
inline Vector standard_normal_signal(std::size_t n, std::uint64_t seed) {
  auto rng = substream(derive_seed(seed, 0x6e6f726d), 0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Vector y(n);
  for (double& v : y) v = gauss(rng);
  return y;
}

/// Smooth signal: the sum of the three lowest non-constant Laplacian
/// eigenvectors, rescaled to peak magnitude `peak`.
inline Vector smooth_signal(const Graph& g, double peak = 10.0) {
  if (g.num_vertices() > kDenseOracleLimit) throw SizeLimitError("smooth_signal needs n <= 2000");
  const auto n = static_cast<Eigen::Index>(g.num_vertices());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(dense_laplacian(g));
  Eigen::VectorXd s = Eigen::VectorXd::Zero(n);
  for (Eigen::Index k = 1; k < std::min<Eigen::Index>(4, n); ++k) {
    Eigen::VectorXd v = eig.eigenvectors().col(k);
    // Fix the sign so the result does not depend on the eigensolver's choice.
    Eigen::Index arg = 0;
    v.cwiseAbs().maxCoeff(&arg);
    if (v(arg) < 0) v = -v;
    s += v;
  }
  const double m = s.cwiseAbs().maxCoeff();
  if (m > 0) s *= peak / m;
  return Vector(s.data(), s.data() + n);
}

inline Vector add_gaussian_noise(std::span<const double> clean, double stddev, std::uint64_t seed) {
  auto rng = substream(derive_seed(seed, 0x6e6f6973), 0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Vector y(clean.begin(), clean.end());
  for (double& v : y) v += stddev * gauss(rng);
  return y;
}

inline constexpr double kPsnrFloor = 1e-15;

/// 10 log10(peak^2 / mse) with peak = max |clean|; mse is floored at 1e-15.
inline double psnr_from_mse(double mse, double peak) {
  return 10.0 * std::log10(peak * peak / std::max(mse, kPsnrFloor));
}

inline double peak_of(std::span<const double> clean) {
  double p = 0.0;
  for (double v : clean) p = std::max(p, std::abs(v));
  return p;
}

inline double mean_squared_error(std::span<const double> a, std::span<const double> b) {
  return squared_distance(a, b) / static_cast<double>(a.size());
}

struct QuadraticFit {
  double a = 0.0;  ///< leading coefficient
  double b = 0.0;
  double c = 0.0;
  double r_squared = 0.0;
};

/// Least-squares fit y ~ a x^2 + b x + c.
inline QuadraticFit fit_quadratic(std::span<const double> x, std::span<const double> y) {
  const auto n = static_cast<Eigen::Index>(x.size());
  Eigen::MatrixXd design(n, 3);
  Eigen::VectorXd rhs(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double xi = x[static_cast<std::size_t>(i)];
    design(i, 0) = xi * xi;
    design(i, 1) = xi;
    design(i, 2) = 1.0;
    rhs(i) = y[static_cast<std::size_t>(i)];
  }
  Eigen::Vector3d coef = design.colPivHouseholderQr().solve(rhs);
  const double mean = rhs.mean();
  const double ss_tot = (rhs.array() - mean).square().sum();
  const double ss_res = (design * coef - rhs).squaredNorm();
  return {coef(0), coef(1), coef(2), ss_tot > 0 ? 1.0 - ss_res / ss_tot : 1.0};
}

struct SweepConfig {
  double q = 1.0;
  std::size_t samples = 10;
  std::size_t realizations = 200;
  std::vector<double> alpha_grid;
  std::uint64_t seed = 0;
  std::size_t threads = 0;
};

struct SweepRow {
  double alpha = 0.0;
  double mse_zbar = 0.0;
};

struct SweepResult {
  std::vector<SweepRow> rows;
  double mse_xbar = 0.0;
  double alpha_safe = 0.0;
  double mse_safe = 0.0;
  double mean_alpha_hat = 0.0;
  double mse_alpha_hat = 0.0;
  std::size_t alpha_hat_fallbacks = 0;
  std::optional<double> alpha_star;  ///< exact, on enumeration-scale graphs
  QuadraticFit fit;                  ///< of mse_zbar over the grid
};

/// Squared error ||estimate - K y||^2 of xbar and zbar(alpha), averaged over
/// independent realizations of N-sample estimates. Each realization draws
/// its own forests; every step size is evaluated on the same draws.
inline SweepResult sweep_alpha(const Graph& g, std::span<const double> y, const SweepConfig& cfg) {
  if (cfg.alpha_grid.empty()) throw DataError("alpha grid is empty");
  if (cfg.realizations == 0 || cfg.samples < 2) throw DataError("sweep needs R >= 1 and N >= 2");
  const auto problem = SmoothingProblem::uniform(g, Vector(y.begin(), y.end()), cfg.q);
  const Vector exact = solve_exact_cg(problem).x;
  const Vector signal(y.begin(), y.end());
  const std::size_t grid = cfg.alpha_grid.size();

  struct PerRealization {
    Vector err_grid;
    double err_xbar = 0.0;
    double err_safe = 0.0;
    double err_hat = 0.0;
    double alpha_hat = 0.0;
    bool fallback = false;
  };
  std::vector<PerRealization> per(cfg.realizations);
  const double alpha_safe = safe_step_size(problem);
  MonteCarloOptions inner;
  inner.threads = 1;

  detail::parallel_chunks(cfg.realizations, cfg.threads, [&](std::size_t r) {
    auto accs = accumulate_forest_samples(g, problem.absorption(), std::span<const Vector>(&signal, 1), cfg.samples,
                                          derive_seed(cfg.seed, 0x7265616c, r), inner);
    const auto& acc = accs.front();
    const Vector mean = acc.mean_x();
    const Vector kinv = apply_K_inverse(problem, mean);
    auto err_at = [&](double alpha) {
      double s = 0.0;
      for (std::size_t i = 0; i < mean.size(); ++i) {
        const double z = mean[i] - alpha * (kinv[i] - signal[i]);
        s += (z - exact[i]) * (z - exact[i]);
      }
      return s;
    };
    auto& out = per[r];
    out.err_grid.resize(grid);
    for (std::size_t k = 0; k < grid; ++k) out.err_grid[k] = err_at(cfg.alpha_grid[k]);
    out.err_xbar = squared_distance(mean, exact);
    out.err_safe = err_at(alpha_safe);
    auto hat = resolve_alpha(AlphaStrategy::empirical(), problem, &acc);
    out.alpha_hat = hat.alpha;
    out.fallback = hat.zero_variance_fallback;
    out.err_hat = err_at(hat.alpha);
  });

  SweepResult res;
  res.alpha_safe = alpha_safe;
  res.rows.resize(grid);
  for (std::size_t k = 0; k < grid; ++k) res.rows[k].alpha = cfg.alpha_grid[k];
  const double inv_r = 1.0 / static_cast<double>(cfg.realizations);
  for (const auto& p : per) {
    for (std::size_t k = 0; k < grid; ++k) res.rows[k].mse_zbar += p.err_grid[k] * inv_r;
    res.mse_xbar += p.err_xbar * inv_r;
    res.mse_safe += p.err_safe * inv_r;
    res.mse_alpha_hat += p.err_hat * inv_r;
    res.mean_alpha_hat += p.alpha_hat * inv_r;
    res.alpha_hat_fallbacks += p.fallback ? 1 : 0;
  }
  if (g.num_vertices() <= kEnumerationMaxVertices && g.num_edges() <= kEnumerationMaxEdges) {
    res.alpha_star = exact_estimator_moments(problem).alpha_star;
  }
  Vector mse(grid);
  for (std::size_t k = 0; k < grid; ++k) mse[k] = res.rows[k].mse_zbar;
  res.fit = fit_quadratic(cfg.alpha_grid, mse);
  return res;
}

struct DenoiseConfig {
  std::vector<double> q_grid;
  double noise_std = 5.0;
  std::size_t samples = 2;
  std::size_t realizations = 20;
  std::uint64_t seed = 0;
  std::size_t threads = 0;
};

struct DenoiseRow {
  double q = 0.0;
  double psnr_y = 0.0;
  double psnr_exact = 0.0;
  double psnr_xbar = 0.0;
  double psnr_zbar_safe = 0.0;
  double psnr_zbar_hat = 0.0;
};

/// PSNR of the noisy signal, the exact smoother and the forest estimators
/// across q. MSEs are averaged over realizations (noise and forests) before
/// conversion to dB; realization r uses the same noise for every q.
inline std::vector<DenoiseRow> denoise(const Graph& g, std::span<const double> clean, const DenoiseConfig& cfg) {
  if (cfg.q_grid.empty()) throw DataError("q grid is empty");
  if (cfg.realizations == 0) throw DataError("denoise needs at least one realization");
  if (cfg.samples < 2) throw DataError("denoise needs N >= 2 for the empirical step size");
  const std::size_t n = g.num_vertices();
  if (clean.size() != n) throw DataError("clean signal length does not match n");
  const double peak = peak_of(clean);
  const std::size_t nq = cfg.q_grid.size();

  struct Errors {
    double y = 0, exact = 0, xbar = 0, safe = 0, hat = 0;
  };
  std::vector<std::vector<Errors>> per(cfg.realizations, std::vector<Errors>(nq));
  MonteCarloOptions inner;
  inner.threads = 1;

  detail::parallel_chunks(cfg.realizations, cfg.threads, [&](std::size_t r) {
    Vector noisy = add_gaussian_noise(clean, cfg.noise_std, derive_seed(cfg.seed, 0x6e6f6973, r));
    for (std::size_t k = 0; k < nq; ++k) {
      auto problem = SmoothingProblem::uniform(g, noisy, cfg.q_grid[k]);
      auto accs = accumulate_forest_samples(g, problem.absorption(), std::span<const Vector>(&noisy, 1), cfg.samples,
                                            derive_seed(cfg.seed, 0x666f72, r * nq + k), inner);
      auto& e = per[r][k];
      e.y = mean_squared_error(noisy, clean);
      e.exact = mean_squared_error(solve_exact_cg(problem).x, clean);
      e.xbar = mean_squared_error(finish_estimate(problem, accs.front(), AlphaStrategy::fixed(0.0)).estimate, clean);
      e.safe = mean_squared_error(finish_estimate(problem, accs.front(), AlphaStrategy::safe()).estimate, clean);
      e.hat = mean_squared_error(finish_estimate(problem, accs.front(), AlphaStrategy::empirical()).estimate, clean);
    }
  });

  std::vector<DenoiseRow> rows(nq);
  for (std::size_t k = 0; k < nq; ++k) {
    Errors sum;
    for (std::size_t r = 0; r < cfg.realizations; ++r) {
      sum.y += per[r][k].y;
      sum.exact += per[r][k].exact;
      sum.xbar += per[r][k].xbar;
      sum.safe += per[r][k].safe;
      sum.hat += per[r][k].hat;
    }
    const double inv = 1.0 / static_cast<double>(cfg.realizations);
    rows[k] = {cfg.q_grid[k],
               psnr_from_mse(sum.y * inv, peak),
               psnr_from_mse(sum.exact * inv, peak),
               psnr_from_mse(sum.xbar * inv, peak),
               psnr_from_mse(sum.safe * inv, peak),
               psnr_from_mse(sum.hat * inv, peak)};
  }
  return rows;
}

/// n points log-spaced over [lo, hi].
inline std::vector<double> log_grid(double lo, double hi, std::size_t n) {
  std::vector<double> g(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = n == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(n - 1);
    g[i] = lo * std::pow(hi / lo, t);
  }
  return g;
}

inline std::vector<double> linear_grid(double lo, double hi, std::size_t n) {
  std::vector<double> g(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = n == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(n - 1);
    g[i] = lo + (hi - lo) * t;
  }
  return g;
}

}  // namespace forestgd
