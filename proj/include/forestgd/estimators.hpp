#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "forestgd/errors.hpp"
#include "forestgd/forest.hpp"
#include "forestgd/forest_enumeration.hpp"
#include "forestgd/linalg.hpp"

namespace forestgd {

/// Partition average of y over the trees of a forest, weighted by q:
/// xbar_i = sum_{j in T(i)} q_j y_j / sum_{j in T(i)} q_j.
inline Vector partition_average(const RootedForest& f, std::span<const double> q, std::span<const double> y) {
  Vector out(y.size());
  for (const auto& tree : f.trees) {
    double num = 0.0;
    double den = 0.0;
    for (Vertex v : tree.vertices) {
      num += q[v] * y[v];
      den += q[v];
    }
    const double avg = num / den;
    for (Vertex v : tree.vertices) out[v] = avg;
  }
  return out;
}

/// xbar together with its control variate ybar = K^{-1} xbar.
struct EstimateSample {
  Vector xbar;
  Vector ybar;
};

inline EstimateSample xbar_from_forest(const RootedForest& f, const SmoothingProblem& p,
                                       bool with_control_variate = true) {
  EstimateSample s;
  s.xbar = partition_average(f, p.absorption(), p.signal());
  if (with_control_variate) s.ybar = apply_K_inverse(p, s.xbar);
  return s;
}

/// One gradient step on F(z) = z'K^{-1}z/2 - z'y: x - alpha (K^{-1} x - y).
inline Vector gradient_step(std::span<const double> x, const SmoothingProblem& p, double alpha) {
  Vector kinv = apply_K_inverse(p, x);
  auto y = p.signal();
  Vector z(x.begin(), x.end());
  for (std::size_t i = 0; i < z.size(); ++i) z[i] -= alpha * (kinv[i] - y[i]);
  return z;
}

/// Streaming sums over Monte Carlo samples of (xbar, ybar). Holds O(n)
/// state whatever the sample count; two accumulators merge by addition.
class MonteCarloAccumulator {
 public:
  MonteCarloAccumulator() = default;
  explicit MonteCarloAccumulator(std::size_t n, bool track_control_variate = true)
      : sum_x_(n, 0.0), sum_y_(track_control_variate ? n : 0, 0.0), tracks_cv_(track_control_variate) {}

  void add(std::span<const double> xbar, std::span<const double> ybar = {}) {
    ++count_;
    for (std::size_t i = 0; i < xbar.size(); ++i) sum_x_[i] += xbar[i];
    sum_xx_ += dot(xbar, xbar);
    if (tracks_cv_) {
      for (std::size_t i = 0; i < ybar.size(); ++i) sum_y_[i] += ybar[i];
      sum_yy_ += dot(ybar, ybar);
      sum_xy_ += dot(xbar, ybar);
    }
  }

  void add(const EstimateSample& s) { add(s.xbar, s.ybar); }

  void add_walk_steps(std::uint64_t steps) { walk_steps_ += steps; }

  MonteCarloAccumulator& merge(const MonteCarloAccumulator& other) {
    if (other.sum_x_.size() != sum_x_.size() || other.tracks_cv_ != tracks_cv_) {
      throw DataError("cannot merge accumulators of different shapes");
    }
    count_ += other.count_;
    for (std::size_t i = 0; i < sum_x_.size(); ++i) sum_x_[i] += other.sum_x_[i];
    for (std::size_t i = 0; i < sum_y_.size(); ++i) sum_y_[i] += other.sum_y_[i];
    sum_xx_ += other.sum_xx_;
    sum_yy_ += other.sum_yy_;
    sum_xy_ += other.sum_xy_;
    walk_steps_ += other.walk_steps_;
    return *this;
  }

  std::size_t count() const { return count_; }
  std::size_t dimension() const { return sum_x_.size(); }
  bool tracks_control_variate() const { return tracks_cv_; }
  std::span<const double> sum_x() const { return sum_x_; }
  std::span<const double> sum_y() const { return sum_y_; }
  double sum_xx() const { return sum_xx_; }
  double sum_yy() const { return sum_yy_; }
  double sum_xy() const { return sum_xy_; }
  std::uint64_t walk_steps() const { return walk_steps_; }

  Vector mean_x() const { return scaled(sum_x_, 1.0 / static_cast<double>(count_)); }
  Vector mean_y() const { return scaled(sum_y_, 1.0 / static_cast<double>(count_)); }

  // Centered cross-product sums: sum_i <a_i - mean_a, b_i - mean_b>.
  double centered_xx() const { return sum_xx_ - dot(sum_x_, sum_x_) / static_cast<double>(count_); }
  double centered_yy() const { return sum_yy_ - dot(sum_y_, sum_y_) / static_cast<double>(count_); }
  double centered_xy() const { return sum_xy_ - dot(sum_x_, sum_y_) / static_cast<double>(count_); }

  /// Unbiased (N-1) sample traces; require N >= 2.
  double trace_var_x() const { return centered_xx() / static_cast<double>(count_ - 1); }
  double trace_var_y() const { return centered_yy() / static_cast<double>(count_ - 1); }
  double trace_cov_xy() const { return centered_xy() / static_cast<double>(count_ - 1); }

  /// Whether tr Var(ybar) is numerically zero relative to the scale of ybar.
  bool control_variate_degenerate() const {
    const double n = static_cast<double>(dimension());
    const double scale = std::max(1.0, dot(sum_y_, sum_y_) / (static_cast<double>(count_) * count_ * n));
    return trace_var_y() <= 1e-14 * n * scale;
  }

 private:
  static Vector scaled(const Vector& v, double s) {
    Vector out(v);
    for (double& x : out) x *= s;
    return out;
  }

  std::size_t count_ = 0;
  Vector sum_x_;
  Vector sum_y_;
  double sum_xx_ = 0.0;
  double sum_yy_ = 0.0;
  double sum_xy_ = 0.0;
  std::uint64_t walk_steps_ = 0;
  bool tracks_cv_ = true;
};

struct AlphaStrategy {
  enum class Kind { safe_constant, empirical, fixed, oracle_optimal };
  Kind kind = Kind::safe_constant;
  double value = 0.0;  ///< used by Kind::fixed

  static AlphaStrategy safe() { return {Kind::safe_constant, 0.0}; }
  static AlphaStrategy empirical() { return {Kind::empirical, 0.0}; }
  static AlphaStrategy fixed(double alpha) { return {Kind::fixed, alpha}; }
  static AlphaStrategy oracle_optimal() { return {Kind::oracle_optimal, 0.0}; }
};

inline std::string to_string(AlphaStrategy::Kind k) {
  switch (k) {
    case AlphaStrategy::Kind::safe_constant: return "safe";
    case AlphaStrategy::Kind::empirical: return "empirical";
    case AlphaStrategy::Kind::fixed: return "fixed";
    case AlphaStrategy::Kind::oracle_optimal: return "oracle";
  }
  return "unknown";
}

/// Largest step with guaranteed contraction of I - alpha K^{-1}.
/// Gershgorin on Q^{-1} L bounds the spectrum of K^{-1} by 1 + 2 max_i d_i/q_i,
/// giving 2q/(q + 2 d_max) for uniform q and 2mu/(mu + 4) for q_i = mu d_i / 2.
inline double safe_step_size(const Graph& g, std::span<const double> q) {
  double worst = 0.0;
  for (Vertex i = 0; i < g.num_vertices(); ++i) worst = std::max(worst, g.degree(i) / q[i]);
  return 2.0 / (1.0 + 2.0 * worst);
}

inline double safe_step_size(const SmoothingProblem& p) { return safe_step_size(p.graph(), p.absorption()); }

/// Exact moments of xbar and its control variate over the forest law.
struct ExactMoments {
  Vector expected_xbar;
  Vector expected_ybar;
  double trace_var_xbar = 0.0;
  double trace_var_ybar = 0.0;
  double trace_cov_xy = 0.0;
  double alpha_star = 0.0;

  /// tr Var(zbar) as a function of the step: the exact MSE parabola.
  double mse_curve(double alpha) const {
    return trace_var_xbar + alpha * alpha * trace_var_ybar - 2.0 * alpha * trace_cov_xy;
  }
};

inline ExactMoments exact_estimator_moments(const SmoothingProblem& p) {
  const auto dist = enumerate_forests(p.graph(), p.absorption());
  const std::size_t n = p.size();
  auto q = p.absorption();
  auto y = p.signal();

  std::vector<Vector> xs;
  std::vector<Vector> ys;
  xs.reserve(dist.families.size());
  for (const auto& fam : dist.families) {
    Vector num(fam.trees, 0.0);
    Vector den(fam.trees, 0.0);
    for (std::size_t v = 0; v < n; ++v) {
      num[fam.component[v]] += q[v] * y[v];
      den[fam.component[v]] += q[v];
    }
    Vector x(n);
    for (std::size_t v = 0; v < n; ++v) x[v] = num[fam.component[v]] / den[fam.component[v]];
    ys.push_back(apply_K_inverse(p, x));
    xs.push_back(std::move(x));
  }

  ExactMoments m;
  m.expected_xbar.assign(n, 0.0);
  m.expected_ybar.assign(n, 0.0);
  for (std::size_t f = 0; f < xs.size(); ++f) {
    const double pr = dist.families[f].probability;
    for (std::size_t v = 0; v < n; ++v) {
      m.expected_xbar[v] += pr * xs[f][v];
      m.expected_ybar[v] += pr * ys[f][v];
    }
  }
  for (std::size_t f = 0; f < xs.size(); ++f) {
    const double pr = dist.families[f].probability;
    double vx = 0.0, vy = 0.0, cxy = 0.0;
    for (std::size_t v = 0; v < n; ++v) {
      const double dx = xs[f][v] - m.expected_xbar[v];
      const double dy = ys[f][v] - m.expected_ybar[v];
      vx += dx * dx;
      vy += dy * dy;
      cxy += dx * dy;
    }
    m.trace_var_xbar += pr * vx;
    m.trace_var_ybar += pr * vy;
    m.trace_cov_xy += pr * cxy;
  }
  m.alpha_star = m.trace_var_ybar > 1e-14 * static_cast<double>(n) ? m.trace_cov_xy / m.trace_var_ybar : 0.0;
  return m;
}

struct AlphaResolution {
  double alpha = 0.0;
  bool zero_variance_fallback = false;
  std::string diagnostic;
};

/// Resolves a step-size strategy. `acc` is required for Kind::empirical.
inline AlphaResolution resolve_alpha(const AlphaStrategy& s, const SmoothingProblem& p,
                                     const MonteCarloAccumulator* acc = nullptr) {
  AlphaResolution r;
  switch (s.kind) {
    case AlphaStrategy::Kind::safe_constant:
      r.alpha = safe_step_size(p);
      return r;
    case AlphaStrategy::Kind::fixed:
      r.alpha = s.value;
      return r;
    case AlphaStrategy::Kind::empirical: {
      if (acc == nullptr || !acc->tracks_control_variate()) {
        throw DataError("empirical step size needs an accumulator tracking the control variate");
      }
      if (acc->count() < 2) throw DataError("empirical step size needs at least 2 samples");
      if (acc->control_variate_degenerate()) {
        r.zero_variance_fallback = true;
        r.diagnostic = "control variate has zero sample variance (constant signal); using alpha = 0";
        return r;
      }
      r.alpha = acc->centered_xy() / acc->centered_yy();
      return r;
    }
    case AlphaStrategy::Kind::oracle_optimal: {
      if (p.size() > kEnumerationMaxVertices) {
        throw SizeLimitError("oracle-optimal step size needs n <= " + std::to_string(kEnumerationMaxVertices));
      }
      auto m = exact_estimator_moments(p);
      if (!(m.trace_var_ybar > 1e-14 * static_cast<double>(p.size()))) {
        r.zero_variance_fallback = true;
        r.diagnostic = "control variate has zero variance (constant signal); using alpha = 0";
        return r;
      }
      r.alpha = m.alpha_star;
      return r;
    }
  }
  return r;
}

}  // namespace forestgd
