#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "forestgd/errors.hpp"
#include "forestgd/graph.hpp"

namespace forestgd {

using Vector = std::vector<double>;

inline double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

inline double squared_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return s;
}

/// out = L x, computed arc by arc.
inline void apply_laplacian(const Graph& g, std::span<const double> x, std::span<double> out) {
  for (Vertex i = 0; i < g.num_vertices(); ++i) {
    auto nbrs = g.neighbors(i);
    auto ws = g.neighbor_weights(i);
    double acc = 0.0;
    for (std::size_t a = 0; a < nbrs.size(); ++a) acc += ws[a] * (x[i] - x[nbrs[a]]);
    out[i] = acc;
  }
}

inline Vector apply_laplacian(const Graph& g, std::span<const double> x) {
  Vector out(x.size());
  apply_laplacian(g, x, out);
  return out;
}

/// A Tikhonov smoothing problem: signal y and positive per-node absorption
/// weights q. The smoothing operator is K = (Q + L)^{-1} Q with Q = diag(q),
/// which is q (qI + L)^{-1} when q is uniform.
class SmoothingProblem {
 public:
  SmoothingProblem(const Graph& g, Vector y, Vector q)
      : graph_(&g), y_(std::move(y)), q_(std::move(q)) {
    if (y_.size() != g.num_vertices()) {
      throw DataError("signal length " + std::to_string(y_.size()) + " does not match n = " +
                      std::to_string(g.num_vertices()));
    }
    if (q_.size() != g.num_vertices()) throw DataError("absorption weights do not match n");
    for (double qi : q_) {
      if (!(qi > 0.0) || !std::isfinite(qi)) throw DataError("absorption weights must be positive");
    }
  }

  static SmoothingProblem uniform(const Graph& g, Vector y, double q) {
    return SmoothingProblem(g, std::move(y), Vector(g.num_vertices(), q));
  }

  const Graph& graph() const { return *graph_; }
  std::size_t size() const { return y_.size(); }
  std::span<const double> signal() const { return y_; }
  std::span<const double> absorption() const { return q_; }

  bool has_uniform_absorption() const {
    return std::all_of(q_.begin(), q_.end(), [&](double qi) { return qi == q_.front(); });
  }

  SmoothingProblem with_signal(Vector y) const { return SmoothingProblem(*graph_, std::move(y), q_); }

 private:
  const Graph* graph_;
  Vector y_;
  Vector q_;
};

/// K^{-1} v = Q^{-1}(Q + L) v = v + Q^{-1} L v, in O(m).
inline Vector apply_K_inverse(const SmoothingProblem& p, std::span<const double> v) {
  Vector out = apply_laplacian(p.graph(), v);
  auto q = p.absorption();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = v[i] + out[i] / q[i];
  return out;
}

struct CgResult {
  Vector x;
  std::size_t iterations = 0;
  double relative_residual = 0.0;
};

/// Solves (Q + L) x = Q y by unpreconditioned conjugate gradient, so that
/// x = K y. Stops when ||(Q+L)x - Qy|| <= tol ||Qy||; max_iter = 0 means 10 n.
inline CgResult solve_exact_cg(const SmoothingProblem& p, double tol = 1e-10, std::size_t max_iter = 0) {
  if (!(tol > 0.0)) throw DataError("CG tolerance must be positive");
  const std::size_t n = p.size();
  if (max_iter == 0) max_iter = 10 * n;
  auto q = p.absorption();
  auto y = p.signal();
  const Graph& g = p.graph();

  auto apply = [&](std::span<const double> v, std::span<double> out) {
    apply_laplacian(g, v, out);
    for (std::size_t i = 0; i < n; ++i) out[i] += q[i] * v[i];
  };

  Vector b(n);
  for (std::size_t i = 0; i < n; ++i) b[i] = q[i] * y[i];
  const double bnorm = norm2(b);
  CgResult res;
  res.x.assign(n, 0.0);
  if (bnorm == 0.0) return res;

  Vector r = b;
  Vector d = r;
  Vector ad(n);
  double rr = dot(r, r);
  while (std::sqrt(rr) > tol * bnorm) {
    if (res.iterations >= max_iter) {
      throw NumericalError("conjugate gradient did not converge in " + std::to_string(max_iter) +
                           " iterations (relative residual " + std::to_string(std::sqrt(rr) / bnorm) + ")");
    }
    apply(d, ad);
    const double step = rr / dot(d, ad);
    for (std::size_t i = 0; i < n; ++i) {
      res.x[i] += step * d[i];
      r[i] -= step * ad[i];
    }
    const double rr_next = dot(r, r);
    const double beta = rr_next / rr;
    for (std::size_t i = 0; i < n; ++i) d[i] = r[i] + beta * d[i];
    rr = rr_next;
    ++res.iterations;
  }
  res.relative_residual = std::sqrt(rr) / bnorm;
  return res;
}

inline constexpr std::size_t kDenseOracleLimit = 2000;

inline Eigen::MatrixXd dense_laplacian(const Graph& g) {
  const auto n = static_cast<Eigen::Index>(g.num_vertices());
  Eigen::MatrixXd lap = Eigen::MatrixXd::Zero(n, n);
  for (const Edge& e : g.edges()) {
    lap(e.u, e.v) -= e.w;
    lap(e.v, e.u) -= e.w;
    lap(e.u, e.u) += e.w;
    lap(e.v, e.v) += e.w;
  }
  return lap;
}

inline void require_dense_scale(const SmoothingProblem& p) {
  if (p.size() > kDenseOracleLimit) {
    throw SizeLimitError("dense oracle supports n <= " + std::to_string(kDenseOracleLimit) + ", got " +
                         std::to_string(p.size()));
  }
}

/// Dense (Q + L)^{-1} Q, the explicit smoothing matrix.
inline Eigen::MatrixXd dense_smoothing_matrix(const SmoothingProblem& p) {
  require_dense_scale(p);
  Eigen::MatrixXd a = dense_laplacian(p.graph());
  const auto q = Eigen::Map<const Eigen::VectorXd>(p.absorption().data(), static_cast<Eigen::Index>(p.size()));
  a.diagonal() += q;
  Eigen::MatrixXd rhs = q.asDiagonal();
  return a.llt().solve(rhs);
}

/// Direct Cholesky solve of (Q + L) x = Q y.
inline Vector solve_exact_dense(const SmoothingProblem& p) {
  require_dense_scale(p);
  const auto n = static_cast<Eigen::Index>(p.size());
  Eigen::MatrixXd a = dense_laplacian(p.graph());
  Eigen::VectorXd b(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    a(i, i) += p.absorption()[static_cast<std::size_t>(i)];
    b(i) = p.absorption()[static_cast<std::size_t>(i)] * p.signal()[static_cast<std::size_t>(i)];
  }
  Eigen::VectorXd x = a.llt().solve(b);
  return Vector(x.data(), x.data() + n);
}

/// Eigenvalues of K^{-1} = I + Q^{-1} L via the symmetric similar matrix
/// I + Q^{-1/2} L Q^{-1/2}, ascending.
inline Vector k_inverse_spectrum(const SmoothingProblem& p) {
  require_dense_scale(p);
  const auto n = static_cast<Eigen::Index>(p.size());
  Eigen::MatrixXd s = dense_laplacian(p.graph());
  Eigen::VectorXd inv_sqrt_q(n);
  for (Eigen::Index i = 0; i < n; ++i) inv_sqrt_q(i) = 1.0 / std::sqrt(p.absorption()[static_cast<std::size_t>(i)]);
  s = inv_sqrt_q.asDiagonal() * s * inv_sqrt_q.asDiagonal();
  s.diagonal().array() += 1.0;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(s, Eigen::EigenvaluesOnly);
  const auto& ev = eig.eigenvalues();
  return Vector(ev.data(), ev.data() + n);
}

struct SpectralCheckReport {
  double spectral_radius = 0.0;
  bool pass = false;
};

/// Spectral radius of I - alpha K^{-1}; passes when it is at most 1 + 1e-10.
inline SpectralCheckReport contraction_check(const SmoothingProblem& p, double alpha) {
  SpectralCheckReport report;
  for (double lambda : k_inverse_spectrum(p)) {
    report.spectral_radius = std::max(report.spectral_radius, std::abs(1.0 - alpha * lambda));
  }
  report.pass = report.spectral_radius <= 1.0 + 1e-10;
  return report;
}

}  // namespace forestgd
