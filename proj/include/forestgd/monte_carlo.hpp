#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <limits>
#include <mutex>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "forestgd/errors.hpp"
#include "forestgd/estimators.hpp"
#include "forestgd/forest.hpp"
#include "forestgd/linalg.hpp"
#include "forestgd/random.hpp"

namespace forestgd {

struct MonteCarloOptions {
  std::size_t threads = 0;               ///< 0: hardware concurrency
  bool track_control_variate = true;     ///< accumulate ybar = K^{-1} xbar per sample
  std::uint64_t walk_budget = kDefaultWalkBudget;
};

/// Samples are processed in fixed-size chunks merged in index order, so the
/// floating-point result does not depend on the thread count.
inline constexpr std::size_t kSampleChunk = 64;

namespace detail {

template <typename Body>
void parallel_chunks(std::size_t chunks, std::size_t threads, Body body) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, chunks);
  if (threads <= 1) {
    for (std::size_t c = 0; c < chunks; ++c) body(c);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::jthread> pool;
  pool.reserve(threads);
  for (std::size_t t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (std::size_t c = next++; c < chunks; c = next++) {
        try {
          body(c);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
          next = chunks;
        }
      }
    });
  }
  pool.clear();
  if (error) std::rethrow_exception(error);
}

}  // namespace detail

/// Draws `count` forests with absorption weights q (sample i uses substream
/// (seed, i)) and accumulates xbar, and optionally K^{-1} xbar, for every
/// signal on the same forests.
inline std::vector<MonteCarloAccumulator> accumulate_forest_samples(const Graph& g, std::span<const double> q,
                                                                    std::span<const Vector> signals,
                                                                    std::size_t count, std::uint64_t seed,
                                                                    const MonteCarloOptions& opts = {}) {
  const std::size_t n = g.num_vertices();
  for (const auto& s : signals) {
    if (s.size() != n) throw DataError("signal length does not match n");
  }
  const std::size_t chunks = (count + kSampleChunk - 1) / kSampleChunk;
  std::vector<std::vector<MonteCarloAccumulator>> partial(
      chunks, std::vector<MonteCarloAccumulator>(signals.size(), MonteCarloAccumulator(n, opts.track_control_variate)));

  detail::parallel_chunks(chunks, opts.threads, [&](std::size_t c) {
    auto& accs = partial[c];
    Vector cv(n);
    const std::size_t end = std::min(count, (c + 1) * kSampleChunk);
    for (std::size_t i = c * kSampleChunk; i < end; ++i) {
      auto rng = substream(seed, i);
      auto forest = sample_forest(g, q, rng, opts.walk_budget);
      for (std::size_t s = 0; s < signals.size(); ++s) {
        Vector xbar = partition_average(forest, q, signals[s]);
        if (opts.track_control_variate) {
          apply_laplacian(g, xbar, cv);
          for (std::size_t v = 0; v < n; ++v) cv[v] = xbar[v] + cv[v] / q[v];
          accs[s].add(xbar, cv);
        } else {
          accs[s].add(xbar);
        }
        accs[s].add_walk_steps(forest.walk_steps);
      }
    }
  });

  std::vector<MonteCarloAccumulator> total(signals.size(), MonteCarloAccumulator(n, opts.track_control_variate));
  for (const auto& accs : partial) {
    for (std::size_t s = 0; s < signals.size(); ++s) total[s].merge(accs[s]);
  }
  return total;
}

struct MonteCarloDiagnostics {
  std::size_t samples = 0;
  double trace_var_xbar = 0.0;   ///< NaN when unavailable (N < 2)
  double trace_var_ybar = 0.0;
  double trace_cov_xy = 0.0;
  double alpha = 0.0;
  std::string alpha_strategy;
  std::uint64_t walk_steps = 0;
  bool constant_signal = false;
  bool zero_variance_fallback = false;
  bool alpha_from_same_samples = false;  ///< empirical alpha: estimate carries an O(1/N) bias
  std::string message;
};

struct MonteCarloResult {
  Vector estimate;
  double alpha_used = 0.0;
  MonteCarloDiagnostics diagnostics;
};

/// Applies the gradient step once to the sample mean of xbar:
/// estimate = m_x - alpha (K^{-1} m_x - y), which by linearity equals the
/// sample mean of zbar.
inline MonteCarloResult finish_estimate(const SmoothingProblem& p, const MonteCarloAccumulator& acc,
                                        const AlphaStrategy& strategy) {
  if (acc.count() == 0) throw DataError("Monte Carlo needs at least one sample");
  if (strategy.kind == AlphaStrategy::Kind::empirical && acc.count() < 2) {
    throw DataError("empirical step size needs at least 2 samples");
  }
  MonteCarloResult res;
  auto& diag = res.diagnostics;
  diag.samples = acc.count();
  diag.walk_steps = acc.walk_steps();
  diag.alpha_strategy = to_string(strategy.kind);
  const double nan = std::numeric_limits<double>::quiet_NaN();
  diag.trace_var_xbar = acc.count() >= 2 ? acc.trace_var_x() : nan;
  const bool moments = acc.count() >= 2 && acc.tracks_control_variate();
  diag.trace_var_ybar = moments ? acc.trace_var_y() : nan;
  diag.trace_cov_xy = moments ? acc.trace_cov_xy() : nan;

  auto y = p.signal();
  diag.constant_signal = std::all_of(y.begin(), y.end(), [&](double v) { return v == y.front(); });
  if (diag.constant_signal) {
    // Every forest returns xbar = y; the step has nothing to correct.
    res.estimate.assign(y.begin(), y.end());
    if (strategy.kind == AlphaStrategy::Kind::empirical || strategy.kind == AlphaStrategy::Kind::oracle_optimal) {
      diag.zero_variance_fallback = true;
      diag.message = "constant signal: control variate has zero variance; using alpha = 0";
    } else {
      res.alpha_used = resolve_alpha(strategy, p).alpha;
    }
    diag.alpha = res.alpha_used;
    return res;
  }

  auto resolved = resolve_alpha(strategy, p, &acc);
  res.alpha_used = resolved.alpha;
  diag.alpha = resolved.alpha;
  diag.zero_variance_fallback = resolved.zero_variance_fallback;
  diag.message = resolved.diagnostic;
  diag.alpha_from_same_samples = strategy.kind == AlphaStrategy::Kind::empirical && !resolved.zero_variance_fallback;
  Vector mean = acc.mean_x();
  res.estimate = res.alpha_used == 0.0 ? mean : gradient_step(mean, p, res.alpha_used);
  return res;
}

/// Monte Carlo estimate of K y from N forest draws.
inline MonteCarloResult run_monte_carlo(const SmoothingProblem& p, std::size_t samples, const AlphaStrategy& strategy,
                                        std::uint64_t seed, MonteCarloOptions opts = {}) {
  if (samples == 0) throw DataError("Monte Carlo needs at least one sample");
  if (strategy.kind == AlphaStrategy::Kind::empirical) {
    if (samples < 2) throw DataError("empirical step size needs at least 2 samples");
    opts.track_control_variate = true;
  }
  const Vector signal(p.signal().begin(), p.signal().end());
  auto accs = accumulate_forest_samples(p.graph(), p.absorption(), std::span<const Vector>(&signal, 1), samples,
                                        seed, opts);
  return finish_estimate(p, accs.front(), strategy);
}

}  // namespace forestgd
