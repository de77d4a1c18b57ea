#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "forestgd/errors.hpp"
#include "forestgd/estimators.hpp"
#include "forestgd/graph.hpp"
#include "forestgd/graph_io.hpp"
#include "forestgd/linalg.hpp"
#include "forestgd/monte_carlo.hpp"
#include "forestgd/random.hpp"

namespace forestgd {

using ClassId = int;

/// Generalized graph semi-supervised classification
///   F = D^{1-sigma} K D^{sigma-1} Y,  K = (D + (2/mu) L)^{-1} D,
/// which is the smoothing operator with absorption q_i = (mu/2) d_i.
struct SSLProblem {
  const Graph* graph = nullptr;
  std::vector<std::optional<ClassId>> labels;  ///< ground truth per vertex, when known
  std::vector<Vertex> labeled;                 ///< vertices whose label is revealed
  std::size_t num_classes = 0;
  double mu = 1.0;
  double sigma = 0.0;

  void validate() const {
    if (graph == nullptr) throw DataError("SSL problem has no graph");
    const std::size_t n = graph->num_vertices();
    if (labels.size() != n) throw DataError("label vector does not match n");
    if (labeled.empty()) throw DataError("labeled set is empty");
    if (num_classes == 0) throw DataError("SSL problem needs at least one class");
    if (!(mu > 0.0)) throw DataError("mu must be positive");
    if (!(sigma >= 0.0 && sigma <= 1.0)) throw DataError("sigma must lie in [0, 1]");
    std::vector<bool> has(num_classes, false);
    for (Vertex v : labeled) {
      if (v >= n) throw DataError("labeled vertex " + std::to_string(v) + " out of range");
      if (!labels[v]) throw DataError("labeled vertex " + std::to_string(v) + " has no class");
      if (*labels[v] < 0 || static_cast<std::size_t>(*labels[v]) >= num_classes) {
        throw DataError("class id out of range at vertex " + std::to_string(v));
      }
      has[static_cast<std::size_t>(*labels[v])] = true;
    }
    for (std::size_t c = 0; c < num_classes; ++c) {
      if (!has[c]) throw DataError("class " + std::to_string(c) + " has no labeled vertex");
    }
  }

  Vector absorption() const {
    Vector q(graph->num_vertices());
    for (Vertex i = 0; i < q.size(); ++i) q[i] = 0.5 * mu * graph->degree(i);
    return q;
  }

  /// Columns D^{sigma-1} y_l of the scaled label matrix.
  std::vector<Vector> scaled_label_signals() const {
    const std::size_t n = graph->num_vertices();
    std::vector<Vector> cols(num_classes, Vector(n, 0.0));
    for (Vertex v : labeled) {
      cols[static_cast<std::size_t>(*labels[v])][v] = std::pow(graph->degree(v), sigma - 1.0);
    }
    return cols;
  }

  /// The safe step 2 mu / (mu + 4).
  double safe_alpha() const { return 2.0 * mu / (mu + 4.0); }
};

struct ClassificationResult {
  std::vector<Vector> scores;       ///< one column f_l per class
  std::vector<ClassId> predicted;
  double accuracy = std::numeric_limits<double>::quiet_NaN();  ///< NaN on an empty holdout
};

namespace detail {

inline ClassificationResult classify(const SSLProblem& p, std::vector<Vector> scores) {
  const std::size_t n = p.graph->num_vertices();
  ClassificationResult r;
  r.predicted.assign(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t best = 0;
    for (std::size_t c = 1; c < scores.size(); ++c) {
      if (scores[c][i] > scores[best][i]) best = c;
    }
    r.predicted[i] = static_cast<ClassId>(best);
  }
  std::vector<bool> revealed(n, false);
  for (Vertex v : p.labeled) revealed[v] = true;
  std::size_t total = 0;
  std::size_t correct = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (revealed[i] || !p.labels[i]) continue;
    ++total;
    if (*p.labels[i] == r.predicted[i]) ++correct;
  }
  if (total > 0) r.accuracy = static_cast<double>(correct) / static_cast<double>(total);
  r.scores = std::move(scores);
  return r;
}

inline void unscale(const SSLProblem& p, Vector& f) {
  for (Vertex i = 0; i < f.size(); ++i) f[i] *= std::pow(p.graph->degree(i), 1.0 - p.sigma);
}

}  // namespace detail

inline ClassificationResult ssl_exact(const SSLProblem& p, double tol = 1e-10) {
  p.validate();
  const Vector q = p.absorption();
  std::vector<Vector> scores;
  for (auto& signal : p.scaled_label_signals()) {
    SmoothingProblem sp(*p.graph, std::move(signal), q);
    Vector f = solve_exact_cg(sp, tol).x;
    detail::unscale(p, f);
    scores.push_back(std::move(f));
  }
  return detail::classify(p, std::move(scores));
}

struct SSLForestOptions {
  MonteCarloOptions monte_carlo;
  bool resample_per_class = false;  ///< draw fresh forests for every class
};

/// Forest-based classifiers evaluated on one shared set of draws, one result
/// per strategy (e.g. xbar via fixed(0), zbar via safe or empirical).
inline std::vector<ClassificationResult> ssl_forest_multi(const SSLProblem& p, std::size_t samples,
                                                          std::span<const AlphaStrategy> strategies,
                                                          std::uint64_t seed, SSLForestOptions opts = {}) {
  p.validate();
  if (samples == 0) throw DataError("Monte Carlo needs at least one sample");
  const bool empirical = std::any_of(strategies.begin(), strategies.end(), [](const AlphaStrategy& s) {
    return s.kind == AlphaStrategy::Kind::empirical;
  });
  if (empirical) {
    if (samples < 2) throw DataError("empirical step size needs at least 2 samples");
    opts.monte_carlo.track_control_variate = true;
  }
  const Vector q = p.absorption();
  const auto signals = p.scaled_label_signals();

  std::vector<MonteCarloAccumulator> accs;
  if (opts.resample_per_class) {
    for (std::size_t c = 0; c < signals.size(); ++c) {
      auto one = accumulate_forest_samples(*p.graph, q, std::span<const Vector>(&signals[c], 1), samples,
                                           derive_seed(seed, 0x636c6173, c), opts.monte_carlo);
      accs.push_back(std::move(one.front()));
    }
  } else {
    accs = accumulate_forest_samples(*p.graph, q, signals, samples, seed, opts.monte_carlo);
  }

  std::vector<ClassificationResult> out;
  for (const auto& strategy : strategies) {
    std::vector<Vector> scores;
    for (std::size_t c = 0; c < signals.size(); ++c) {
      SmoothingProblem sp(*p.graph, signals[c], q);
      auto est = finish_estimate(sp, accs[c], strategy);
      detail::unscale(p, est.estimate);
      scores.push_back(std::move(est.estimate));
    }
    out.push_back(detail::classify(p, std::move(scores)));
  }
  return out;
}

inline ClassificationResult ssl_forest(const SSLProblem& p, std::size_t samples, const AlphaStrategy& strategy,
                                       std::uint64_t seed, const SSLForestOptions& opts = {}) {
  return std::move(ssl_forest_multi(p, samples, std::span<const AlphaStrategy>(&strategy, 1), seed, opts).front());
}

struct AccuracyRow {
  std::size_t labels_per_class = 0;
  std::string method;
  double mean_accuracy = 0.0;  ///< NaN when every holdout was empty
  double std_accuracy = 0.0;
};

struct AccuracyExperimentConfig {
  std::size_t labels_per_class = 1;
  std::size_t repeats = 100;
  std::size_t samples = 50;
  std::uint64_t seed = 0;
  SSLForestOptions forest;
};

/// Repeatedly reveals m uniformly chosen vertices per class and reports the
/// holdout accuracy of the exact, xbar, zbar(safe) and zbar(empirical)
/// classifiers. `truth` carries the class of every vertex that has one; the
/// problem's labeled set is overwritten per repeat.
inline std::vector<AccuracyRow> accuracy_experiment(SSLProblem p, const AccuracyExperimentConfig& cfg) {
  const std::size_t k = p.num_classes;
  std::vector<std::vector<Vertex>> members(k);
  for (Vertex v = 0; v < p.labels.size(); ++v) {
    if (p.labels[v]) members.at(static_cast<std::size_t>(*p.labels[v])).push_back(v);
  }
  for (std::size_t c = 0; c < k; ++c) {
    if (members[c].size() < cfg.labels_per_class) {
      throw DataError("class " + std::to_string(c) + " has fewer than " + std::to_string(cfg.labels_per_class) +
                      " members");
    }
  }
  if (cfg.repeats == 0) throw DataError("accuracy experiment needs at least one repeat");

  const std::vector<std::string> names{"exact", "xbar", "zbar_safe", "zbar_empirical"};
  const std::vector<AlphaStrategy> strategies{AlphaStrategy::fixed(0.0), AlphaStrategy::safe(),
                                              AlphaStrategy::empirical()};
  std::vector<std::vector<double>> acc(names.size());
  for (std::size_t r = 0; r < cfg.repeats; ++r) {
    auto rng = substream(derive_seed(cfg.seed, 0x73706c69), r);
    p.labeled.clear();
    for (std::size_t c = 0; c < k; ++c) {
      auto pool = members[c];
      // Partial Fisher-Yates: the first m entries are a uniform m-subset.
      for (std::size_t i = 0; i < cfg.labels_per_class; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, pool.size() - 1);
        std::swap(pool[i], pool[pick(rng)]);
        p.labeled.push_back(pool[i]);
      }
    }
    acc[0].push_back(ssl_exact(p).accuracy);
    auto forest = ssl_forest_multi(p, cfg.samples, strategies, derive_seed(cfg.seed, 0x6d63, r), cfg.forest);
    for (std::size_t s = 0; s < forest.size(); ++s) acc[s + 1].push_back(forest[s].accuracy);
  }

  std::vector<AccuracyRow> rows;
  for (std::size_t mth = 0; mth < names.size(); ++mth) {
    AccuracyRow row{cfg.labels_per_class, names[mth], std::numeric_limits<double>::quiet_NaN(), 0.0};
    std::vector<double> vals;
    for (double a : acc[mth]) {
      if (!std::isnan(a)) vals.push_back(a);
    }
    if (!vals.empty()) {
      double mean = 0.0;
      for (double a : vals) mean += a;
      mean /= static_cast<double>(vals.size());
      double ss = 0.0;
      for (double a : vals) ss += (a - mean) * (a - mean);
      row.mean_accuracy = mean;
      row.std_accuracy = vals.size() > 1 ? std::sqrt(ss / static_cast<double>(vals.size() - 1)) : 0.0;
    } else {
      row.std_accuracy = std::numeric_limits<double>::quiet_NaN();
    }
    rows.push_back(row);
  }
  return rows;
}

struct LabelTable {
  std::vector<std::optional<ClassId>> labels;  ///< dense class ids 0..k-1
  std::size_t num_classes = 0;
  std::vector<long long> original_ids;         ///< dense id -> id in the file
};

/// Reads "node,class_id" rows. Class ids are remapped to 0..k-1 in
/// increasing order; nodes without a row stay unlabeled.
inline LabelTable read_labels(std::istream& in, std::size_t n) {
  std::vector<std::optional<long long>> raw_labels(n);
  std::map<long long, ClassId> remap;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    auto line = detail::strip_comment(raw);
    if (line.empty()) continue;
    auto fields = detail::split_fields(line, ", \t");
    if (fields.size() != 2) throw DataError(detail::line_error(line_no, "expected 'node,class_id'"));
    auto node = detail::parse_number<std::size_t>(fields[0]);
    auto cls = detail::parse_number<long long>(fields[1]);
    if (!node || !cls) {
      if (line_no == 1) continue;  // header
      throw DataError(detail::line_error(line_no, "invalid 'node,class_id' row"));
    }
    if (*node >= n) throw DataError(detail::line_error(line_no, "node id out of range"));
    if (raw_labels[*node]) throw DataError(detail::line_error(line_no, "node labeled twice"));
    raw_labels[*node] = *cls;
    remap.emplace(*cls, 0);
  }
  LabelTable t;
  for (auto& [orig, dense] : remap) {
    dense = static_cast<ClassId>(t.original_ids.size());
    t.original_ids.push_back(orig);
  }
  t.num_classes = remap.size();
  t.labels.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (raw_labels[i]) t.labels[i] = remap.at(*raw_labels[i]);
  }
  if (t.num_classes == 0) throw DataError("label file has no rows");
  return t;
}

inline LabelTable load_labels(const std::filesystem::path& path, std::size_t n) {
  auto in = detail::open_input(path);
  return read_labels(in, n);
}

/// One vertex id per line.
inline std::vector<Vertex> read_labeled_set(std::istream& in, std::size_t n) {
  std::vector<Vertex> out;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    auto line = detail::strip_comment(raw);
    if (line.empty()) continue;
    auto v = detail::parse_number<Vertex>(line);
    if (!v || *v >= n) throw DataError(detail::line_error(line_no, "invalid vertex id"));
    out.push_back(*v);
  }
  return out;
}

inline std::vector<Vertex> load_labeled_set(const std::filesystem::path& path, std::size_t n) {
  auto in = detail::open_input(path);
  return read_labeled_set(in, n);
}

}  // namespace forestgd
