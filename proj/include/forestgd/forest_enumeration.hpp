#pragma once

#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "forestgd/errors.hpp"
#include "forestgd/graph.hpp"
#include "forestgd/linalg.hpp"

namespace forestgd {

inline constexpr std::size_t kEnumerationMaxVertices = 9;
inline constexpr std::size_t kEnumerationMaxEdges = 24;

/// Exhaustive law of the random forest process on a tiny graph.
///
/// Each entry is one unrooted spanning forest (an acyclic edge subset). Its
/// weight already sums over the admissible root choices:
///   prod_{e in F} w(e) * prod_{trees T} sum_{v in T} q_v,
/// which is the total weight of all rooted forests sharing that edge set.
struct ForestDistribution {
  struct Family {
    std::uint32_t edge_mask = 0;            ///< bit i set when edges()[i] is in F
    std::vector<std::size_t> component;     ///< tree label per vertex, 0..trees-1
    std::size_t trees = 0;
    double weight = 0.0;
    double probability = 0.0;
    std::uint64_t rooted_count = 0;         ///< number of root assignments
  };

  std::vector<Family> families;
  double normalizer = 0.0;   ///< Z, sum of all rooted-forest weights
  double determinant = 0.0;  ///< det(Q + L), computed independently

  std::uint64_t rooted_forest_count() const {
    std::uint64_t c = 0;
    for (const auto& f : families) c += f.rooted_count;
    return c;
  }

  /// Index of the family with the given edge mask, or families.size().
  std::size_t find(std::uint32_t mask) const {
    for (std::size_t i = 0; i < families.size(); ++i) {
      if (families[i].edge_mask == mask) return i;
    }
    return families.size();
  }
};

inline ForestDistribution enumerate_forests(const Graph& g, std::span<const double> q) {
  const std::size_t n = g.num_vertices();
  const std::size_t m = g.num_edges();
  if (n > kEnumerationMaxVertices || m > kEnumerationMaxEdges) {
    throw SizeLimitError("forest enumeration supports n <= " + std::to_string(kEnumerationMaxVertices) +
                         " and m <= " + std::to_string(kEnumerationMaxEdges));
  }
  if (q.size() != n) throw DataError("absorption weights do not match n");
  auto edges = g.edges();

  ForestDistribution dist;
  std::vector<std::size_t> parent(n);
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };

  for (std::uint32_t mask = 0; mask < (std::uint32_t{1} << m); ++mask) {
    std::iota(parent.begin(), parent.end(), std::size_t{0});
    bool acyclic = true;
    double edge_weight = 1.0;
    for (std::size_t e = 0; e < m && acyclic; ++e) {
      if (!(mask & (std::uint32_t{1} << e))) continue;
      auto a = find(edges[e].u);
      auto b = find(edges[e].v);
      if (a == b) {
        acyclic = false;
      } else {
        parent[a] = b;
        edge_weight *= edges[e].w;
      }
    }
    if (!acyclic) continue;

    ForestDistribution::Family fam;
    fam.edge_mask = mask;
    fam.component.assign(n, n);
    std::vector<std::size_t> label_of_rep(n, n);
    std::vector<double> tree_q;
    std::vector<std::uint64_t> tree_size;
    for (std::size_t v = 0; v < n; ++v) {
      auto r = find(v);
      if (label_of_rep[r] == n) {
        label_of_rep[r] = fam.trees++;
        tree_q.push_back(0.0);
        tree_size.push_back(0);
      }
      fam.component[v] = label_of_rep[r];
      tree_q[fam.component[v]] += q[v];
      ++tree_size[fam.component[v]];
    }
    fam.weight = edge_weight;
    fam.rooted_count = 1;
    for (std::size_t t = 0; t < fam.trees; ++t) {
      fam.weight *= tree_q[t];
      fam.rooted_count *= tree_size[t];
    }
    dist.normalizer += fam.weight;
    dist.families.push_back(std::move(fam));
  }
  for (auto& fam : dist.families) fam.probability = fam.weight / dist.normalizer;

  Eigen::MatrixXd a = dense_laplacian(g);
  for (std::size_t i = 0; i < n; ++i) a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) += q[i];
  dist.determinant = a.determinant();
  if (std::abs(dist.normalizer - dist.determinant) > 1e-9 * std::abs(dist.determinant)) {
    throw NumericalError("forest enumeration self-check failed: Z = " + std::to_string(dist.normalizer) +
                         ", det(Q+L) = " + std::to_string(dist.determinant));
  }
  return dist;
}

}  // namespace forestgd
