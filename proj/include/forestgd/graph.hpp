#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "forestgd/errors.hpp"

namespace forestgd {

using Vertex = std::uint32_t;

struct Edge {
  Vertex u = 0;
  Vertex v = 0;
  double w = 1.0;

  friend bool operator==(const Edge&, const Edge&) = default;
};

/// Number of connected components of the undirected graph on n vertices.
inline std::size_t count_components(std::size_t n, std::span<const Edge> edges) {
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  auto find = [&](std::size_t x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  };
  std::size_t components = n;
  for (const Edge& e : edges) {
    auto a = find(e.u);
    auto b = find(e.v);
    if (a != b) {
      parent[a] = b;
      --components;
    }
  }
  return components;
}

/// Weighted undirected graph in compressed adjacency (CSR) form.
///
/// Every undirected edge {u,v} is stored as the two arcs (u,v) and (v,u) with
/// the same weight. Weighted degrees and per-vertex cumulative arc weights are
/// precomputed so that random-walk steps cost O(log deg). Instances are
/// immutable once built and connected by construction.
class Graph {
 public:
  Graph() = default;

  /// Builds a graph from an undirected edge list. Rejects self-loops,
  /// nonpositive or non-finite weights, out-of-range ids, duplicate edges
  /// and disconnected graphs.
  static Graph from_edges(std::size_t n, std::span<const Edge> edges) {
    if (n == 0) throw DataError("graph must have at least one vertex");
    std::vector<Edge> canon;
    canon.reserve(edges.size());
    for (const Edge& e : edges) {
      if (e.u >= n || e.v >= n) {
        throw DataError("edge (" + std::to_string(e.u) + "," + std::to_string(e.v) +
                        ") references a vertex outside [0," + std::to_string(n) + ")");
      }
      if (e.u == e.v) throw DataError("self-loop at vertex " + std::to_string(e.u));
      if (!(e.w > 0.0) || !std::isfinite(e.w)) {
        throw DataError("nonpositive weight on edge (" + std::to_string(e.u) + "," +
                        std::to_string(e.v) + ")");
      }
      canon.push_back({std::min(e.u, e.v), std::max(e.u, e.v), e.w});
    }
    std::sort(canon.begin(), canon.end(), [](const Edge& a, const Edge& b) {
      return std::pair(a.u, a.v) < std::pair(b.u, b.v);
    });
    for (std::size_t i = 1; i < canon.size(); ++i) {
      if (canon[i].u == canon[i - 1].u && canon[i].v == canon[i - 1].v) {
        throw DataError("duplicate undirected edge (" + std::to_string(canon[i].u) + "," +
                        std::to_string(canon[i].v) + ")");
      }
    }
    if (auto c = count_components(n, canon); c != 1) {
      throw DataError("graph is disconnected: " + std::to_string(c) + " connected components");
    }

    Graph g;
    g.edges_ = std::move(canon);
    g.offsets_.assign(n + 1, 0);
    for (const Edge& e : g.edges_) {
      ++g.offsets_[e.u + 1];
      ++g.offsets_[e.v + 1];
    }
    std::partial_sum(g.offsets_.begin(), g.offsets_.end(), g.offsets_.begin());
    g.targets_.resize(2 * g.edges_.size());
    g.weights_.resize(2 * g.edges_.size());
    std::vector<std::size_t> fill(g.offsets_.begin(), g.offsets_.end() - 1);
    for (const Edge& e : g.edges_) {
      g.targets_[fill[e.u]] = e.v;
      g.weights_[fill[e.u]++] = e.w;
      g.targets_[fill[e.v]] = e.u;
      g.weights_[fill[e.v]++] = e.w;
    }
    g.degrees_.assign(n, 0.0);
    g.cumulative_.resize(g.weights_.size());
    for (std::size_t v = 0; v < n; ++v) {
      double acc = 0.0;
      for (std::size_t a = g.offsets_[v]; a < g.offsets_[v + 1]; ++a) {
        acc += g.weights_[a];
        g.cumulative_[a] = acc;
      }
      g.degrees_[v] = acc;
    }
    g.max_degree_ = *std::max_element(g.degrees_.begin(), g.degrees_.end());
    return g;
  }

  std::size_t num_vertices() const { return degrees_.size(); }
  std::size_t num_edges() const { return edges_.size(); }

  std::span<const Vertex> neighbors(Vertex v) const {
    return {targets_.data() + offsets_[v], targets_.data() + offsets_[v + 1]};
  }
  std::span<const double> neighbor_weights(Vertex v) const {
    return {weights_.data() + offsets_[v], weights_.data() + offsets_[v + 1]};
  }

  double degree(Vertex v) const { return degrees_[v]; }
  std::span<const double> degrees() const { return degrees_; }
  double max_degree() const { return max_degree_; }

  /// Undirected edges with u < v, sorted lexicographically.
  std::span<const Edge> edges() const { return edges_; }

  /// Picks the neighbour j of v whose cumulative-weight interval contains
  /// `mass`, for mass uniform in [0, degree(v)).
  Vertex neighbor_at_mass(Vertex v, double mass) const {
    auto first = cumulative_.begin() + static_cast<std::ptrdiff_t>(offsets_[v]);
    auto last = cumulative_.begin() + static_cast<std::ptrdiff_t>(offsets_[v + 1]);
    auto it = std::upper_bound(first, last, mass);
    if (it == last) --it;
    return targets_[static_cast<std::size_t>(it - cumulative_.begin())];
  }

  friend bool operator==(const Graph& a, const Graph& b) {
    return a.num_vertices() == b.num_vertices() && a.edges_ == b.edges_;
  }

 private:
  std::vector<Edge> edges_;
  std::vector<std::size_t> offsets_;
  std::vector<Vertex> targets_;
  std::vector<double> weights_;
  std::vector<double> cumulative_;
  std::vector<double> degrees_;
  double max_degree_ = 0.0;
};

struct DegreeSummary {
  std::vector<double> degrees;
  double d_max = 0.0;
};

inline DegreeSummary degrees_and_dmax(const Graph& g) {
  return {std::vector<double>(g.degrees().begin(), g.degrees().end()), g.max_degree()};
}

}  // namespace forestgd
