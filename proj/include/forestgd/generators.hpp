#pragma once

#include <algorithm>
#include <cstdint>
#include <set>
#include <string>
#include <unordered_set>
#include <utility>
#include <variant>
#include <vector>

#include "forestgd/errors.hpp"
#include "forestgd/graph.hpp"
#include "forestgd/graph_io.hpp"
#include "forestgd/random.hpp"

namespace forestgd {

namespace model {
struct Regular {
  std::size_t degree = 3;
};
struct BarabasiAlbert {
  std::size_t k = 2;
};
struct Grid {
  std::size_t rows = 1;
  std::size_t cols = 1;
};
struct Knn {
  NodePositions positions;
  std::size_t k = 5;
};
/// `count` cliques of `size` vertices; clique c is joined to clique c+1 by
/// the single edge (last vertex of c, first vertex of c+1).
struct Cliques {
  std::size_t count = 2;
  std::size_t size = 20;
};
}  // namespace model

using GraphModel = std::variant<model::Regular, model::BarabasiAlbert, model::Grid, model::Knn, model::Cliques>;

/// Class id of every vertex of a model::Cliques graph (its clique index).
inline std::vector<int> clique_membership(const model::Cliques& c) {
  std::vector<int> out(c.count * c.size);
  for (std::size_t v = 0; v < out.size(); ++v) out[v] = static_cast<int>(v / c.size);
  return out;
}

inline constexpr int kMaxGeneratorAttempts = 100;

namespace detail {

inline std::uint64_t pair_key(Vertex a, Vertex b) {
  if (a > b) std::swap(a, b);
  return (std::uint64_t{a} << 32) | b;
}

// Steger-Wormald style pairing: repeatedly shuffle the open stubs and join
// consecutive pairs that create neither loops nor multi-edges. Returns an
// empty vector when the pairing gets stuck.
inline std::vector<Edge> try_random_regular(std::size_t n, std::size_t d, Rng& rng) {
  std::vector<Edge> edges;
  std::unordered_set<std::uint64_t> present;
  std::vector<Vertex> stubs;
  stubs.reserve(n * d);
  for (std::size_t v = 0; v < n; ++v) stubs.insert(stubs.end(), d, static_cast<Vertex>(v));

  while (!stubs.empty()) {
    std::shuffle(stubs.begin(), stubs.end(), rng);
    std::vector<Vertex> leftover;
    for (std::size_t i = 0; i + 1 < stubs.size(); i += 2) {
      Vertex a = stubs[i];
      Vertex b = stubs[i + 1];
      if (a != b && present.insert(pair_key(a, b)).second) {
        edges.push_back({std::min(a, b), std::max(a, b), 1.0});
      } else {
        leftover.push_back(a);
        leftover.push_back(b);
      }
    }
    if (leftover.size() == stubs.size()) {
      // No progress; check whether any suitable pair remains at all.
      bool suitable = false;
      for (std::size_t i = 0; i < leftover.size() && !suitable; ++i) {
        for (std::size_t j = i + 1; j < leftover.size() && !suitable; ++j) {
          suitable = leftover[i] != leftover[j] && !present.contains(pair_key(leftover[i], leftover[j]));
        }
      }
      if (!suitable) return {};
    }
    stubs = std::move(leftover);
  }
  return edges;
}

// Preferential attachment starting from k isolated vertices: vertex k joins
// all of them, every later vertex picks k distinct targets with probability
// proportional to degree. Yields k(n-k) edges.
inline std::vector<Edge> barabasi_albert_edges(std::size_t n, std::size_t k, Rng& rng) {
  std::vector<Edge> edges;
  edges.reserve(k * (n - k));
  std::vector<Vertex> repeated;  // each vertex appears once per incident edge
  repeated.reserve(2 * k * (n - k));
  std::vector<Vertex> targets(k);
  for (std::size_t i = 0; i < k; ++i) targets[i] = static_cast<Vertex>(i);

  for (std::size_t source = k; source < n; ++source) {
    for (Vertex t : targets) {
      edges.push_back({t, static_cast<Vertex>(source), 1.0});
      repeated.push_back(t);
      repeated.push_back(static_cast<Vertex>(source));
    }
    std::set<Vertex> chosen;
    while (chosen.size() < k) {
      std::uniform_int_distribution<std::size_t> pick(0, repeated.size() - 1);
      chosen.insert(repeated[pick(rng)]);
    }
    targets.assign(chosen.begin(), chosen.end());
  }
  return edges;
}

inline std::vector<Edge> grid_edges(std::size_t rows, std::size_t cols) {
  std::vector<Edge> edges;
  auto id = [cols](std::size_t r, std::size_t c) { return static_cast<Vertex>(r * cols + c); };
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      if (c + 1 < cols) edges.push_back({id(r, c), id(r, c + 1), 1.0});
      if (r + 1 < rows) edges.push_back({id(r, c), id(r + 1, c), 1.0});
    }
  }
  return edges;
}

// i ~ j when j is among the k nearest of i or vice versa. Distance ties are
// broken by the lower index.
inline std::vector<Edge> knn_edges(const NodePositions& pts, std::size_t k) {
  const std::size_t n = pts.size();
  std::set<std::pair<Vertex, Vertex>> pairs;
  std::vector<std::pair<double, Vertex>> dist;
  for (std::size_t i = 0; i < n; ++i) {
    dist.clear();
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      double dx = pts[i].x - pts[j].x;
      double dy = pts[i].y - pts[j].y;
      dist.emplace_back(dx * dx + dy * dy, static_cast<Vertex>(j));
    }
    std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k), dist.end());
    for (std::size_t t = 0; t < k; ++t) {
      auto a = static_cast<Vertex>(i);
      auto b = dist[t].second;
      pairs.emplace(std::min(a, b), std::max(a, b));
    }
  }
  std::vector<Edge> edges;
  edges.reserve(pairs.size());
  for (auto [a, b] : pairs) edges.push_back({a, b, 1.0});
  return edges;
}

}  // namespace detail

/// Uniform random positions in the unit square.
inline NodePositions random_positions(std::size_t n, std::uint64_t seed) {
  auto rng = substream(derive_seed(seed, 0x706f73), 0);
  NodePositions pts(n);
  for (auto& p : pts) {
    p.x = uniform01(rng);
    p.y = uniform01(rng);
  }
  return pts;
}

/// Generates a connected graph from `m`. Random models are reseeded from a
/// stream derived from `seed` until connected, at most kMaxGeneratorAttempts
/// times. For knn, `n` must equal the number of positions (or be 0).
inline Graph gen_graph(const GraphModel& m, std::size_t n, std::uint64_t seed) {
  return std::visit(
      [&](const auto& spec) -> Graph {
        using T = std::decay_t<decltype(spec)>;
        if constexpr (std::is_same_v<T, model::Regular>) {
          const std::size_t d = spec.degree;
          if (d == 0 || d >= n) throw DataError("regular graph needs 0 < d < n");
          if ((d * n) % 2 != 0) throw DataError("regular graph needs d*n even");
          for (int attempt = 0; attempt < kMaxGeneratorAttempts; ++attempt) {
            auto rng = substream(derive_seed(seed, 0x726567), static_cast<std::uint64_t>(attempt));
            auto edges = detail::try_random_regular(n, d, rng);
            if (edges.empty() || count_components(n, edges) != 1) continue;
            return Graph::from_edges(n, edges);
          }
        } else if constexpr (std::is_same_v<T, model::BarabasiAlbert>) {
          if (spec.k == 0 || spec.k >= n) throw DataError("Barabasi-Albert graph needs 0 < k < n");
          for (int attempt = 0; attempt < kMaxGeneratorAttempts; ++attempt) {
            auto rng = substream(derive_seed(seed, 0x6261), static_cast<std::uint64_t>(attempt));
            auto edges = detail::barabasi_albert_edges(n, spec.k, rng);
            if (count_components(n, edges) != 1) continue;
            return Graph::from_edges(n, edges);
          }
        } else if constexpr (std::is_same_v<T, model::Grid>) {
          if (spec.rows == 0 || spec.cols == 0) throw DataError("grid needs rows, cols >= 1");
          if (n != 0 && n != spec.rows * spec.cols) throw DataError("grid size does not match n");
          return Graph::from_edges(spec.rows * spec.cols, detail::grid_edges(spec.rows, spec.cols));
        } else if constexpr (std::is_same_v<T, model::Cliques>) {
          if (spec.count == 0 || spec.size < 2) throw DataError("cliques need count >= 1 and size >= 2");
          const std::size_t total = spec.count * spec.size;
          if (n != 0 && n != total) throw DataError("cliques: n does not match count * size");
          std::vector<Edge> edges;
          for (std::size_t c = 0; c < spec.count; ++c) {
            const std::size_t base = c * spec.size;
            for (std::size_t i = 0; i < spec.size; ++i)
              for (std::size_t j = i + 1; j < spec.size; ++j)
                edges.push_back({static_cast<Vertex>(base + i), static_cast<Vertex>(base + j), 1.0});
            if (c + 1 < spec.count) {
              edges.push_back({static_cast<Vertex>(base + spec.size - 1), static_cast<Vertex>(base + spec.size), 1.0});
            }
          }
          return Graph::from_edges(total, edges);
        } else {
          const std::size_t count = spec.positions.size();
          if (n != 0 && n != count) throw DataError("knn: n does not match the number of positions");
          if (spec.k == 0 || spec.k >= count) throw DataError("knn graph needs 0 < k < n");
          auto edges = detail::knn_edges(spec.positions, spec.k);
          if (auto c = count_components(count, edges); c != 1) {
            throw DataError("knn graph is disconnected: " + std::to_string(c) + " connected components");
          }
          return Graph::from_edges(count, edges);
        }
        throw DataError("graph generator did not produce a connected graph after " +
                        std::to_string(kMaxGeneratorAttempts) + " attempts");
      },
      m);
}

}  // namespace forestgd
