#pragma once

#include <cstdint>
#include <limits>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "forestgd/errors.hpp"
#include "forestgd/graph.hpp"
#include "forestgd/random.hpp"

namespace forestgd {

/// One rooted spanning forest. parent[v] is the next vertex on v's path to
/// its root (parent[r] == r for roots); root_of[v] is that root.
struct RootedForest {
  struct Tree {
    Vertex root = 0;
    std::vector<Vertex> vertices;
  };

  std::vector<Vertex> parent;
  std::vector<Vertex> root_of;
  std::vector<Tree> trees;
  std::uint64_t rng_draws = 0;
  std::uint64_t walk_steps = 0;

  std::size_t size() const { return root_of.size(); }

  /// Tree index of every vertex (indices into `trees`).
  std::vector<std::size_t> tree_index() const {
    std::vector<std::size_t> idx(size());
    for (std::size_t t = 0; t < trees.size(); ++t) {
      for (Vertex v : trees[t].vertices) idx[v] = t;
    }
    return idx;
  }
};

inline constexpr std::uint64_t kDefaultWalkBudget = 1'000'000'000ULL;

namespace detail {

inline void build_partition(RootedForest& f) {
  const std::size_t n = f.root_of.size();
  std::vector<std::size_t> slot(n, std::numeric_limits<std::size_t>::max());
  f.trees.clear();
  for (Vertex v = 0; v < n; ++v) {
    Vertex r = f.root_of[v];
    if (slot[r] == std::numeric_limits<std::size_t>::max()) {
      slot[r] = f.trees.size();
      f.trees.push_back({r, {}});
    }
    f.trees[slot[r]].vertices.push_back(v);
  }
}

}  // namespace detail

/// Draws a rooted spanning forest with probability proportional to
/// prod_{e in F} w(e) * prod_{roots r} q_r.
///
/// Wilson's algorithm on the graph augmented with an absorbing vertex: a walk
/// at u is absorbed with probability q_u / (q_u + d_u) and otherwise moves to
/// neighbour j with probability w(u,j) / (q_u + d_u). Loops are erased by
/// overwriting the next-pointer in place. A walk that is absorbed makes its
/// last vertex a root; a walk that hits the existing forest adopts its root.
inline RootedForest sample_forest(const Graph& g, std::span<const double> q, Rng& rng,
                                  std::uint64_t walk_budget = kDefaultWalkBudget) {
  const std::size_t n = g.num_vertices();
  if (q.size() != n) throw DataError("absorption weights do not match n");
  constexpr Vertex kAbsorbed = std::numeric_limits<Vertex>::max();

  RootedForest f;
  f.parent.assign(n, kAbsorbed);
  f.root_of.assign(n, kAbsorbed);
  std::vector<Vertex> next(n, kAbsorbed);
  std::vector<bool> in_forest(n, false);

  for (Vertex start = 0; start < n; ++start) {
    Vertex u = start;
    while (u != kAbsorbed && !in_forest[u]) {
      const double total = q[u] + g.degree(u);
      const double mass = uniform01(rng) * total;
      ++f.rng_draws;
      if (++f.walk_steps > walk_budget) {
        throw NumericalError("forest sampler exceeded its walk budget of " + std::to_string(walk_budget) +
                             " steps");
      }
      next[u] = mass < q[u] ? kAbsorbed : g.neighbor_at_mass(u, mass - q[u]);
      u = next[u];
    }
    // Walk terminated at u (absorbed, or a vertex already in the forest).
    Vertex root = kAbsorbed;
    if (u != kAbsorbed) {
      root = f.root_of[u];
    } else {
      Vertex v = start;
      while (next[v] != kAbsorbed) v = next[v];
      root = v;
    }
    for (Vertex v = start; v != kAbsorbed && !in_forest[v]; v = next[v]) {
      in_forest[v] = true;
      f.root_of[v] = root;
      f.parent[v] = next[v] == kAbsorbed ? v : next[v];
    }
  }
  detail::build_partition(f);
  return f;
}

/// Checks the structural invariants of a forest drawn on g. Returns an empty
/// string when valid, otherwise a description of the first violation.
inline std::string validate_forest(const Graph& g, const RootedForest& f) {
  const std::size_t n = g.num_vertices();
  if (f.root_of.size() != n || f.parent.size() != n) return "size mismatch";
  for (Vertex v = 0; v < n; ++v) {
    Vertex p = f.parent[v];
    if (p >= n) return "dangling parent at " + std::to_string(v);
    if (p == v) {
      if (f.root_of[v] != v) return "root " + std::to_string(v) + " is not its own root";
      continue;
    }
    bool adjacent = false;
    for (Vertex j : g.neighbors(v)) adjacent = adjacent || j == p;
    if (!adjacent) return "parent of " + std::to_string(v) + " is not a neighbour";
    if (f.root_of[p] != f.root_of[v]) return "parent of " + std::to_string(v) + " lies in another tree";
  }
  // Following parents must reach the root within n steps (no cycles).
  for (Vertex v = 0; v < n; ++v) {
    Vertex u = v;
    std::size_t steps = 0;
    while (f.parent[u] != u && steps <= n) {
      u = f.parent[u];
      ++steps;
    }
    if (u != f.root_of[v]) return "vertex " + std::to_string(v) + " does not reach its root";
  }
  std::vector<int> covered(n, 0);
  for (const auto& t : f.trees) {
    if (f.root_of[t.root] != t.root) return "tree root mismatch";
    for (Vertex v : t.vertices) {
      ++covered[v];
      if (f.root_of[v] != t.root) return "tree membership mismatch at " + std::to_string(v);
    }
  }
  for (Vertex v = 0; v < n; ++v) {
    if (covered[v] != 1) return "trees do not partition the vertex set at " + std::to_string(v);
  }
  return {};
}

/// Debug dump: "vertex root" per line.
inline void write_forest(std::ostream& out, const RootedForest& f) {
  for (Vertex v = 0; v < f.size(); ++v) out << v << ' ' << f.root_of[v] << '\n';
}

}  // namespace forestgd
