#include <gtest/gtest.h>

#include <boost/math/distributions/chi_squared.hpp>
#include <map>
#include <sstream>

#include "forestgd/forest.hpp"
#include "forestgd/forest_enumeration.hpp"
#include "test_support.hpp"

namespace forestgd {
namespace {

std::uint32_t edge_mask_of(const Graph& g, const RootedForest& f) {
  std::uint32_t mask = 0;
  auto edges = g.edges();
  for (Vertex v = 0; v < f.size(); ++v) {
    if (f.parent[v] == v) continue;
    const Vertex a = std::min(v, f.parent[v]);
    const Vertex b = std::max(v, f.parent[v]);
    for (std::size_t e = 0; e < edges.size(); ++e) {
      if (edges[e].u == a && edges[e].v == b) mask |= std::uint32_t{1} << e;
    }
  }
  return mask;
}

// Pearson chi-square p-value of sampled edge-set frequencies against the
// enumerated law.
double chi_square_p_value(const Graph& g, std::span<const double> q, std::size_t draws, std::uint64_t seed) {
  auto dist = enumerate_forests(g, q);
  std::vector<double> observed(dist.families.size(), 0.0);
  for (std::size_t i = 0; i < draws; ++i) {
    auto rng = substream(seed, i);
    auto f = sample_forest(g, q, rng);
    auto idx = dist.find(edge_mask_of(g, f));
    EXPECT_LT(idx, dist.families.size());
    observed[idx] += 1.0;
  }
  double stat = 0.0;
  for (std::size_t k = 0; k < observed.size(); ++k) {
    const double expected = dist.families[k].probability * static_cast<double>(draws);
    stat += (observed[k] - expected) * (observed[k] - expected) / expected;
  }
  boost::math::chi_squared chi(static_cast<double>(observed.size() - 1));
  return boost::math::cdf(boost::math::complement(chi, stat));
}

TEST(EnumerateForests, PathOfThree) {
  auto g = testing::path_graph(3);
  const Vector q(3, 1.0);
  auto d = enumerate_forests(g, q);
  ASSERT_EQ(d.families.size(), 4u);
  EXPECT_EQ(d.rooted_forest_count(), 8u);
  EXPECT_NEAR(d.normalizer, 8.0, 1e-12);
  EXPECT_NEAR(d.determinant, 8.0, 1e-12);
  // edges() = {(0,1), (1,2)}: empty 1/8, {01} 2/8, {12} 2/8, tree 3/8.
  EXPECT_NEAR(d.families[d.find(0b00)].probability, 1.0 / 8, 1e-15);
  EXPECT_NEAR(d.families[d.find(0b01)].probability, 2.0 / 8, 1e-15);
  EXPECT_NEAR(d.families[d.find(0b10)].probability, 2.0 / 8, 1e-15);
  EXPECT_NEAR(d.families[d.find(0b11)].probability, 3.0 / 8, 1e-15);
}

TEST(EnumerateForests, SingleEdge) {
  auto d = enumerate_forests(testing::path_graph(2), Vector{1.0, 1.0});
  EXPECT_EQ(d.rooted_forest_count(), 3u);
  EXPECT_NEAR(d.normalizer, 3.0, 1e-12);
}

TEST(EnumerateForests, Triangle) {
  auto d = enumerate_forests(testing::cycle_graph(3), Vector(3, 1.0));
  EXPECT_EQ(d.families.size(), 7u);
  EXPECT_NEAR(d.normalizer, 16.0, 1e-12);
}

TEST(EnumerateForests, MatrixForestIdentityOnCorpus) {
  std::uint64_t seed = 0;
  for (const auto& g : testing::tiny_corpus()) {
    auto rng = substream(99, seed++);
    std::uniform_real_distribution<double> u(0.2, 3.0);
    Vector q(g.num_vertices());
    for (auto& x : q) x = u(rng);
    auto d = enumerate_forests(g, q);
    EXPECT_NEAR(d.normalizer, d.determinant, 1e-9 * d.determinant);
    double total = 0.0;
    for (const auto& f : d.families) total += f.probability;
    EXPECT_NEAR(total, 1.0, 1e-12);
  }
}

TEST(EnumerateForests, SizeLimit) {
  EXPECT_THROW(enumerate_forests(testing::path_graph(10), Vector(10, 1.0)), SizeLimitError);
}

TEST(SampleForest, PartitionInvariantsHold) {
  for (std::uint64_t s = 0; s < 20; ++s) {
    auto g = testing::random_connected(60, 1.0, s);
    for (double q : {0.05, 1.0, 20.0}) {
      const Vector qs(60, q);
      for (std::uint64_t i = 0; i < 10; ++i) {
        auto rng = substream(s, i);
        auto f = sample_forest(g, qs, rng);
        EXPECT_EQ(validate_forest(g, f), "");
        EXPECT_GE(f.walk_steps, 60u);
      }
    }
  }
}

TEST(SampleForest, Deterministic) {
  auto g = testing::random_connected(80, 1.0, 3);
  const Vector q(80, 0.5);
  auto r1 = substream(5, 17);
  auto r2 = substream(5, 17);
  auto a = sample_forest(g, q, r1);
  auto b = sample_forest(g, q, r2);
  EXPECT_EQ(a.root_of, b.root_of);
  EXPECT_EQ(a.parent, b.parent);
}

TEST(SampleForest, HugeAbsorptionGivesSingletons) {
  auto g = testing::random_connected(50, 1.0, 2);
  const Vector q(50, 1e9);
  auto rng = substream(1, 0);
  auto f = sample_forest(g, q, rng);
  EXPECT_EQ(f.trees.size(), 50u);
}

TEST(SampleForest, SingleVertex) {
  auto g = testing::single_vertex();
  auto rng = substream(1, 0);
  auto f = sample_forest(g, Vector{0.3}, rng);
  ASSERT_EQ(f.trees.size(), 1u);
  EXPECT_EQ(f.root_of[0], 0u);
}

TEST(SampleForest, WalkBudget) {
  auto g = testing::path_graph(50);
  auto rng = substream(1, 0);
  EXPECT_THROW(sample_forest(g, Vector(50, 1e-6), rng, 10), NumericalError);
}

TEST(SampleForest, LawMatchesEnumerationOnPathAndTriangle) {
  EXPECT_GT(chi_square_p_value(testing::path_graph(3), Vector(3, 1.0), 100000, 1), 0.001);
  EXPECT_GT(chi_square_p_value(testing::cycle_graph(3), Vector(3, 1.0), 100000, 2), 0.001);
}

TEST(SampleForest, LawMatchesEnumerationWithWeightsAndNodeAbsorption) {
  auto g = testing::random_connected(5, 0.6, 77);
  EXPECT_GT(chi_square_p_value(g, Vector{0.3, 1.0, 2.0, 0.5, 1.5}, 100000, 3), 0.001);
  EXPECT_GT(chi_square_p_value(testing::star_graph(3), Vector{0.5, 2.0, 1.0, 0.25}, 100000, 4), 0.001);
}

TEST(SampleForest, DumpFormat) {
  auto g = testing::path_graph(3);
  auto rng = substream(0, 0);
  auto f = sample_forest(g, Vector(3, 1.0), rng);
  std::ostringstream out;
  write_forest(out, f);
  std::istringstream in(out.str());
  Vertex v = 0, r = 0;
  std::size_t lines = 0;
  while (in >> v >> r) {
    EXPECT_EQ(r, f.root_of[v]);
    ++lines;
  }
  EXPECT_EQ(lines, 3u);
}

}  // namespace
}  // namespace forestgd
