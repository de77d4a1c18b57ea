#include <gtest/gtest.h>

#include <numeric>
#include <sstream>

#include "forestgd/generators.hpp"
#include "forestgd/graph.hpp"
#include "forestgd/graph_io.hpp"
#include "test_support.hpp"

namespace forestgd {
namespace {

Graph parse(const std::string& text) {
  std::istringstream in(text);
  return read_edge_list(in);
}

std::string parse_error(const std::string& text) {
  try {
    parse(text);
  } catch (const DataError& e) {
    return e.what();
  }
  return {};
}

TEST(LoadGraph, SmallestPath) {
  auto g = parse("0 1\n1 2");
  EXPECT_EQ(g.num_vertices(), 3u);
  EXPECT_EQ(g.num_edges(), 2u);
  for (const auto& e : g.edges()) EXPECT_EQ(e.w, 1.0);
}

TEST(LoadGraph, CommentsAndWeights) {
  auto g = parse("# header\n0 1 2.5  # trailing\n\n1 2 0.25\n");
  EXPECT_EQ(g.num_edges(), 2u);
  EXPECT_DOUBLE_EQ(g.degree(1), 2.75);
}

TEST(LoadGraph, RejectsDuplicateUndirectedEdge) {
  auto msg = parse_error("0 1 2.0\n1 0 2.0");
  EXPECT_NE(msg.find("duplicate"), std::string::npos);
  EXPECT_NE(msg.find("line 2"), std::string::npos);
}

TEST(LoadGraph, RejectsDisconnected) {
  auto msg = parse_error("0 1\n2 3");
  EXPECT_NE(msg.find("2 connected components"), std::string::npos) << msg;
}

TEST(LoadGraph, RejectsBadInput) {
  EXPECT_NE(parse_error("0 1\n1 x\n").find("line 2"), std::string::npos);
  EXPECT_NE(parse_error("0 1 -1\n").find("nonpositive"), std::string::npos);
  EXPECT_NE(parse_error("0 1 0\n").find("nonpositive"), std::string::npos);
  EXPECT_NE(parse_error("0 0\n").find("self-loop"), std::string::npos);
  EXPECT_NE(parse_error("0 2\n").find("not dense"), std::string::npos);
  EXPECT_FALSE(parse_error("").empty());
}

TEST(Degrees, SmallGraphs) {
  auto p3 = testing::path_graph(3);
  auto d = degrees_and_dmax(p3);
  EXPECT_EQ(d.degrees, (std::vector<double>{1, 2, 1}));
  EXPECT_EQ(d.d_max, 2.0);
  EXPECT_EQ(degrees_and_dmax(testing::cycle_graph(3)).degrees, (std::vector<double>{2, 2, 2}));
  EXPECT_EQ(degrees_and_dmax(testing::star_graph(4)).d_max, 4.0);
}

TEST(Graph, CsrIsSymmetric) {
  auto g = testing::random_connected(40, 1.5, 3);
  for (Vertex i = 0; i < g.num_vertices(); ++i) {
    auto nb = g.neighbors(i);
    auto ws = g.neighbor_weights(i);
    double sum = 0.0;
    for (std::size_t a = 0; a < nb.size(); ++a) {
      sum += ws[a];
      auto back = g.neighbors(nb[a]);
      auto bw = g.neighbor_weights(nb[a]);
      bool found = false;
      for (std::size_t b = 0; b < back.size(); ++b) found = found || (back[b] == i && bw[b] == ws[a]);
      EXPECT_TRUE(found);
    }
    EXPECT_NEAR(sum, g.degree(i), 1e-12 * sum);
  }
}

TEST(Graph, NeighborAtMassFollowsCumulativeWeights) {
  auto g = Graph::from_edges(3, std::vector<Edge>{{0, 1, 1.0}, {0, 2, 3.0}});
  EXPECT_EQ(g.neighbor_at_mass(0, 0.0), 1u);
  EXPECT_EQ(g.neighbor_at_mass(0, 0.999), 1u);
  EXPECT_EQ(g.neighbor_at_mass(0, 1.0), 2u);
  EXPECT_EQ(g.neighbor_at_mass(0, 3.999), 2u);
}

TEST(GraphIo, SaveLoadRoundTripIsExact) {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    auto g = testing::random_connected(30, 1.0, seed);
    std::ostringstream out;
    write_edge_list(out, g);
    std::istringstream in(out.str());
    auto back = read_edge_list(in);
    ASSERT_EQ(back, g);
    for (std::size_t e = 0; e < g.num_edges(); ++e) EXPECT_EQ(back.edges()[e].w, g.edges()[e].w);
  }
}

TEST(GraphIo, ReadSignalFormats) {
  std::istringstream plain("1.5\n-2\n3e1\n");
  EXPECT_EQ(read_signal(plain, 3), (std::vector<double>{1.5, -2.0, 30.0}));
  std::istringstream keyed("node,value\n2,3\n0,1\n1,2\n");
  EXPECT_EQ(read_signal(keyed, 3), (std::vector<double>{1, 2, 3}));
  std::istringstream shortfile("1\n2\n");
  EXPECT_THROW(read_signal(shortfile, 3), DataError);
  std::istringstream missing("0,1\n2,3\n");
  EXPECT_THROW(read_signal(missing, 3), DataError);
}

TEST(GraphIo, ReadCoordinates) {
  std::istringstream in("0.5,1\n2,3.25\n");
  auto pts = read_coordinates(in);
  ASSERT_EQ(pts.size(), 2u);
  EXPECT_EQ(pts[1].y, 3.25);
}

TEST(Generators, RegularThousandNodesDegreeTwenty) {
  auto g = gen_graph(model::Regular{20}, 1000, 7);
  EXPECT_EQ(g.num_vertices(), 1000u);
  EXPECT_EQ(g.num_edges(), 10000u);
  for (double d : g.degrees()) EXPECT_EQ(d, 20.0);
}

TEST(Generators, BarabasiAlbertThousandNodesKTen) {
  auto g = gen_graph(model::BarabasiAlbert{10}, 1000, 7);
  EXPECT_EQ(g.num_vertices(), 1000u);
  EXPECT_EQ(g.num_edges(), 9900u);
  // Broad degree distribution: the hubs are far above the mean degree ~19.8.
  EXPECT_GT(g.max_degree(), 60.0);
}

TEST(Generators, GridSquare) {
  auto g = gen_graph(model::Grid{2, 2}, 4, 0);
  EXPECT_EQ(g.num_vertices(), 4u);
  EXPECT_EQ(g.num_edges(), 4u);
}

TEST(Generators, KnnIsUnionSymmetrized) {
  auto pts = random_positions(60, 5);
  auto g = gen_graph(model::Knn{pts, 5}, 60, 0);
  EXPECT_EQ(g.num_vertices(), 60u);
  for (double d : g.degrees()) EXPECT_GE(d, 5.0);
  EXPECT_LE(g.num_edges(), 60u * 5u);
}

TEST(Generators, RejectsInfeasibleParameters) {
  EXPECT_THROW(gen_graph(model::Regular{3}, 5, 0), DataError);
  EXPECT_THROW(gen_graph(model::Regular{5}, 5, 0), DataError);
  EXPECT_THROW(gen_graph(model::BarabasiAlbert{10}, 10, 0), DataError);
  EXPECT_THROW(gen_graph(model::Grid{0, 3}, 0, 0), DataError);
  // Two far-apart clusters cannot be joined by a 1-NN graph.
  NodePositions split{{0, 0}, {0, 0.1}, {10, 10}, {10, 10.1}};
  EXPECT_THROW(gen_graph(model::Knn{split, 1}, 4, 0), DataError);
}

TEST(Generators, ReproducibleAndDegreeSumIdentity) {
  for (auto m : {GraphModel{model::Regular{4}}, GraphModel{model::BarabasiAlbert{3}}}) {
    auto a = gen_graph(m, 200, 42);
    auto b = gen_graph(m, 200, 42);
    EXPECT_EQ(a, b);
    auto c = gen_graph(m, 200, 43);
    EXPECT_FALSE(a == c);
    const double deg = std::accumulate(a.degrees().begin(), a.degrees().end(), 0.0);
    double w = 0.0;
    for (const auto& e : a.edges()) w += e.w;
    EXPECT_NEAR(deg, 2.0 * w, 1e-9);
  }
}

TEST(Generators, CliquesJoinedInChain) {
  const model::Cliques c{2, 20};
  const auto g = gen_graph(c, 0, 0);
  EXPECT_EQ(g, forestgd::testing::two_cliques(20));
  const auto member = clique_membership(c);
  ASSERT_EQ(member.size(), 40u);
  EXPECT_EQ(member[19], 0);
  EXPECT_EQ(member[20], 1);

  const auto three = gen_graph(model::Cliques{3, 4}, 0, 0);
  EXPECT_EQ(three.num_edges(), 3u * 6u + 2u);
}

}  // namespace
}  // namespace forestgd
