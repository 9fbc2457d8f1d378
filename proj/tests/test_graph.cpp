#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <array>
#include <cstdio>
#include <filesystem>

#include "gsign/graph.hpp"

using namespace gsign;

namespace {

Graph triangle_plus_leaf() {
  // 0-1-2 triangle with weights, node 3 hanging off node 2
  Graph g;
  g.n_nodes = 4;
  g.edges = {{0, 1, 2.0}, {0, 2, 1.0}, {1, 2, 0.5}, {2, 3, 3.0}};
  return g;
}

}  // namespace

TEST_CASE("laplacian of a hand-checked graph") {
  const Graph g = triangle_plus_leaf();
  const Matrix l = build_laplacian(g);
  REQUIRE(l.rows() == 4);
  // degrees
  CHECK(l(0, 0) == doctest::Approx(3.0));
  CHECK(l(1, 1) == doctest::Approx(2.5));
  CHECK(l(2, 2) == doctest::Approx(4.5));
  CHECK(l(3, 3) == doctest::Approx(3.0));
  // off-diagonal = -weight, symmetric
  CHECK(l(0, 1) == doctest::Approx(-2.0));
  CHECK(l(1, 0) == doctest::Approx(-2.0));
  CHECK(l(2, 3) == doctest::Approx(-3.0));
  CHECK(l(0, 3) == doctest::Approx(0.0));
  // rows sum to zero
  for (std::size_t i = 0; i < 4; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < 4; ++j) s += l(i, j);
    CHECK(s == doctest::Approx(0.0).epsilon(1e-15));
  }
}

TEST_CASE("adjacency matches the edge list") {
  const Matrix a = adjacency_matrix(triangle_plus_leaf());
  CHECK(a(0, 1) == doctest::Approx(2.0));
  CHECK(a(1, 0) == doctest::Approx(2.0));
  CHECK(a(1, 3) == doctest::Approx(0.0));
  CHECK(a(0, 0) == doctest::Approx(0.0));
}

TEST_CASE("graph validation catches invariant breaches") {
  Graph g = triangle_plus_leaf();
  CHECK_NOTHROW(g.validate());
  g.edges.push_back({2, 2, 1.0});
  CHECK_THROWS(g.validate());
  g = triangle_plus_leaf();
  g.edges.push_back({3, 1, 1.0});  // stored with i > j
  CHECK_THROWS(g.validate());
  g = triangle_plus_leaf();
  g.edges[0].weight = -1.0;
  CHECK_THROWS(g.validate());
  g = triangle_plus_leaf();
  g.edges[0].j = 7;  // out of range
  CHECK_THROWS(g.validate());
}

TEST_CASE("knn graph on hand-placed points") {
  // Collinear points at 0, 1, 2.5, 3.0: with k = 1, each picks its nearest;
  // symmetrized union gives {0-1, 2-3} plus 1's nearest is 0, 2's is 3.
  const std::array<double, 2> pts[] = {{0.0, 0.0}, {1.0, 0.0}, {2.5, 0.0}, {3.0, 0.0}};
  const Graph g = knn_geographic_graph(pts, 1);
  REQUIRE(g.n_nodes == 4);
  REQUIRE(g.edges.size() == 2);
  CHECK(g.edges[0].i == 0);
  CHECK(g.edges[0].j == 1);
  CHECK(g.edges[1].i == 2);
  CHECK(g.edges[1].j == 3);
  CHECK(g.edges[0].weight == doctest::Approx(1.0));
  CHECK(connected_components(g) == 2);
  CHECK_FALSE(is_connected(g));
}

TEST_CASE("knn ties break toward the lower node index") {
  // Node 0 equidistant from 1 and 2; k = 1 must pick node 1.
  const std::array<double, 2> pts[] = {{0.0, 0.0}, {1.0, 0.0}, {-1.0, 0.0}, {5.0, 0.0}};
  const Graph g = knn_geographic_graph(pts, 1);
  bool has01 = false, has02 = false;
  for (const Edge& e : g.edges) {
    if (e.i == 0 && e.j == 1) has01 = true;
    if (e.i == 0 && e.j == 2) has02 = true;
  }
  CHECK(has01);
  // 2 still selects 0 as its own nearest, so 0-2 appears via symmetrization
  CHECK(has02);
}

TEST_CASE("random sensor graph invariants") {
  for (std::uint64_t seed : {1ull, 2ull, 99ull}) {
    const Graph g = random_sensor_graph(50, seed);
    CHECK_NOTHROW(g.validate());
    CHECK(g.n_nodes == 50);
    CHECK(g.coords.size() == 50);
    CHECK(is_connected(g));
    for (const Edge& e : g.edges) {
      CHECK(e.weight > 0.0);
      CHECK(e.weight <= 1.0);  // Gaussian kernel of a positive distance
    }
    for (const auto& c : g.coords) {
      CHECK(c[0] >= 0.0);
      CHECK(c[0] <= 1.0);
      CHECK(c[1] >= 0.0);
      CHECK(c[1] <= 1.0);
    }
  }
  // same seed, same graph
  const Graph a = random_sensor_graph(30, 7);
  const Graph b = random_sensor_graph(30, 7);
  REQUIRE(a.edges.size() == b.edges.size());
  for (std::size_t i = 0; i < a.edges.size(); ++i) {
    CHECK(a.edges[i].i == b.edges[i].i);
    CHECK(a.edges[i].j == b.edges[i].j);
    CHECK(a.edges[i].weight == b.edges[i].weight);
  }
}

TEST_CASE("connected components on disjoint triangles") {
  Graph g;
  g.n_nodes = 6;
  g.edges = {{0, 1, 1}, {0, 2, 1}, {1, 2, 1}, {3, 4, 1}, {3, 5, 1}, {4, 5, 1}};
  CHECK(connected_components(g) == 2);
  g.edges.push_back({2, 3, 1});
  CHECK(connected_components(g) == 1);
  CHECK(is_connected(g));
}

TEST_CASE("edge list file roundtrip") {
  const auto path = std::filesystem::temp_directory_path() / "gsign_edges_test.txt";
  const Graph g = triangle_plus_leaf();
  save_edge_list(g, path.string());
  const Graph r = load_edge_list(path.string());
  REQUIRE(r.n_nodes == g.n_nodes);
  REQUIRE(r.edges.size() == g.edges.size());
  for (std::size_t i = 0; i < g.edges.size(); ++i) {
    CHECK(r.edges[i].i == g.edges[i].i);
    CHECK(r.edges[i].j == g.edges[i].j);
    CHECK(r.edges[i].weight == doctest::Approx(g.edges[i].weight));
  }
  std::filesystem::remove(path);
}

TEST_CASE("edge list parser: comments, default weights, duplicates") {
  const auto path = std::filesystem::temp_directory_path() / "gsign_edges_parse.txt";
  {
    std::FILE* f = std::fopen(path.string().c_str(), "w");
    std::fputs("# comment line\n0 1 2.5\n\n2 1\n1 0 2.5\n", f);
    std::fclose(f);
  }
  const Graph g = load_edge_list(path.string());
  CHECK(g.n_nodes == 3);
  REQUIRE(g.edges.size() == 2);  // duplicate 0-1 collapsed
  CHECK(g.edges[0].weight == doctest::Approx(2.5));
  CHECK(g.edges[1].weight == doctest::Approx(1.0));  // default weight
  std::filesystem::remove(path);
}

TEST_CASE("coords csv roundtrip") {
  const auto path = std::filesystem::temp_directory_path() / "gsign_coords_test.csv";
  const std::vector<std::array<double, 2>> coords = {
      {0.25, 0.5}, {1.0 / 3.0, 0.123456789012345}, {-7.5, 42.0}};
  save_coords_csv(coords, path.string());
  const auto r = load_coords_csv(path.string());
  REQUIRE(r.size() == coords.size());
  for (std::size_t i = 0; i < coords.size(); ++i) {
    CHECK(r[i][0] == doctest::Approx(coords[i][0]).epsilon(1e-15));
    CHECK(r[i][1] == doctest::Approx(coords[i][1]).epsilon(1e-15));
  }
  std::filesystem::remove(path);
}
