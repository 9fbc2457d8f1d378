#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "gsign/matrix.hpp"

namespace gsign {

struct Edge {
  int i = 0;
  int j = 0;
  double weight = 1.0;
};

// Undirected graph. Each edge is stored once with i < j and stands for both
// directions; weights are nonnegative, self-loops are rejected on validation.
struct Graph {
  int n_nodes = 0;
  std::vector<Edge> edges;
  std::vector<std::array<double, 2>> coords;  // empty when not geometric

  void validate() const;  // throws std::invalid_argument on invariant breach
};

Matrix adjacency_matrix(const Graph& g);

// L = D - A with D the (weighted) degree diagonal.
Matrix build_laplacian(const Graph& g);

// Connect each node to its k nearest neighbors by Euclidean distance and
// symmetrize (edge kept if either endpoint selects it). Unweighted.
// Ties are broken by lower node index.
Graph knn_geographic_graph(std::span<const std::array<double, 2>> coords, int k);

// n nodes uniform in the unit square, 6-NN symmetrized, Gaussian kernel
// weights exp(-d^2 / (2 sigma^2)) with sigma the mean k-NN distance.
// Placement is resampled (up to 100 attempts) until the graph is connected.
Graph random_sensor_graph(int n, std::uint64_t seed);

bool is_connected(const Graph& g);
int connected_components(const Graph& g);

// Plain-text edge list: one "i j weight" per line, 0-based, '#' comments.
Graph load_edge_list(const std::string& path);
void save_edge_list(const Graph& g, const std::string& path);

// CSV with header "node,x,y" (or "node,lat,lon").
std::vector<std::array<double, 2>> load_coords_csv(const std::string& path);
void save_coords_csv(std::span<const std::array<double, 2>> coords,
                     const std::string& path);

}  // namespace gsign
