#include "gsign/graph.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

namespace gsign {

namespace {

struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(int a, int b) { parent[find(a)] = find(b); }
};

double dist2(const std::array<double, 2>& a, const std::array<double, 2>& b) {
  const double dx = a[0] - b[0];
  const double dy = a[1] - b[1];
  return dx * dx + dy * dy;
}

// k nearest neighbors of node i, ties broken by lower index.
std::vector<int> knn_of(std::span<const std::array<double, 2>> coords, int i, int k) {
  const int n = static_cast<int>(coords.size());
  std::vector<int> idx;
  idx.reserve(n - 1);
  for (int j = 0; j < n; ++j)
    if (j != i) idx.push_back(j);
  std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) {
    const double da = dist2(coords[i], coords[a]);
    const double db = dist2(coords[i], coords[b]);
    if (da != db) return da < db;
    return a < b;
  });
  idx.resize(k);
  return idx;
}

}  // namespace

void Graph::validate() const {
  if (n_nodes <= 0) throw std::invalid_argument("graph: n_nodes must be positive");
  for (const Edge& e : edges) {
    if (e.i == e.j) throw std::invalid_argument("graph: self-loop");
    if (e.i > e.j) throw std::invalid_argument("graph: edge stored with i > j");
    if (e.i < 0 || e.j < 0 || e.i >= n_nodes || e.j >= n_nodes)
      throw std::invalid_argument("graph: edge endpoint out of range");
    if (!(e.weight >= 0.0)) throw std::invalid_argument("graph: negative edge weight");
  }
  if (!coords.empty() && static_cast<int>(coords.size()) != n_nodes)
    throw std::invalid_argument("graph: coords size mismatch");
}

Matrix adjacency_matrix(const Graph& g) {
  g.validate();
  Matrix a(g.n_nodes, g.n_nodes);
  for (const Edge& e : g.edges) {
    a(e.i, e.j) = e.weight;
    a(e.j, e.i) = e.weight;
  }
  return a;
}

Matrix build_laplacian(const Graph& g) {
  Matrix l = adjacency_matrix(g);
  const std::size_t n = l.rows();
  for (std::size_t i = 0; i < n; ++i) {
    double degree = 0.0;
    for (std::size_t j = 0; j < n; ++j) degree += l(i, j);
    for (std::size_t j = 0; j < n; ++j) l(i, j) = -l(i, j);
    l(i, i) = degree;
  }
  return l;
}

Graph knn_geographic_graph(std::span<const std::array<double, 2>> coords, int k) {
  const int n = static_cast<int>(coords.size());
  if (k <= 0 || k >= n) throw std::invalid_argument("knn graph: need 0 < k < n_nodes");
  for (const auto& c : coords)
    if (!std::isfinite(c[0]) || !std::isfinite(c[1]))
      throw std::invalid_argument("knn graph: nonfinite coordinate");

  std::vector<std::pair<int, int>> pairs;
  for (int i = 0; i < n; ++i)
    for (int j : knn_of(coords, i, k)) pairs.emplace_back(std::min(i, j), std::max(i, j));
  std::sort(pairs.begin(), pairs.end());
  pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());

  Graph g;
  g.n_nodes = n;
  g.coords.assign(coords.begin(), coords.end());
  for (auto [i, j] : pairs) g.edges.push_back({i, j, 1.0});
  g.validate();
  return g;
}

Graph random_sensor_graph(int n, std::uint64_t seed) {
  if (n < 2) throw std::invalid_argument("sensor graph: need n >= 2");
  const int k = std::min(6, n - 1);
  std::mt19937_64 eng(seed);
  auto uniform = [&eng] {
    return static_cast<double>(eng() >> 11) * 0x1.0p-53;
  };

  for (int attempt = 0; attempt < 100; ++attempt) {
    std::vector<std::array<double, 2>> coords(n);
    for (auto& c : coords) {
      c[0] = uniform();
      c[1] = uniform();
    }
    Graph g = knn_geographic_graph(coords, k);

    // sigma = mean distance over all directed k-NN relations
    double dist_sum = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j : knn_of(coords, i, k)) dist_sum += std::sqrt(dist2(coords[i], coords[j]));
    const double sigma = dist_sum / (static_cast<double>(n) * k);

    for (Edge& e : g.edges) {
      const double d2 = dist2(coords[e.i], coords[e.j]);
      e.weight = std::exp(-d2 / (2.0 * sigma * sigma));
    }
    if (is_connected(g)) return g;
  }
  throw std::runtime_error("sensor graph: no connected placement after 100 attempts");
}

int connected_components(const Graph& g) {
  g.validate();
  UnionFind uf(g.n_nodes);
  for (const Edge& e : g.edges) uf.unite(e.i, e.j);
  int count = 0;
  for (int i = 0; i < g.n_nodes; ++i)
    if (uf.find(i) == i) ++count;
  return count;
}

bool is_connected(const Graph& g) { return connected_components(g) == 1; }

Graph load_edge_list(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open edge list: " + path);
  Graph g;
  int max_node = -1;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ss(line);
    int i, j;
    double w;
    if (!(ss >> i >> j)) continue;  // blank or comment-only line
    if (!(ss >> w)) w = 1.0;
    if (i == j)
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": self-loop");
    g.edges.push_back({std::min(i, j), std::max(i, j), w});
    max_node = std::max({max_node, i, j});
  }
  g.n_nodes = max_node + 1;
  // Collapse duplicates from files listing both directions.
  std::sort(g.edges.begin(), g.edges.end(), [](const Edge& a, const Edge& b) {
    return std::tie(a.i, a.j) < std::tie(b.i, b.j);
  });
  g.edges.erase(std::unique(g.edges.begin(), g.edges.end(),
                            [](const Edge& a, const Edge& b) {
                              return a.i == b.i && a.j == b.j;
                            }),
                g.edges.end());
  g.validate();
  return g;
}

void save_edge_list(const Graph& g, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write edge list: " + path);
  out << "# i j weight\n";
  out.precision(17);
  for (const Edge& e : g.edges) out << e.i << ' ' << e.j << ' ' << e.weight << '\n';
}

std::vector<std::array<double, 2>> load_coords_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open coords csv: " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("coords csv empty: " + path);
  std::vector<std::array<double, 2>> coords;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string node, xs, ys;
    if (!std::getline(ss, node, ',') || !std::getline(ss, xs, ',') ||
        !std::getline(ss, ys, ','))
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": bad row");
    coords.push_back({std::stod(xs), std::stod(ys)});
  }
  return coords;
}

void save_coords_csv(std::span<const std::array<double, 2>> coords,
                     const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write coords csv: " + path);
  out << "node,x,y\n";
  out.precision(17);
  for (std::size_t i = 0; i < coords.size(); ++i)
    out << i << ',' << coords[i][0] << ',' << coords[i][1] << '\n';
}

}  // namespace gsign
