#include "sage/graph.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <queue>
#include <string>

#include "sage/errors.hpp"

namespace sage {

Graph::Graph(std::size_t n_vertices, std::vector<Edge> edges, std::vector<Point> coordinates)
    : n_(n_vertices), edges_(std::move(edges)), adjacency_(n_vertices), coordinates_(std::move(coordinates)) {
  if (!coordinates_.empty() && coordinates_.size() != n_) {
    throw ConfigError("graph coordinates do not match vertex count");
  }
  for (auto& e : edges_) {
    if (e.u >= n_ || e.v >= n_) {
      throw ConfigError("edge endpoint out of range: " + std::to_string(e.u + 1) + " " + std::to_string(e.v + 1));
    }
    if (e.u == e.v) throw ConfigError("self loop at vertex " + std::to_string(e.u + 1));
    if (e.u > e.v) std::swap(e.u, e.v);
  }
  std::sort(edges_.begin(), edges_.end());
  if (std::adjacent_find(edges_.begin(), edges_.end()) != edges_.end()) {
    throw ConfigError("duplicate edge");
  }
  for (const auto& e : edges_) {
    adjacency_[e.u].push_back(e.v);
    adjacency_[e.v].push_back(e.u);
  }
  for (auto& list : adjacency_) std::sort(list.begin(), list.end());
}

bool Graph::has_edge(std::size_t u, std::size_t v) const {
  if (u >= n_ || v >= n_) return false;
  const auto& list = adjacency_[u];
  return std::binary_search(list.begin(), list.end(), v);
}

bool Graph::connected() const {
  if (n_ <= 1) return true;
  std::vector<char> seen(n_, 0);
  std::queue<std::size_t> frontier;
  frontier.push(0);
  seen[0] = 1;
  std::size_t reached = 1;
  while (!frontier.empty()) {
    const auto v = frontier.front();
    frontier.pop();
    for (auto w : adjacency_[v]) {
      if (!seen[w]) {
        seen[w] = 1;
        ++reached;
        frontier.push(w);
      }
    }
  }
  return reached == n_;
}

Graph random_geometric(std::size_t n, double radius, std::uint64_t seed) {
  if (n == 0) throw ConfigError("random geometric graph needs at least one vertex");
  if (!(radius > 0.0)) throw ConfigError("random geometric radius must be positive");
  Rng rng(seed);
  std::vector<Point> pts(n);
  for (auto& p : pts) {
    p.x = rng.uniform();
    p.y = rng.uniform();
  }
  const double r2 = radius * radius;
  std::vector<Edge> edges;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double dx = pts[i].x - pts[j].x;
      const double dy = pts[i].y - pts[j].y;
      if (dx * dx + dy * dy <= r2) edges.push_back({i, j});
    }
  }
  return Graph(n, std::move(edges), std::move(pts));
}

Graph complete_graph(std::size_t n) {
  std::vector<Edge> edges;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) edges.push_back({i, j});
  return Graph(n, std::move(edges));
}

NetworkModel::NetworkModel(Graph base, double link_failure_prob)
    : base_(std::move(base)), p_(link_failure_prob) {
  if (!(p_ >= 0.0 && p_ <= 1.0)) throw ConfigError("link failure probability must lie in [0, 1]");
}

Graph NetworkModel::sample_instance(Rng& rng) const {
  if (p_ == 0.0) return base_;
  if (p_ == 1.0) return Graph(base_.size());
  std::vector<Edge> kept;
  kept.reserve(base_.edge_count());
  for (const auto& e : base_.edges()) {
    if (!rng.bernoulli(p_)) kept.push_back(e);
  }
  return Graph(base_.size(), std::move(kept));
}

Eigen::MatrixXd NetworkModel::mean_laplacian() const {
  return (1.0 - p_) * laplacian(base_);
}

IntMatrix integer_laplacian(const Graph& g) {
  const auto n = static_cast<Eigen::Index>(g.size());
  IntMatrix L = IntMatrix::Zero(n, n);
  for (const auto& e : g.edges()) {
    const auto u = static_cast<Eigen::Index>(e.u);
    const auto v = static_cast<Eigen::Index>(e.v);
    L(u, v) -= 1;
    L(v, u) -= 1;
    L(u, u) += 1;
    L(v, v) += 1;
  }
  return L;
}

Eigen::MatrixXd laplacian(const Graph& g) {
  return integer_laplacian(g).cast<double>();
}

namespace {

Eigen::VectorXd sorted_eigenvalues(const Eigen::MatrixXd& sym) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(sym, Eigen::EigenvaluesOnly);
  return solver.eigenvalues();  // ascending
}

}  // namespace

double algebraic_connectivity(const Eigen::MatrixXd& L) {
  if (L.rows() < 2) return 0.0;
  return sorted_eigenvalues(L)(1);
}

double max_laplacian_eigenvalue(const Eigen::MatrixXd& L) {
  if (L.rows() == 0) return 0.0;
  return std::max(0.0, sorted_eigenvalues(L)(L.rows() - 1));
}

void write_edge_list(std::ostream& out, const Graph& g) {
  out << g.size() << ' ' << g.edge_count() << '\n';
  for (const auto& e : g.edges()) out << e.u + 1 << ' ' << e.v + 1 << '\n';
}

Graph read_edge_list(std::istream& in) {
  long long n = -1, m = -1;
  if (!(in >> n >> m) || n < 1 || m < 0) throw ConfigError("edge list: expected header \"N E\"");
  std::vector<Edge> edges;
  edges.reserve(static_cast<std::size_t>(m));
  for (long long i = 0; i < m; ++i) {
    long long u = 0, v = 0;
    if (!(in >> u >> v)) throw ConfigError("edge list: expected " + std::to_string(m) + " edges");
    if (u < 1 || v < 1 || u > n || v > n) throw ConfigError("edge list: vertex out of range on edge " + std::to_string(i + 1));
    edges.push_back({static_cast<std::size_t>(u - 1), static_cast<std::size_t>(v - 1)});
  }
  return Graph(static_cast<std::size_t>(n), std::move(edges));
}

}  // namespace sage
