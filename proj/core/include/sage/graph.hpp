#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <vector>

#include <Eigen/Dense>

#include "sage/rng.hpp"

namespace sage {

/// Vertices are 0-based in memory and 1-based in every text format.
struct Edge {
  std::size_t u;
  std::size_t v;
  friend bool operator==(const Edge&, const Edge&) = default;
  friend auto operator<=>(const Edge&, const Edge&) = default;
};

struct Point {
  double x;
  double y;
};

/// λ2 above this value counts as connected.
inline constexpr double kConnectivityThreshold = 1e-9;

/// Simple undirected graph: no self loops, no parallel edges.
class Graph {
 public:
  Graph() = default;
  /// Edges are stored with u < v and sorted. Throws ConfigError on an
  /// out-of-range endpoint, a self loop, or a duplicate edge.
  explicit Graph(std::size_t n_vertices, std::vector<Edge> edges = {},
                 std::vector<Point> coordinates = {});

  std::size_t size() const noexcept { return n_; }
  std::size_t edge_count() const noexcept { return edges_.size(); }
  const std::vector<Edge>& edges() const noexcept { return edges_; }
  const std::vector<std::size_t>& neighbors(std::size_t v) const { return adjacency_.at(v); }
  std::size_t degree(std::size_t v) const { return adjacency_.at(v).size(); }

  /// Placement used to build a geometric graph; empty for explicit graphs.
  const std::vector<Point>& coordinates() const noexcept { return coordinates_; }

  bool has_edge(std::size_t u, std::size_t v) const;

  /// Breadth-first search connectivity (a graph with at most one vertex is connected).
  bool connected() const;

 private:
  std::size_t n_ = 0;
  std::vector<Edge> edges_;
  std::vector<std::vector<std::size_t>> adjacency_;
  std::vector<Point> coordinates_;
};

/// n points uniform in the unit square; an edge joins every pair at
/// Euclidean distance <= radius. The result may be disconnected.
Graph random_geometric(std::size_t n, double radius, std::uint64_t seed);

Graph complete_graph(std::size_t n);

/// Base graph plus i.i.d. per-iteration link failures.
class NetworkModel {
 public:
  NetworkModel(Graph base, double link_failure_prob);

  const Graph& base() const noexcept { return base_; }
  double link_failure_prob() const noexcept { return p_; }

  /// Keeps every base edge independently with probability 1 - p.
  Graph sample_instance(Rng& rng) const;

  /// Expected Laplacian, (1 - p) L(base).
  Eigen::MatrixXd mean_laplacian() const;

 private:
  Graph base_;
  double p_;
};

using IntMatrix = Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic>;

/// L = D - A.
Eigen::MatrixXd laplacian(const Graph& g);
IntMatrix integer_laplacian(const Graph& g);

/// Second smallest eigenvalue; 0 for graphs with fewer than two vertices.
double algebraic_connectivity(const Eigen::MatrixXd& laplacian);
double max_laplacian_eigenvalue(const Eigen::MatrixXd& laplacian);

/// Text format: first line "N E", then E lines "u v" with 1-based vertices.
void write_edge_list(std::ostream& out, const Graph& g);
Graph read_edge_list(std::istream& in);

}  // namespace sage
