#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "coniso/exact.hpp"

namespace coniso {

/// Unordered vertex pair stored with first < second.
using Edge = std::pair<int, int>;

/// Vertex bijection V_G -> V_H stored as image table: f[g] = h.
using Permutation = std::vector<int>;

class GraphError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Simple undirected graph on vertices 0..n-1.
///
/// Immutable once built. The edge list is kept sorted lexicographically and
/// the dense adjacency table mirrors it; every constructor validates both.
class Graph {
 public:
  Graph() = default;
  explicit Graph(int n);
  Graph(int n, std::span<const Edge> edges);

  static Graph from_adjacency(const IntMatrix& adjacency);

  int order() const { return n_; }
  std::size_t size() const { return edges_.size(); }
  const std::vector<Edge>& edges() const { return edges_; }

  bool adjacent(int u, int v) const {
    return adj_[static_cast<std::size_t>(u) * n_ + v] != 0;
  }
  int degree(int v) const;
  std::vector<int> neighbors(int v) const;

  IntMatrix adjacency() const;
  Eigen::MatrixXd adjacency_real() const;

  /// Relabels vertex v as perm[v].
  Graph relabeled(std::span<const int> perm) const;

  friend bool operator==(const Graph& a, const Graph& b) {
    return a.n_ == b.n_ && a.edges_ == b.edges_;
  }

 private:
  void check_vertex(int v) const;

  int n_ = 0;
  std::vector<std::uint8_t> adj_;
  std::vector<Edge> edges_;
};

enum class RelKind { equal, adjacent, distinct_non_adjacent };

RelKind rel(const Graph& g, int u, int v);
std::string_view to_string(RelKind kind);

Graph complement(const Graph& g);
Graph disjoint_union(const Graph& g, const Graph& h);

/// Vertex (g, h) has index g * |V_H| + h in both products.
Graph cartesian_product(const Graph& g, const Graph& h);
Graph isomorphism_product(const Graph& g, const Graph& h);

/// BFS distances; -1 marks unreachable pairs.
std::vector<std::vector<int>> distance_table(const Graph& g);

/// X^(0) = I, X^(1) = A, ... up to the largest finite distance.
std::vector<IntMatrix> distance_matrices(const Graph& g);

/// Connects vertices whose distance in `base` lies in `distances`.
Graph distance_power(const Graph& base, std::span<const int> distances);

Graph cycle_graph(int n);
Graph complete_graph(int n);
Graph empty_graph(int n);
Graph path_graph(int n);
Graph hypercube_q4();
Graph hoffman_graph();
Graph shrikhande_graph();
Graph rook4_graph();

/// Builds a graph from a textual description such as "q4", "cycle(6)",
/// "dist_power(cycle(10),1,2)" or "union(cycle(3),cycle(3))".
Graph named_graph(std::string_view spec);

/// The list of names understood by named_graph, for usage messages.
std::string named_graph_help();

/// Joint 1-dimensional colour refinement over several graphs with a shared
/// palette. Colours are ranks of sorted signatures, so they are invariant
/// under relabelling. `initial` (one vector per graph) may be empty.
std::vector<std::vector<int>> refine_vertex_colors(
    std::span<const Graph* const> graphs,
    std::span<const std::vector<int>> initial = {});

std::optional<Permutation> exact_isomorphism(const Graph& g, const Graph& h);

/// True iff perm maps edges of g onto edges of h bijectively.
bool is_isomorphism(const Graph& g, const Graph& h, std::span<const int> perm);

bool contains_clique(const Graph& g, int k);

/// Size of a largest independent set (exhaustive; for small graphs).
int independence_number(const Graph& g);

Graph parse_graph(std::string_view text);
std::string serialize_graph(const Graph& g);

Graph read_graph_file(const std::string& path);
void write_graph_file(const std::string& path, const Graph& g);

}  // namespace coniso
