#pragma once

#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

#include "stochlyap/matrix.hpp"

namespace stochlyap {

/// Directed graph on vertices 0..n-1, stored as a dense adjacency mask.
class DirectedGraph {
 public:
  DirectedGraph() = default;
  explicit DirectedGraph(std::size_t n) : n_(n), adj_(n * n, 0) {}
  DirectedGraph(std::size_t n, const std::vector<std::pair<std::size_t, std::size_t>>& edges);

  std::size_t size() const noexcept { return n_; }
  bool has_edge(std::size_t from, std::size_t to) const { return adj_[from * n_ + to] != 0; }
  void add_edge(std::size_t from, std::size_t to);
  void add_self_loops();
  bool has_all_self_loops() const;

  std::vector<std::pair<std::size_t, std::size_t>> edges() const;
  std::vector<std::size_t> in_neighbors(std::size_t v) const;
  std::vector<std::size_t> out_neighbors(std::size_t v) const;

  friend bool operator==(const DirectedGraph&, const DirectedGraph&) = default;

 private:
  std::size_t n_ = 0;
  std::vector<char> adj_;
};

/// Communication graph: edge (i, j) whenever w_ji > 0, i.e. j listens to i.
DirectedGraph graph_of(const StochasticMatrix& w);

/// Graph with edge i -> j whenever a_ij > 0 (the Markov-chain convention).
DirectedGraph transition_graph(const MatrixPattern& p);

std::vector<bool> reachable_from(const DirectedGraph& g, std::size_t source);
bool is_rooted(const DirectedGraph& g);
/// Lowest-index vertex that reaches every other vertex.
std::optional<std::size_t> find_root(const DirectedGraph& g);
bool is_strongly_connected(const DirectedGraph& g);

/// Edge (i, j) iff some k has (i, k) in first and (k, j) in second.
DirectedGraph compose(const DirectedGraph& second, const DirectedGraph& first);

/// Component id per vertex (ids are 0..count-1) plus the component count.
struct Components {
  std::vector<std::size_t> id;
  std::size_t count = 0;
};
Components strongly_connected_components(const DirectedGraph& g);

/// Components with no edge leaving them.
std::vector<std::size_t> closed_components(const DirectedGraph& g, const Components& c);

/// gcd of cycle lengths inside one strongly connected component (0 if the
/// component has no cycle, i.e. a single vertex without a self-loop).
std::size_t component_period(const DirectedGraph& g, const Components& c, std::size_t component);

}  // namespace stochlyap
