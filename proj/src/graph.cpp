#include "stochlyap/graph.hpp"

#include <algorithm>
#include <deque>
#include <numeric>
#include <string>

namespace stochlyap {

DirectedGraph::DirectedGraph(std::size_t n,
                             const std::vector<std::pair<std::size_t, std::size_t>>& edges)
    : DirectedGraph(n) {
  for (const auto& [from, to] : edges) add_edge(from, to);
}

void DirectedGraph::add_edge(std::size_t from, std::size_t to) {
  if (from >= n_ || to >= n_)
    throw Error(ErrorKind::DimensionMismatch,
                "edge (" + std::to_string(from) + ", " + std::to_string(to) +
                    ") outside vertex range " + std::to_string(n_));
  adj_[from * n_ + to] = 1;
}

void DirectedGraph::add_self_loops() {
  for (std::size_t v = 0; v < n_; ++v) adj_[v * n_ + v] = 1;
}

bool DirectedGraph::has_all_self_loops() const {
  for (std::size_t v = 0; v < n_; ++v)
    if (!has_edge(v, v)) return false;
  return true;
}

std::vector<std::pair<std::size_t, std::size_t>> DirectedGraph::edges() const {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (std::size_t i = 0; i < n_; ++i)
    for (std::size_t j = 0; j < n_; ++j)
      if (has_edge(i, j)) out.emplace_back(i, j);
  return out;
}

std::vector<std::size_t> DirectedGraph::in_neighbors(std::size_t v) const {
  std::vector<std::size_t> out;
  for (std::size_t u = 0; u < n_; ++u)
    if (has_edge(u, v)) out.push_back(u);
  return out;
}

std::vector<std::size_t> DirectedGraph::out_neighbors(std::size_t v) const {
  std::vector<std::size_t> out;
  for (std::size_t u = 0; u < n_; ++u)
    if (has_edge(v, u)) out.push_back(u);
  return out;
}

DirectedGraph graph_of(const StochasticMatrix& w) {
  const std::size_t n = w.size();
  DirectedGraph g(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (w(j, i) > 0.0) g.add_edge(i, j);
  return g;
}

DirectedGraph transition_graph(const MatrixPattern& p) {
  const std::size_t n = p.size();
  DirectedGraph g(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (p.test(i, j)) g.add_edge(i, j);
  return g;
}

std::vector<bool> reachable_from(const DirectedGraph& g, std::size_t source) {
  std::vector<bool> seen(g.size(), false);
  std::deque<std::size_t> queue{source};
  seen[source] = true;
  while (!queue.empty()) {
    const std::size_t u = queue.front();
    queue.pop_front();
    for (std::size_t v = 0; v < g.size(); ++v) {
      if (g.has_edge(u, v) && !seen[v]) {
        seen[v] = true;
        queue.push_back(v);
      }
    }
  }
  return seen;
}

std::optional<std::size_t> find_root(const DirectedGraph& g) {
  for (std::size_t r = 0; r < g.size(); ++r) {
    const auto seen = reachable_from(g, r);
    if (std::all_of(seen.begin(), seen.end(), [](bool b) { return b; })) return r;
  }
  return std::nullopt;
}

bool is_rooted(const DirectedGraph& g) { return g.size() > 0 && find_root(g).has_value(); }

bool is_strongly_connected(const DirectedGraph& g) {
  if (g.size() == 0) return false;
  return strongly_connected_components(g).count == 1;
}

DirectedGraph compose(const DirectedGraph& second, const DirectedGraph& first) {
  if (second.size() != first.size())
    throw Error(ErrorKind::DimensionMismatch, "compose: vertex counts differ");
  const std::size_t n = first.size();
  DirectedGraph out(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < n; ++k) {
      if (!first.has_edge(i, k)) continue;
      for (std::size_t j = 0; j < n; ++j)
        if (second.has_edge(k, j)) out.add_edge(i, j);
    }
  return out;
}

Components strongly_connected_components(const DirectedGraph& g) {
  // Iterative Tarjan.
  const std::size_t n = g.size();
  constexpr std::size_t kUnset = static_cast<std::size_t>(-1);
  std::vector<std::size_t> index(n, kUnset), low(n, 0);
  std::vector<bool> on_stack(n, false);
  std::vector<std::size_t> stack;
  Components c;
  c.id.assign(n, kUnset);
  std::size_t counter = 0;

  struct Frame {
    std::size_t v;
    std::size_t next;
  };
  for (std::size_t s = 0; s < n; ++s) {
    if (index[s] != kUnset) continue;
    std::vector<Frame> call{{s, 0}};
    index[s] = low[s] = counter++;
    stack.push_back(s);
    on_stack[s] = true;
    while (!call.empty()) {
      Frame& f = call.back();
      if (f.next < n) {
        const std::size_t w = f.next++;
        if (!g.has_edge(f.v, w)) continue;
        if (index[w] == kUnset) {
          index[w] = low[w] = counter++;
          stack.push_back(w);
          on_stack[w] = true;
          call.push_back({w, 0});
        } else if (on_stack[w]) {
          low[f.v] = std::min(low[f.v], index[w]);
        }
        continue;
      }
      const std::size_t v = f.v;
      call.pop_back();
      if (!call.empty()) low[call.back().v] = std::min(low[call.back().v], low[v]);
      if (low[v] == index[v]) {
        std::size_t w;
        do {
          w = stack.back();
          stack.pop_back();
          on_stack[w] = false;
          c.id[w] = c.count;
        } while (w != v);
        ++c.count;
      }
    }
  }
  return c;
}

std::vector<std::size_t> closed_components(const DirectedGraph& g, const Components& c) {
  std::vector<bool> leaves(c.count, false);
  for (std::size_t u = 0; u < g.size(); ++u)
    for (std::size_t v = 0; v < g.size(); ++v)
      if (g.has_edge(u, v) && c.id[u] != c.id[v]) leaves[c.id[u]] = true;
  std::vector<std::size_t> out;
  for (std::size_t k = 0; k < c.count; ++k)
    if (!leaves[k]) out.push_back(k);
  return out;
}

std::size_t component_period(const DirectedGraph& g, const Components& c, std::size_t component) {
  // BFS levels from one member; every intra-component edge (u, v) contributes
  // level(u) + 1 - level(v) to the gcd.
  const std::size_t n = g.size();
  std::size_t start = n;
  for (std::size_t v = 0; v < n; ++v)
    if (c.id[v] == component) {
      start = v;
      break;
    }
  if (start == n) return 0;
  std::vector<long> level(n, -1);
  level[start] = 0;
  std::deque<std::size_t> queue{start};
  while (!queue.empty()) {
    const std::size_t u = queue.front();
    queue.pop_front();
    for (std::size_t v = 0; v < n; ++v) {
      if (c.id[v] != component || !g.has_edge(u, v) || level[v] >= 0) continue;
      level[v] = level[u] + 1;
      queue.push_back(v);
    }
  }
  std::size_t d = 0;
  for (std::size_t u = 0; u < n; ++u) {
    if (c.id[u] != component) continue;
    for (std::size_t v = 0; v < n; ++v) {
      if (c.id[v] != component || !g.has_edge(u, v)) continue;
      const long diff = level[u] + 1 - level[v];
      d = std::gcd(d, static_cast<std::size_t>(diff < 0 ? -diff : diff));
    }
  }
  return d;
}

}  // namespace stochlyap
