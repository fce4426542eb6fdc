#include "stochlyap/async.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <string>

namespace stochlyap {

namespace {

void check_rates(const std::vector<double>& rates, bool bernoulli) {
  if (rates.empty()) throw Error(ErrorKind::EmptyActivation, "clock model needs at least one agent");
  for (std::size_t i = 0; i < rates.size(); ++i) {
    const double r = rates[i];
    const bool ok = bernoulli ? (r > 0.0 && r <= 1.0) : (r > 0.0 && std::isfinite(r));
    if (!ok)
      throw Error(ErrorKind::InvalidDistribution, "clock rate of agent " + std::to_string(i) + " out of range",
                  static_cast<long>(i), r);
  }
}

}  // namespace

AsyncClockModel AsyncClockModel::bernoulli(std::vector<double> rates, std::uint64_t seed) {
  check_rates(rates, true);
  return AsyncClockModel(BernoulliClocks{std::move(rates)}, seed);
}

AsyncClockModel AsyncClockModel::poisson(std::vector<double> rates, double dt, std::uint64_t seed) {
  check_rates(rates, false);
  if (!(dt > 0.0)) throw Error(ErrorKind::InvalidDistribution, "Poisson grid width must be positive", -1, dt);
  return AsyncClockModel(PoissonClocks{std::move(rates), dt}, seed);
}

AsyncClockModel AsyncClockModel::synchronous(std::size_t n, std::uint64_t seed) {
  return bernoulli(std::vector<double>(n, 1.0), seed);
}

std::size_t AsyncClockModel::agents() const {
  return std::visit([](const auto& c) { return c.rates.size(); }, variant_);
}

std::vector<double> AsyncClockModel::activation_probabilities() const {
  if (const auto* b = std::get_if<BernoulliClocks>(&variant_)) return b->rates;
  const auto& p = std::get<PoissonClocks>(variant_);
  std::vector<double> out(p.rates.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = -std::expm1(-p.rates[i] * p.dt);
  return out;
}

StochasticMatrix async_update_matrix(const StochasticMatrix& w, std::span<const std::size_t> activated) {
  if (activated.empty()) throw Error(ErrorKind::EmptyActivation, "activation set is empty");
  const std::size_t n = w.size();
  Matrix out = Matrix::Identity(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t i : activated) {
    if (i >= n) throw Error(ErrorKind::DimensionMismatch, "activated agent out of range", static_cast<long>(i));
    out.row(static_cast<Eigen::Index>(i)) = w.entries().row(static_cast<Eigen::Index>(i));
  }
  return StochasticMatrix::trusted(std::move(out));
}

HierarchicalPartition hierarchical_partition(const DirectedGraph& g, std::size_t root) {
  const std::size_t n = g.size();
  if (root >= n) throw Error(ErrorKind::DimensionMismatch, "root out of range", static_cast<long>(root));
  HierarchicalPartition part;
  part.root = root;
  part.parent.assign(n, std::nullopt);
  std::vector<long> level(n, -1);
  level[root] = 0;
  std::vector<std::size_t> frontier{root};
  while (!frontier.empty()) {
    part.levels.push_back(frontier);
    std::vector<std::size_t> next;
    // Scanning children in index order and parents in ascending order
    // gives every vertex its lowest-index parent on the previous level.
    for (std::size_t v = 0; v < n; ++v) {
      if (level[v] >= 0) continue;
      for (std::size_t u : frontier)
        if (g.has_edge(u, v)) {
          part.parent[v] = u;
          break;
        }
      if (part.parent[v]) next.push_back(v);
    }
    for (std::size_t v : next) level[v] = static_cast<long>(part.levels.size());
    frontier = std::move(next);
  }
  for (std::size_t v = 0; v < n; ++v)
    if (level[v] < 0)
      throw Error(ErrorKind::NotReachable, "vertex " + std::to_string(v) + " is not reachable from the root",
                  static_cast<long>(v));
  return part;
}

HierarchicalPartition random_tree_partition(const DirectedGraph& g, std::size_t root, Rng& rng) {
  const std::size_t n = g.size();
  if (root >= n) throw Error(ErrorKind::DimensionMismatch, "root out of range", static_cast<long>(root));
  HierarchicalPartition part;
  part.root = root;
  part.parent.assign(n, std::nullopt);
  std::vector<long> level(n, -1);
  level[root] = 0;
  std::vector<std::size_t> in_tree{root};
  for (std::size_t added = 1; added < n; ++added) {
    std::vector<std::pair<std::size_t, std::size_t>> cut;
    for (std::size_t u : in_tree)
      for (std::size_t v = 0; v < n; ++v)
        if (level[v] < 0 && g.has_edge(u, v)) cut.emplace_back(u, v);
    if (cut.empty()) break;
    const auto [u, v] = cut[rng.below(cut.size())];
    part.parent[v] = u;
    level[v] = level[u] + 1;
    in_tree.push_back(v);
  }
  for (std::size_t v = 0; v < n; ++v)
    if (level[v] < 0)
      throw Error(ErrorKind::NotReachable, "vertex " + std::to_string(v) + " is not reachable from the root",
                  static_cast<long>(v));
  const long depth = *std::max_element(level.begin(), level.end());
  part.levels.resize(static_cast<std::size_t>(depth) + 1);
  for (std::size_t v = 0; v < n; ++v) part.levels[static_cast<std::size_t>(level[v])].push_back(v);
  return part;
}

std::vector<std::size_t> hierarchical_sequence(const HierarchicalPartition& partition) {
  std::vector<std::size_t> seq;
  for (auto level : partition.levels) {
    std::sort(level.begin(), level.end());
    seq.insert(seq.end(), level.begin(), level.end());
  }
  return seq;
}

StochasticMatrix hierarchical_product(const StochasticMatrix& w, std::span<const std::size_t> seq) {
  const auto n = static_cast<Eigen::Index>(w.size());
  Matrix p = Matrix::Identity(n, n);
  for (std::size_t a : seq) {
    if (a >= w.size()) throw Error(ErrorKind::DimensionMismatch, "sequence vertex out of range", static_cast<long>(a));
    const auto i = static_cast<Eigen::Index>(a);
    p.row(i) = w.entries().row(i) * p;
  }
  return StochasticMatrix::trusted(std::move(p));
}

namespace {

/// Feasible block layouts of a word prefix. A layout is (prev, cur): the
/// open block starts at `cur`, the one before it at `prev`. Block 0 holds
/// the root alone and has no predecessor (prev = -1, encoded as 0).
class LayoutSet {
 public:
  explicit LayoutSet(std::size_t n) : n_(n), bits_((n + 1) * n, 0) {}

  static LayoutSet root(std::size_t n) {
    LayoutSet s(n);
    s.bits_[0] = 1;
    return s;
  }

  bool empty() const { return std::find(bits_.begin(), bits_.end(), 1) == bits_.end(); }

  /// Layouts after appending word[p], given word[0..p).
  LayoutSet extend(const DirectedGraph& g, std::span<const std::size_t> word, std::size_t p) const {
    LayoutSet out(n_);
    const std::size_t v = word[p];
    auto has_parent = [&](std::size_t lo, std::size_t hi) {
      for (std::size_t q = lo; q < hi; ++q)
        if (g.has_edge(word[q], v)) return true;
      return false;
    };
    for (std::size_t prev1 = 0; prev1 <= n_; ++prev1)
      for (std::size_t cur = 0; cur < n_; ++cur) {
        if (!bits_[prev1 * n_ + cur]) continue;
        if (prev1 > 0 && has_parent(prev1 - 1, cur)) out.bits_[prev1 * n_ + cur] = 1;
        if (has_parent(cur, p)) out.bits_[(cur + 1) * n_ + p] = 1;
      }
    return out;
  }

 private:
  std::size_t n_;
  std::vector<char> bits_;
};

/// Depth-first walk over permutation prefixes that still admit a layout.
template <class Visit>
void walk_hierarchical(const DirectedGraph& g, std::vector<std::size_t>& word, std::vector<char>& used,
                       const LayoutSet& layouts, Visit&& visit) {
  const std::size_t n = g.size();
  const std::size_t p = word.size();
  if (p == n) {
    visit(word);
    return;
  }
  for (std::size_t v = 0; v < n; ++v) {
    if (used[v]) continue;
    word.push_back(v);
    LayoutSet next = layouts.extend(g, word, p);
    if (!next.empty()) {
      used[v] = 1;
      if (!visit.enter(word)) {
        used[v] = 0;
        word.pop_back();
        return;
      }
      walk_hierarchical(g, word, used, next, visit);
      visit.leave(word);
      used[v] = 0;
    }
    word.pop_back();
    if (visit.done()) return;
  }
}

}  // namespace

bool is_hierarchical_sequence(const DirectedGraph& g, std::span<const std::size_t> word) {
  const std::size_t n = g.size();
  if (word.size() != n || n == 0) return false;
  std::vector<char> used(n, 0);
  for (std::size_t v : word) {
    if (v >= n || used[v]) return false;
    used[v] = 1;
  }
  LayoutSet layouts = LayoutSet::root(n);
  for (std::size_t p = 1; p < n && !layouts.empty(); ++p) layouts = layouts.extend(g, word, p);
  return !layouts.empty();
}

std::size_t for_each_hierarchical_sequence(
    const StochasticMatrix& w, std::size_t limit,
    const std::function<void(std::span<const std::size_t>, const Matrix&)>& visit) {
  const DirectedGraph g = graph_of(w);
  const std::size_t n = g.size();
  const auto dim = static_cast<Eigen::Index>(n);

  struct Visitor {
    const StochasticMatrix& w;
    std::size_t limit;
    const std::function<void(std::span<const std::size_t>, const Matrix&)>& sink;
    std::vector<Matrix> prefix;  // prefix[p] = product of the first p updates
    std::size_t count = 0;

    bool enter(const std::vector<std::size_t>& word) {
      const auto i = static_cast<Eigen::Index>(word.back());
      Matrix next = prefix.back();
      next.row(i) = w.entries().row(i) * prefix.back();
      prefix.push_back(std::move(next));
      return true;
    }
    void leave(const std::vector<std::size_t>&) { prefix.pop_back(); }
    void operator()(const std::vector<std::size_t>& word) {
      if (count >= limit) return;
      sink(word, prefix.back());
      ++count;
    }
    bool done() const { return count >= limit; }
  };

  Visitor visitor{w, limit, visit, {}, 0};
  visitor.prefix.push_back(Matrix::Identity(dim, dim));
  std::vector<std::size_t> word;
  std::vector<char> used(n, 0);
  for (std::size_t root = 0; root < n && !visitor.done(); ++root) {
    word.assign(1, root);
    used[root] = 1;
    visitor.enter(word);
    walk_hierarchical(g, word, used, LayoutSet::root(n), visitor);
    visitor.leave(word);
    used[root] = 0;
  }
  return visitor.count;
}

std::size_t count_hierarchical_words(const DirectedGraph& g) {
  struct Counter {
    std::size_t count = 0;
    bool enter(const std::vector<std::size_t>&) { return true; }
    void leave(const std::vector<std::size_t>&) {}
    void operator()(const std::vector<std::size_t>&) { ++count; }
    bool done() const { return false; }
  };
  const std::size_t n = g.size();
  Counter counter;
  std::vector<std::size_t> word;
  std::vector<char> used(n, 0);
  for (std::size_t root = 0; root < n; ++root) {
    word.assign(1, root);
    used[root] = 1;
    walk_hierarchical(g, word, used, LayoutSet::root(n), counter);
    used[root] = 0;
  }
  return counter.count;
}

AgreementTrace simulate_async(const StochasticMatrix& w, const AsyncClockModel& clocks, const Vector& x0,
                              std::size_t steps, std::uint64_t seed) {
  const std::size_t n = w.size();
  if (clocks.agents() != n || static_cast<std::size_t>(x0.size()) != n)
    throw Error(ErrorKind::DimensionMismatch, "clock model, state and W sizes differ");
  const auto probs = clocks.activation_probabilities();
  std::vector<Rng> streams;
  streams.reserve(n);
  for (std::size_t i = 0; i < n; ++i) streams.emplace_back(stream_seed(seed, i));

  AgreementTrace trace;
  trace.spreads.reserve(steps + 1);
  Vector x = x0;
  trace.spreads.push_back(spread(x));
  std::vector<std::size_t> active;
  Vector updated(x.size());
  while (trace.events < steps) {
    ++trace.ticks;
    active.clear();
    for (std::size_t i = 0; i < n; ++i)
      if (streams[i].bernoulli(probs[i])) active.push_back(i);
    if (active.empty()) continue;
    // Rows outside the activation set are identity rows, so only the active
    // coordinates change; all of them read the pre-update state.
    for (std::size_t i : active) updated(static_cast<Eigen::Index>(i)) = w.entries().row(static_cast<Eigen::Index>(i)).dot(x);
    for (std::size_t i : active) x(static_cast<Eigen::Index>(i)) = updated(static_cast<Eigen::Index>(i));
    ++trace.events;
    trace.spreads.push_back(spread(x));
  }
  trace.final_state = std::move(x);
  return trace;
}

AgreementTrace simulate_async(const StochasticMatrix& w, const AsyncClockModel& clocks, const Vector& x0,
                              std::size_t steps) {
  return simulate_async(w, clocks, x0, steps, clocks.seed());
}

std::optional<Recurrence> synchronous_recurrence(const StochasticMatrix& w, const Vector& x0, std::size_t burn_in,
                                                 std::size_t max_period, double tol) {
  if (static_cast<std::size_t>(x0.size()) != w.size())
    throw Error(ErrorKind::DimensionMismatch, "state and W sizes differ");
  Vector x = x0;
  for (std::size_t k = 0; k < burn_in; ++k) x = w.entries() * x;
  std::vector<Vector> orbit{x};
  for (std::size_t k = 0; k < 2 * max_period; ++k) orbit.push_back(w.entries() * orbit.back());
  for (std::size_t d = 1; d <= max_period; ++d) {
    bool recurs = true;
    for (std::size_t j = 0; j < d && recurs; ++j)
      recurs = (orbit[j + d] - orbit[j]).lpNorm<Eigen::Infinity>() <= tol;
    if (recurs) return Recurrence{d, burn_in, spread(orbit.front())};
  }
  return std::nullopt;
}

}  // namespace stochlyap
