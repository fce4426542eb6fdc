#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "stochlyap/graph.hpp"
#include "stochlyap/matrix.hpp"
#include "stochlyap/random.hpp"

namespace stochlyap {

struct BernoulliClocks {
  std::vector<double> rates;  // activation probability per tick, in (0, 1]
};
/// Poisson clocks thinned onto a tick grid of width dt.
struct PoissonClocks {
  std::vector<double> rates;  // intensities, > 0
  double dt = 1.0;
};

class AsyncClockModel {
 public:
  using Variant = std::variant<BernoulliClocks, PoissonClocks>;

  static AsyncClockModel bernoulli(std::vector<double> rates, std::uint64_t seed = 0);
  static AsyncClockModel poisson(std::vector<double> rates, double dt = 1.0, std::uint64_t seed = 0);
  /// Every agent fires on every tick: the synchronous iteration x <- W x.
  static AsyncClockModel synchronous(std::size_t n, std::uint64_t seed = 0);

  const Variant& variant() const noexcept { return variant_; }
  std::uint64_t seed() const noexcept { return seed_; }
  std::size_t agents() const;
  /// Per-tick firing probability of each agent.
  std::vector<double> activation_probabilities() const;

 private:
  AsyncClockModel(Variant v, std::uint64_t seed) : variant_(std::move(v)), seed_(seed) {}
  Variant variant_;
  std::uint64_t seed_ = 0;
};

struct UpdateEvent {
  std::size_t k = 0;
  std::vector<std::size_t> activated;
};

/// Identity with the rows of `activated` replaced by the matching rows of W.
StochasticMatrix async_update_matrix(const StochasticMatrix& w, std::span<const std::size_t> activated);

struct HierarchicalPartition {
  std::size_t root = 0;
  std::vector<std::vector<std::size_t>> levels;   // H_0 = {root}, H_1, ...
  std::vector<std::optional<std::size_t>> parent;  // spanning-tree parent; empty for the root
};

/// BFS spanning tree of `g` from `root` with lowest-index parents.
HierarchicalPartition hierarchical_partition(const DirectedGraph& g, std::size_t root);

/// Levels of a uniformly grown random spanning tree (not necessarily BFS).
HierarchicalPartition random_tree_partition(const DirectedGraph& g, std::size_t root, Rng& rng);

/// H_0, H_1, ... concatenated, each level ascending.
std::vector<std::size_t> hierarchical_sequence(const HierarchicalPartition& partition);

/// W_{a_n} ... W_{a_1} for the single-agent update matrices of `seq`.
StochasticMatrix hierarchical_product(const StochasticMatrix& w, std::span<const std::size_t> seq);

/// Whether `word` (length n) splits into successive blocks that are the
/// levels of some spanning tree of g rooted at word[0].
bool is_hierarchical_sequence(const DirectedGraph& g, std::span<const std::size_t> word);

/// Visits every hierarchical sequence of g together with its product, sharing
/// prefix products. Stops after `limit` sequences; returns the number visited.
std::size_t for_each_hierarchical_sequence(
    const StochasticMatrix& w, std::size_t limit,
    const std::function<void(std::span<const std::size_t>, const Matrix&)>& visit);

/// Exact number of hierarchical words among the n^n activation words.
std::size_t count_hierarchical_words(const DirectedGraph& g);

struct AgreementTrace {
  std::vector<double> spreads;  // spreads[k] = spread(x_k), k = 0..events
  Vector final_state;
  std::size_t events = 0;
  std::size_t ticks = 0;
};

/// Event-indexed asynchronous iteration: idle ticks are skipped, each event
/// applies one update matrix with every agent that fired on that tick.
AgreementTrace simulate_async(const StochasticMatrix& w, const AsyncClockModel& clocks, const Vector& x0,
                              std::size_t steps, std::uint64_t seed);
AgreementTrace simulate_async(const StochasticMatrix& w, const AsyncClockModel& clocks, const Vector& x0,
                              std::size_t steps);

/// Synchronous iteration x <- W x: after `burn_in` steps, the smallest
/// d <= max_period with |x_{k+d} - x_k|_inf <= tol for d consecutive k.
struct Recurrence {
  std::size_t period = 0;
  std::size_t onset = 0;
  double spread = 0.0;  // spread of the state at the onset
};
std::optional<Recurrence> synchronous_recurrence(const StochasticMatrix& w, const Vector& x0, std::size_t burn_in,
                                                 std::size_t max_period, double tol = 1e-12);

}  // namespace stochlyap
