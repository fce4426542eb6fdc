#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "stochlyap/matrix.hpp"
#include "stochlyap/parallel.hpp"
#include "stochlyap/sequence.hpp"

namespace stochlyap {

inline constexpr double kTauFloor = 1e-300;

/// Running backward product W(k,0) = W(k)...W(1).
///
/// Besides the product itself it carries D_i = row_i - row_0, updated as
/// D' = (W - 1 w_0^T) D. The coefficients of that recursion sum to zero per
/// row, so D keeps full relative precision as the product collapses to rank
/// one; tau() reads it as half the largest pairwise L1 row distance, which
/// equals 1 - min overlap for stochastic rows without the cancellation.
class ProductTracker {
 public:
  explicit ProductTracker(std::size_t n);

  void push(const StochasticMatrix& w);
  double tau() const;
  /// max over columns j of (max_i P_ij - min_i P_ij).
  double max_column_spread() const;
  const Matrix& product() const noexcept { return product_; }
  std::size_t steps() const noexcept { return steps_; }

 private:
  Matrix product_;
  Matrix diffs_;
  std::size_t steps_ = 0;
};

/// tau of W(last)...W(first) via the difference recursion.
double product_tau(std::span<const StochasticMatrix> seq);

struct ProductTrace {
  std::vector<std::size_t> checkpoints;
  std::vector<double> taus;
  std::vector<double> spreads;
  std::uint64_t seed = 0;
  std::size_t steps_run = 0;
  bool reached_floor = false;  // recording stopped because tau fell below kTauFloor
  Matrix final_product;
};

/// 0, 1, 2, 4, ..., plus `steps`.
std::vector<std::size_t> power_of_two_checkpoints(std::size_t steps);
std::vector<std::size_t> every_step_checkpoints(std::size_t steps);

ProductTrace simulate_product(const FiniteMatrixSet& set, const SequenceModel& model, std::size_t steps,
                              const std::vector<std::size_t>& checkpoints, std::uint64_t seed);
ProductTrace simulate_product(const FiniteMatrixSet& set, const SequenceModel& model, std::size_t steps,
                              const std::vector<std::size_t>& checkpoints);

/// Independent runs with seeds trial_seed(base_seed, r).
std::vector<ProductTrace> simulate_ensemble(const FiniteMatrixSet& set, const SequenceModel& model,
                                            std::size_t steps, const std::vector<std::size_t>& checkpoints,
                                            std::size_t runs, std::uint64_t base_seed,
                                            Execution exec = Execution::Parallel);

/// Per-step geometric decay of tau from the least-squares slope of log tau
/// over checkpoints with tau above the floor. Needs three such points.
double fit_empirical_rate(const ProductTrace& trace);

/// First checkpoint whose tau is below `threshold`, if any.
std::optional<std::size_t> first_checkpoint_below(const ProductTrace& trace, double threshold);

struct RateReport {
  double empirical_rate = 0.0;
  double theoretical_bound = 1.0;  // (1 - p alpha^h)^(1/h)
  std::size_t h = 0;
  double p = 0.0;                  // min window scrambling probability
  double alpha = 0.0;              // min positive entry over the set
};

/// Exact (p, alpha, bound) for window length h; empirical_rate is left at 0.
/// Throws NoScramblingWindow when some window start has p = 0.
RateReport scrambling_window_bound(const FiniteMatrixSet& set, const SequenceModel& model, std::size_t h);

/// Smallest h <= h_max whose window-class probability is positive at every
/// window start, or nullopt.
std::optional<std::size_t> find_window_length(const FiniteMatrixSet& set, const SequenceModel& model,
                                              WindowClass cls, std::size_t h_max = 8);

/// Smallest m such that every product of m factors drawn from the SIA
/// members of `set` is scrambling, searched over product patterns up to
/// m_max. nullopt when the set has no SIA member or no m <= m_max works.
std::optional<std::size_t> sia_scrambling_length(const FiniteMatrixSet& set, std::size_t m_max = 64);

struct BlockRateEstimate {
  double factor = 0.0;         // exp(mean log tau) over non-degenerate blocks; per T steps
  double per_step = 0.0;       // factor^(1/T)
  double log_mean = 0.0;
  double log_std_error = 0.0;  // standard error of the mean of log tau
  double zero_fraction = 0.0;  // blocks whose product is already rank one
  std::size_t blocks_used = 0;
};

/// Averages log tau(W(kT+T, kT)) over `blocks` consecutive windows of one
/// sampled path of a stationary model.
BlockRateEstimate block_log_tau_estimate(const FiniteMatrixSet& set, const SequenceModel& model, std::size_t horizon,
                                         std::size_t blocks, std::uint64_t seed);

}  // namespace stochlyap
