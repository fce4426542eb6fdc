#include "stochlyap/product.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

#include "stochlyap/lyapunov.hpp"

namespace stochlyap {

ProductTracker::ProductTracker(std::size_t n)
    : product_(Matrix::Identity(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n))),
      diffs_(Matrix::Identity(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n))) {
  diffs_.rowwise() -= product_.row(0);
}

void ProductTracker::push(const StochasticMatrix& w) {
  const Matrix& e = w.entries();
  if (e.rows() != product_.rows()) throw Error(ErrorKind::DimensionMismatch, "ProductTracker: factor size");
  Matrix coeff = e;
  coeff.rowwise() -= e.row(0);
  diffs_ = coeff * diffs_;
  product_ = e * product_;
  ++steps_;
}

double ProductTracker::tau() const {
  const Eigen::Index n = diffs_.rows();
  double worst = 0.0;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j) worst = std::max(worst, (diffs_.row(i) - diffs_.row(j)).lpNorm<1>());
  return std::min(0.5 * worst, 1.0);
}

double ProductTracker::max_column_spread() const {
  double worst = 0.0;
  for (Eigen::Index j = 0; j < diffs_.cols(); ++j) {
    const auto col = diffs_.col(j);
    worst = std::max(worst, col.maxCoeff() - col.minCoeff());
  }
  return worst;
}

double product_tau(std::span<const StochasticMatrix> seq) {
  if (seq.empty()) throw Error(ErrorKind::EmptySequence, "product_tau of an empty sequence");
  ProductTracker tracker(seq.front().size());
  for (const auto& w : seq) tracker.push(w);
  return tracker.tau();
}

std::vector<std::size_t> power_of_two_checkpoints(std::size_t steps) {
  std::vector<std::size_t> out{0};
  for (std::size_t k = 1; k < steps; k *= 2) out.push_back(k);
  if (steps > 0) out.push_back(steps);
  return out;
}

std::vector<std::size_t> every_step_checkpoints(std::size_t steps) {
  std::vector<std::size_t> out(steps + 1);
  for (std::size_t k = 0; k <= steps; ++k) out[k] = k;
  return out;
}

ProductTrace simulate_product(const FiniteMatrixSet& set, const SequenceModel& model, std::size_t steps,
                              const std::vector<std::size_t>& checkpoints, std::uint64_t seed) {
  if (steps == 0) throw Error(ErrorKind::EmptySequence, "simulate_product needs at least one step");
  if (model.alphabet_size() > set.count())
    throw Error(ErrorKind::DimensionMismatch, "model emits indices outside the matrix set");
  std::vector<std::size_t> marks = checkpoints;
  std::sort(marks.begin(), marks.end());
  marks.erase(std::unique(marks.begin(), marks.end()), marks.end());

  ProductTrace trace;
  trace.seed = seed;
  ProductTracker tracker(set.dimension());
  SequenceSampler sampler(model, seed);
  auto next_mark = marks.begin();
  auto record = [&](std::size_t k) -> bool {
    while (next_mark != marks.end() && *next_mark < k) ++next_mark;
    if (next_mark == marks.end() || *next_mark != k) return true;
    const double t = tracker.tau();
    if (t < kTauFloor) return false;
    trace.checkpoints.push_back(k);
    trace.taus.push_back(t);
    trace.spreads.push_back(tracker.max_column_spread());
    return true;
  };
  bool live = record(0);
  for (std::size_t k = 1; k <= steps && live; ++k) {
    tracker.push(set[sampler.next()]);
    live = record(k) && tracker.tau() >= kTauFloor;
  }
  trace.reached_floor = !live;
  trace.steps_run = tracker.steps();
  trace.final_product = tracker.product();
  return trace;
}

ProductTrace simulate_product(const FiniteMatrixSet& set, const SequenceModel& model, std::size_t steps,
                              const std::vector<std::size_t>& checkpoints) {
  return simulate_product(set, model, steps, checkpoints, model.seed());
}

std::vector<ProductTrace> simulate_ensemble(const FiniteMatrixSet& set, const SequenceModel& model,
                                            std::size_t steps, const std::vector<std::size_t>& checkpoints,
                                            std::size_t runs, std::uint64_t base_seed, Execution exec) {
  return map_trials(
      runs, [&](std::size_t r) { return simulate_product(set, model, steps, checkpoints, trial_seed(base_seed, r)); },
      exec);
}

double fit_empirical_rate(const ProductTrace& trace) {
  std::vector<double> ks(trace.checkpoints.begin(), trace.checkpoints.end());
  const auto rate = fit_log_slope_rate(ks, trace.taus, kTauFloor, 3);
  if (!rate) throw Error(ErrorKind::InsufficientData, "fewer than three checkpoints with tau above the floor");
  return *rate;
}

std::optional<std::size_t> first_checkpoint_below(const ProductTrace& trace, double threshold) {
  for (std::size_t i = 0; i < trace.taus.size(); ++i)
    if (trace.taus[i] < threshold) return trace.checkpoints[i];
  // Recording stops at the floor, so a trace that ended early went below it.
  if (trace.reached_floor && kTauFloor < threshold) return trace.steps_run;
  return std::nullopt;
}

RateReport scrambling_window_bound(const FiniteMatrixSet& set, const SequenceModel& model, std::size_t h) {
  RateReport report;
  report.h = h;
  report.alpha = min_positive_entry(set);
  double p = 1.0;
  for (std::size_t start : window_starts(model))
    p = std::min(p, window_class_probability(set, model, start, h, WindowClass::Scrambling));
  report.p = p;
  if (p <= 0.0)
    throw Error(ErrorKind::NoScramblingWindow, "no scrambling window of length " + std::to_string(h),
                static_cast<long>(h));
  report.theoretical_bound = std::pow(1.0 - p * std::pow(report.alpha, static_cast<double>(h)),
                                      1.0 / static_cast<double>(h));
  return report;
}

std::optional<std::size_t> find_window_length(const FiniteMatrixSet& set, const SequenceModel& model,
                                              WindowClass cls, std::size_t h_max) {
  const auto starts = window_starts(model);
  for (std::size_t h = 1; h <= h_max; ++h) {
    if (std::pow(static_cast<double>(model.alphabet_size()), static_cast<double>(h)) > kMaxWindowWords) break;
    bool all_positive = true;
    for (std::size_t start : starts)
      if (window_class_probability(set, model, start, h, cls) <= 0.0) {
        all_positive = false;
        break;
      }
    if (all_positive) return h;
  }
  return std::nullopt;
}

std::optional<std::size_t> sia_scrambling_length(const FiniteMatrixSet& set, std::size_t m_max) {
  std::set<MatrixPattern> factors;
  for (const auto& w : set.matrices())
    if (is_sia(w)) factors.insert(pattern_of(w));
  if (factors.empty()) return std::nullopt;
  auto scrambling = [](const MatrixPattern& p) {
    for (std::size_t i = 0; i < p.size(); ++i)
      for (std::size_t j = i + 1; j < p.size(); ++j)
        if (!p.rows_intersect(i, j)) return false;
    return true;
  };
  // Products of a fixed length have patterns determined by the factor
  // patterns, so the reachable pattern set is finite and small.
  std::set<MatrixPattern> products = factors;
  for (std::size_t m = 1; m <= m_max; ++m) {
    if (std::all_of(products.begin(), products.end(), scrambling)) return m;
    std::set<MatrixPattern> next;
    for (const auto& f : factors)
      for (const auto& p : products) next.insert(f.times(p));
    products = std::move(next);
  }
  return std::nullopt;
}

BlockRateEstimate block_log_tau_estimate(const FiniteMatrixSet& set, const SequenceModel& model, std::size_t horizon,
                                         std::size_t blocks, std::uint64_t seed) {
  if (!model.is_stationary())
    throw Error(ErrorKind::NonStationaryModel, "block estimator needs an IID or stationary Markov model");
  if (horizon == 0 || blocks == 0) throw Error(ErrorKind::InsufficientData, "horizon and blocks must be positive");
  SequenceSampler sampler(model, seed);
  double sum = 0.0, sum_sq = 0.0;
  std::size_t used = 0, zeros = 0;
  for (std::size_t b = 0; b < blocks; ++b) {
    ProductTracker tracker(set.dimension());
    for (std::size_t k = 0; k < horizon; ++k) tracker.push(set[sampler.next()]);
    const double t = tracker.tau();
    if (t <= 0.0) {
      ++zeros;
      continue;
    }
    const double l = std::log(t);
    sum += l;
    sum_sq += l * l;
    ++used;
  }
  BlockRateEstimate est;
  est.zero_fraction = static_cast<double>(zeros) / static_cast<double>(blocks);
  est.blocks_used = used;
  if (used == 0)
    throw Error(ErrorKind::AllBlocksDegenerate, "every block product is already rank one (rate 0)", -1, 0.0);
  const double u = static_cast<double>(used);
  est.log_mean = sum / u;
  const double var = used > 1 ? std::max(0.0, (sum_sq - u * est.log_mean * est.log_mean) / (u - 1.0)) : 0.0;
  est.log_std_error = std::sqrt(var / u);
  est.factor = std::exp(est.log_mean);
  est.per_step = std::exp(est.log_mean / static_cast<double>(horizon));
  return est;
}

}  // namespace stochlyap
