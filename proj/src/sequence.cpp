#include "stochlyap/sequence.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "stochlyap/graph.hpp"

namespace stochlyap {

namespace {

void check_distribution(const std::vector<double>& p, const std::string& what) {
  if (p.empty()) throw Error(ErrorKind::InvalidDistribution, what + " is empty");
  double sum = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (!(p[i] >= 0.0))
      throw Error(ErrorKind::InvalidDistribution, what + " has negative entry at " + std::to_string(i),
                  static_cast<long>(i), p[i]);
    sum += p[i];
  }
  if (std::abs(sum - 1.0) > kDistributionTolerance)
    throw Error(ErrorKind::InvalidDistribution, what + " sums to " + std::to_string(sum), -1, sum);
}

std::vector<double> row_of(const Matrix& m, std::size_t i) {
  std::vector<double> r(static_cast<std::size_t>(m.cols()));
  for (Eigen::Index j = 0; j < m.cols(); ++j) r[static_cast<std::size_t>(j)] = m(static_cast<Eigen::Index>(i), j);
  return r;
}

std::vector<double> propagate(const std::vector<double>& v, const Matrix& transition) {
  std::vector<double> out(v.size(), 0.0);
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (v[i] == 0.0) continue;
    for (std::size_t j = 0; j < v.size(); ++j)
      out[j] += v[i] * transition(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  }
  return out;
}

double l1_distance(const std::vector<double>& a, const std::vector<double>& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d += std::abs(a[i] - b[i]);
  return d;
}

}  // namespace

FiniteMatrixSet::FiniteMatrixSet(std::vector<StochasticMatrix> matrices, std::vector<std::string> labels)
    : matrices_(std::move(matrices)), labels_(std::move(labels)) {
  if (matrices_.empty()) throw Error(ErrorKind::EmptySequence, "matrix set must contain at least one matrix");
  for (std::size_t i = 1; i < matrices_.size(); ++i)
    if (matrices_[i].size() != matrices_[0].size())
      throw Error(ErrorKind::DimensionMismatch, "matrix " + std::to_string(i) + " has a different dimension");
  if (labels_.empty())
    for (std::size_t i = 0; i < matrices_.size(); ++i) labels_.push_back("F" + std::to_string(i));
  if (labels_.size() != matrices_.size())
    throw Error(ErrorKind::DimensionMismatch, "label count does not match matrix count");
}

double min_positive_entry(const FiniteMatrixSet& set) {
  double best = 1.0;
  for (const auto& m : set.matrices()) best = std::min(best, min_positive_entry(m));
  return best;
}

SequenceModel SequenceModel::iid(std::vector<double> weights, std::uint64_t seed) {
  check_distribution(weights, "IID weights");
  return SequenceModel(Iid{std::move(weights)}, seed);
}

SequenceModel SequenceModel::markov(std::vector<double> initial, Matrix transition, std::uint64_t seed) {
  check_distribution(initial, "initial distribution");
  if (transition.rows() != transition.cols() || static_cast<std::size_t>(transition.rows()) != initial.size())
    throw Error(ErrorKind::DimensionMismatch, "transition matrix must be square and match the initial law");
  for (Eigen::Index i = 0; i < transition.rows(); ++i)
    check_distribution(row_of(transition, static_cast<std::size_t>(i)), "transition row " + std::to_string(i));
  return SequenceModel(MarkovModulated{std::move(initial), std::move(transition)}, seed);
}

SequenceModel SequenceModel::scripted(std::vector<std::size_t> indices, std::uint64_t seed) {
  if (indices.empty()) throw Error(ErrorKind::InvalidDistribution, "scripted sequence is empty");
  return SequenceModel(Scripted{std::move(indices)}, seed);
}

SequenceModel SequenceModel::stationary_markov(Matrix transition, std::uint64_t seed) {
  auto v = stationary_distribution(transition);
  return markov(std::move(v), std::move(transition), seed);
}

SequenceModel SequenceModel::with_seed(std::uint64_t seed) const { return SequenceModel(variant_, seed); }

std::size_t SequenceModel::alphabet_size() const {
  if (const auto* iid = std::get_if<Iid>(&variant_)) return iid->weights.size();
  if (const auto* mm = std::get_if<MarkovModulated>(&variant_)) return mm->initial.size();
  const auto& s = std::get<Scripted>(variant_);
  return *std::max_element(s.indices.begin(), s.indices.end()) + 1;
}

std::vector<double> SequenceModel::marginal_at(std::size_t position) const {
  if (const auto* iid = std::get_if<Iid>(&variant_)) return iid->weights;
  if (const auto* mm = std::get_if<MarkovModulated>(&variant_)) {
    std::vector<double> v = mm->initial;
    for (std::size_t k = 0; k < position; ++k) v = propagate(v, mm->transition);
    return v;
  }
  const auto& s = std::get<Scripted>(variant_);
  std::vector<double> v(alphabet_size(), 0.0);
  v[s.indices[position % s.indices.size()]] = 1.0;
  return v;
}

bool SequenceModel::is_stationary(double tol) const {
  if (is_iid()) return true;
  if (const auto* mm = std::get_if<MarkovModulated>(&variant_))
    return l1_distance(propagate(mm->initial, mm->transition), mm->initial) <= tol;
  return false;
}

SequenceSampler::SequenceSampler(const SequenceModel& model, std::uint64_t seed) : model_(&model), rng_(seed) {}

std::size_t SequenceSampler::next() {
  const auto& v = model_->variant();
  std::size_t symbol = 0;
  if (const auto* iid = std::get_if<Iid>(&v)) {
    symbol = rng_.categorical(iid->weights);
  } else if (const auto* mm = std::get_if<MarkovModulated>(&v)) {
    if (position_ == 0) {
      symbol = rng_.categorical(mm->initial);
    } else {
      const Vector row = mm->transition.row(static_cast<Eigen::Index>(previous_)).transpose();
      symbol = rng_.categorical(std::span<const double>(row.data(), static_cast<std::size_t>(row.size())));
    }
  } else {
    const auto& s = std::get<Scripted>(v);
    symbol = s.indices[position_ % s.indices.size()];
  }
  previous_ = symbol;
  ++position_;
  return symbol;
}

SampledSequence sample(const SequenceModel& model, std::size_t length, std::uint64_t seed) {
  if (length == 0) throw Error(ErrorKind::EmptySequence, "sample length must be at least 1");
  SequenceSampler sampler(model, seed);
  SampledSequence out{{}, seed};
  out.indices.reserve(length);
  for (std::size_t k = 0; k < length; ++k) out.indices.push_back(sampler.next());
  return out;
}

SampledSequence sample(const SequenceModel& model, std::size_t length) { return sample(model, length, model.seed()); }

std::vector<double> stationary_distribution(const Matrix& transition) {
  const auto pi = validate(transition);
  if (!is_strongly_connected(transition_graph(pattern_of(pi))))
    throw Error(ErrorKind::Reducible, "transition matrix is reducible; stationary law is not unique");
  const std::size_t n = pi.size();
  // The lazy chain (I + P) / 2 shares the stationary law and is aperiodic, so
  // power iteration converges for periodic chains too.
  const Matrix lazy = 0.5 * (Matrix::Identity(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n)) + transition);
  Eigen::RowVectorXd v = Eigen::RowVectorXd::Constant(static_cast<Eigen::Index>(n), 1.0 / static_cast<double>(n));
  for (std::size_t it = 0; it < 10'000'000; ++it) {
    Eigen::RowVectorXd next = v * lazy;
    next /= next.sum();
    const double residual = (next * transition - next).lpNorm<1>();
    v = next;
    if (residual < 1e-13) break;
  }
  return std::vector<double>(v.data(), v.data() + v.size());
}

double WindowLaw::first_probability(std::size_t symbol) const {
  return markov ? first[symbol] : independent[0][symbol];
}

double WindowLaw::step_probability(std::size_t position, std::size_t previous, std::size_t symbol) const {
  return markov ? transition(static_cast<Eigen::Index>(previous), static_cast<Eigen::Index>(symbol))
                : independent[position][symbol];
}

WindowLaw window_law(const SequenceModel& model, std::size_t start, std::size_t h) {
  WindowLaw law;
  law.alphabet = model.alphabet_size();
  if (const auto* mm = std::get_if<MarkovModulated>(&model.variant())) {
    law.markov = true;
    law.first = model.marginal_at(start);
    law.transition = mm->transition;
  } else {
    for (std::size_t k = 0; k < h; ++k) law.independent.push_back(model.marginal_at(start + k));
  }
  return law;
}

WindowLaw continuation_law(const SequenceModel& model, std::size_t current, std::size_t h) {
  WindowLaw law;
  law.alphabet = model.alphabet_size();
  if (current >= law.alphabet) throw Error(ErrorKind::DimensionMismatch, "current symbol outside the alphabet");
  if (const auto* mm = std::get_if<MarkovModulated>(&model.variant())) {
    law.markov = true;
    law.first = row_of(mm->transition, current);
    law.transition = mm->transition;
  } else if (const auto* iid = std::get_if<Iid>(&model.variant())) {
    law.independent.assign(h, iid->weights);
  } else {
    throw Error(ErrorKind::InvalidDistribution, "scripted signals have no conditional continuation law");
  }
  return law;
}

void check_enumeration_size(std::size_t alphabet, std::size_t h, double limit) {
  const double words = std::pow(static_cast<double>(alphabet), static_cast<double>(h));
  if (words > limit)
    throw Error(ErrorKind::EnumerationTooLarge,
                std::to_string(alphabet) + "^" + std::to_string(h) + " words exceeds the enumeration limit", -1,
                words);
}

WindowClassProbabilities window_class_probabilities(const FiniteMatrixSet& set, const SequenceModel& model,
                                                    std::size_t start, std::size_t h) {
  if (h == 0) throw Error(ErrorKind::EmptySequence, "window length must be at least 1");
  if (model.alphabet_size() > set.count())
    throw Error(ErrorKind::DimensionMismatch, "model emits indices outside the matrix set");
  check_enumeration_size(model.alphabet_size(), h);
  const WindowLaw law = window_law(model, start, h);
  const std::size_t n = set.dimension();
  WindowClassProbabilities out;
  for_each_word(
      law, h, Matrix(Matrix::Identity(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n))),
      [&](const Matrix& acc, std::size_t s) -> Matrix { return set[s].entries() * acc; },
      [&](const Matrix& product, double p) {
        const auto w = StochasticMatrix::trusted(product);
        if (is_markov(w)) out.markov += p;
        if (is_scrambling(w)) out.scrambling += p;
        if (is_sia(w)) out.sia += p;
      });
  return out;
}

double window_class_probability(const FiniteMatrixSet& set, const SequenceModel& model, std::size_t start,
                                std::size_t h, WindowClass cls) {
  const auto all = window_class_probabilities(set, model, start, h);
  switch (cls) {
    case WindowClass::Scrambling: return all.scrambling;
    case WindowClass::Sia: return all.sia;
    case WindowClass::Markov: return all.markov;
  }
  return 0.0;
}

std::vector<std::size_t> window_starts(const SequenceModel& model, std::size_t cap) {
  if (model.is_iid() || model.is_stationary()) return {0};
  if (const auto* s = std::get_if<Scripted>(&model.variant())) {
    std::vector<std::size_t> out(s->indices.size());
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = k;
    return out;
  }
  const auto& mm = std::get<MarkovModulated>(model.variant());
  std::vector<std::vector<double>> seen{mm.initial};
  std::vector<std::size_t> out{0};
  for (std::size_t k = 1; k < cap; ++k) {
    auto next = propagate(seen.back(), mm.transition);
    const bool repeats = std::any_of(seen.begin(), seen.end(),
                                     [&](const std::vector<double>& v) { return l1_distance(v, next) <= 1e-12; });
    if (repeats) break;
    seen.push_back(std::move(next));
    out.push_back(k);
  }
  return out;
}

}  // namespace stochlyap
