#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "stochlyap/matrix.hpp"
#include "stochlyap/random.hpp"

namespace stochlyap {

inline constexpr double kDistributionTolerance = 1e-12;
inline constexpr double kMaxWindowWords = 1e7;

/// The finite set {F_1, ..., F_m} every sequence draws from.
class FiniteMatrixSet {
 public:
  FiniteMatrixSet(std::vector<StochasticMatrix> matrices, std::vector<std::string> labels = {});

  std::size_t count() const noexcept { return matrices_.size(); }
  std::size_t dimension() const noexcept { return matrices_.front().size(); }
  const StochasticMatrix& operator[](std::size_t i) const { return matrices_[i]; }
  const std::vector<StochasticMatrix>& matrices() const noexcept { return matrices_; }
  const std::vector<std::string>& labels() const noexcept { return labels_; }

 private:
  std::vector<StochasticMatrix> matrices_;
  std::vector<std::string> labels_;
};

double min_positive_entry(const FiniteMatrixSet& set);

struct Iid {
  std::vector<double> weights;
};
struct MarkovModulated {
  std::vector<double> initial;
  Matrix transition;
};
/// Explicit index list; sampling past its end wraps around.
struct Scripted {
  std::vector<std::size_t> indices;
};

/// Law of the index process {omega_k} driving W(k) = F_{omega_k}.
/// Position 0 of a sampled sequence is the factor W(1).
class SequenceModel {
 public:
  using Variant = std::variant<Iid, MarkovModulated, Scripted>;

  static SequenceModel iid(std::vector<double> weights, std::uint64_t seed = 0);
  static SequenceModel markov(std::vector<double> initial, Matrix transition, std::uint64_t seed = 0);
  static SequenceModel scripted(std::vector<std::size_t> indices, std::uint64_t seed = 0);
  /// Markov model started from the stationary distribution of `transition`.
  static SequenceModel stationary_markov(Matrix transition, std::uint64_t seed = 0);

  const Variant& variant() const noexcept { return variant_; }
  std::uint64_t seed() const noexcept { return seed_; }
  SequenceModel with_seed(std::uint64_t seed) const;

  /// Number of distinct symbols the model can emit (for Scripted: max index + 1).
  std::size_t alphabet_size() const;
  bool is_iid() const noexcept { return std::holds_alternative<Iid>(variant_); }
  bool is_markov() const noexcept { return std::holds_alternative<MarkovModulated>(variant_); }
  bool is_scripted() const noexcept { return std::holds_alternative<Scripted>(variant_); }

  /// Distribution of the symbol at `position`.
  std::vector<double> marginal_at(std::size_t position) const;
  /// True for IID and for Markov models whose initial law is stationary.
  bool is_stationary(double tol = 1e-10) const;

 private:
  SequenceModel(Variant v, std::uint64_t seed) : variant_(std::move(v)), seed_(seed) {}
  Variant variant_;
  std::uint64_t seed_ = 0;
};

/// Streaming draw of one realisation; used where the history is never needed.
class SequenceSampler {
 public:
  SequenceSampler(const SequenceModel& model, std::uint64_t seed);
  explicit SequenceSampler(const SequenceModel& model) : SequenceSampler(model, model.seed()) {}
  std::size_t next();

 private:
  const SequenceModel* model_;
  Rng rng_;
  std::size_t position_ = 0;
  std::size_t previous_ = 0;
};

struct SampledSequence {
  std::vector<std::size_t> indices;
  std::uint64_t seed = 0;
};

SampledSequence sample(const SequenceModel& model, std::size_t length);
SampledSequence sample(const SequenceModel& model, std::size_t length, std::uint64_t seed);

std::vector<double> stationary_distribution(const Matrix& transition);

/// Law of a finite window of symbols: either independent per-position
/// distributions or a Markov chain with a given first-symbol law.
struct WindowLaw {
  std::vector<std::vector<double>> independent;  // used when `markov` is false
  std::vector<double> first;                     // used when `markov` is true
  Matrix transition;
  bool markov = false;
  std::size_t alphabet = 0;

  double first_probability(std::size_t symbol) const;
  double step_probability(std::size_t position, std::size_t previous, std::size_t symbol) const;
};

/// Window of h symbols starting at sequence position `start`.
WindowLaw window_law(const SequenceModel& model, std::size_t start, std::size_t h);
/// The h symbols following a current symbol `current` (IID or Markov only).
WindowLaw continuation_law(const SequenceModel& model, std::size_t current, std::size_t h);

void check_enumeration_size(std::size_t alphabet, std::size_t h, double limit = kMaxWindowWords);

/// Depth-first walk over every positive-probability word of length h.
/// `extend(state, symbol)` builds the child state; `visit(state, prob)` is
/// called once per complete word.
template <class State, class Extend, class Visit>
void for_each_word(const WindowLaw& law, std::size_t h, const State& root, Extend&& extend, Visit&& visit) {
  struct Rec {
    const WindowLaw& law;
    std::size_t h;
    Extend& extend;
    Visit& visit;
    void go(const State& state, std::size_t depth, std::size_t previous, double prob) {
      if (depth == h) {
        visit(state, prob);
        return;
      }
      for (std::size_t s = 0; s < law.alphabet; ++s) {
        const double p = depth == 0 ? law.first_probability(s) : law.step_probability(depth, previous, s);
        if (p <= 0.0) continue;
        go(extend(state, s), depth + 1, s, prob * p);
      }
    }
  };
  Rec{law, h, extend, visit}.go(root, 0, 0, 1.0);
}

enum class WindowClass { Scrambling, Sia, Markov };

struct WindowClassProbabilities {
  double scrambling = 0.0;
  double sia = 0.0;
  double markov = 0.0;
};

/// Exact probability that W(start+h, start) lies in each class, by enumerating
/// all words of the window (conditioned on the marginal law at `start`).
WindowClassProbabilities window_class_probabilities(const FiniteMatrixSet& set, const SequenceModel& model,
                                                    std::size_t start, std::size_t h);
double window_class_probability(const FiniteMatrixSet& set, const SequenceModel& model, std::size_t start,
                                std::size_t h, WindowClass cls);

/// Window starts that cover one period of the modulating law: {0} for IID and
/// stationary Markov, the script length for Scripted, and the start positions
/// until the Markov marginal repeats (capped) otherwise.
std::vector<std::size_t> window_starts(const SequenceModel& model, std::size_t cap = 256);

}  // namespace stochlyap
