#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "stochlyap/matrix.hpp"
#include "stochlyap/sequence.hpp"

using namespace stochlyap;

namespace {

Matrix switching_pi() { return (Matrix(3, 3) << 0, 0.4, 0.6, 1, 0, 0, 1, 0, 0).finished(); }

StochasticMatrix sm(std::vector<std::vector<double>> rows) { return validate(rows); }

const StochasticMatrix kScrambling = sm({{0.5, 0.5, 0}, {0, 0.5, 0.5}, {0.5, 0, 0.5}});
const StochasticMatrix kCycle = sm({{0, 1, 0}, {0, 0, 1}, {1, 0, 0}});

}  // namespace

TEST(Sample, ScriptedReturnsItsIndices) {
  const auto s = sample(SequenceModel::scripted({1, 2, 1}), 3);
  EXPECT_EQ(s.indices, (std::vector<std::size_t>{1, 2, 1}));
}

TEST(Sample, ScriptedWraps) {
  const auto s = sample(SequenceModel::scripted({0, 1}), 5);
  EXPECT_EQ(s.indices, (std::vector<std::size_t>{0, 1, 0, 1, 0}));
}

TEST(Sample, DegenerateIid) {
  const auto s = sample(SequenceModel::iid({1, 0, 0}, 9), 50);
  for (auto i : s.indices) EXPECT_EQ(i, 0u);
}

TEST(Sample, SwitchingChainLeavesStateZeroForOneOrTwo) {
  const auto model = SequenceModel::markov({1, 0, 0}, switching_pi(), 3);
  const auto s = sample(model, 1000);
  ASSERT_EQ(s.indices[0], 0u);
  for (std::size_t k = 1; k < s.indices.size(); ++k) {
    if (s.indices[k - 1] == 0)
      EXPECT_NE(s.indices[k], 0u);
    else
      EXPECT_EQ(s.indices[k], 0u);
  }
}

TEST(Sample, DeterministicForASeed) {
  const auto model = SequenceModel::iid({0.2, 0.3, 0.5}, 42);
  EXPECT_EQ(sample(model, 500).indices, sample(model, 500).indices);
  EXPECT_NE(sample(model, 500, 1).indices, sample(model, 500, 2).indices);
  EXPECT_EQ(sample(model, 10).seed, 42u);
}

TEST(Sample, RejectsEmptyLengthAndBadDistributions) {
  EXPECT_THROW(sample(SequenceModel::iid({1.0}), 0), Error);
  EXPECT_THROW(SequenceModel::iid({0.5, 0.6}), Error);
  EXPECT_THROW(SequenceModel::iid({1.5, -0.5}), Error);
  EXPECT_THROW(SequenceModel::markov({0.5, 0.5}, (Matrix(2, 2) << 1, 0, 0.5, 0.4).finished()), Error);
}

TEST(Stationary, Examples) {
  EXPECT_THROW(stationary_distribution(Matrix::Identity(2, 2)), Error);
  const auto swap = stationary_distribution((Matrix(2, 2) << 0, 1, 1, 0).finished());
  EXPECT_NEAR(swap[0], 0.5, 1e-12);
  EXPECT_NEAR(swap[1], 0.5, 1e-12);
  const auto v = stationary_distribution(switching_pi());
  EXPECT_NEAR(v[0], 0.5, 1e-12);
  EXPECT_NEAR(v[1], 0.2, 1e-12);
  EXPECT_NEAR(v[2], 0.3, 1e-12);
}

TEST(Stationary, FixedPointOnRandomIrreducibleChains) {
  Rng rng(5);
  for (int t = 0; t < 200; ++t) {
    const std::size_t n = 2 + rng.below(6);
    Matrix pi = oracle::random_stochastic(rng, n, 0.4);
    // A Hamiltonian cycle keeps the chain irreducible.
    for (std::size_t i = 0; i < n; ++i) pi(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>((i + 1) % n)) += 0.1;
    for (Eigen::Index i = 0; i < pi.rows(); ++i) pi.row(i) /= pi.row(i).sum();
    const auto v = stationary_distribution(pi);
    const Eigen::Map<const Vector> vv(v.data(), static_cast<Eigen::Index>(n));
    EXPECT_LT((pi.transpose() * vv - vv).lpNorm<1>(), 1e-12);
    EXPECT_NEAR(vv.sum(), 1.0, 1e-12);
  }
}

TEST(Model, StationarityQuery) {
  EXPECT_TRUE(SequenceModel::iid({0.5, 0.5}).is_stationary());
  EXPECT_TRUE(SequenceModel::stationary_markov(switching_pi()).is_stationary());
  EXPECT_FALSE(SequenceModel::markov({1, 0, 0}, switching_pi()).is_stationary());
}

TEST(Model, MarginalPropagation) {
  const auto model = SequenceModel::markov({1, 0, 0}, switching_pi());
  const auto m1 = model.marginal_at(1);
  EXPECT_NEAR(m1[1], 0.4, 1e-15);
  EXPECT_NEAR(m1[2], 0.6, 1e-15);
  EXPECT_NEAR(model.marginal_at(2)[0], 1.0, 1e-15);
}

TEST(WindowProbability, SingleScramblingMatrix) {
  const FiniteMatrixSet set({kScrambling});
  EXPECT_DOUBLE_EQ(window_class_probability(set, SequenceModel::iid({1.0}), 0, 1, WindowClass::Scrambling), 1.0);
}

TEST(WindowProbability, IdentityAndScramblingHalf) {
  const FiniteMatrixSet set({StochasticMatrix::identity(3), kScrambling});
  EXPECT_DOUBLE_EQ(window_class_probability(set, SequenceModel::iid({0.5, 0.5}), 0, 1, WindowClass::Scrambling),
                   0.5);
}

TEST(WindowProbability, SwitchingChainWordsFromStateZero) {
  // Tag each mode with a distinguishable matrix: only the words (1,0) and
  // (2,0) have positive probability, 0.4 and 0.6.
  const FiniteMatrixSet set({sm({{1, 0}, {0, 1}}), sm({{1, 0}, {1, 0}}), sm({{0, 1}, {0, 1}})});
  const auto model = SequenceModel::markov({1, 0, 0}, switching_pi());
  const WindowLaw law = window_law(model, 1, 2);
  std::map<std::vector<std::size_t>, double> words;
  for_each_word(
      law, 2, std::vector<std::size_t>{},
      [](std::vector<std::size_t> w, std::size_t s) {
        w.push_back(s);
        return w;
      },
      [&](const std::vector<std::size_t>& w, double p) { words[w] += p; });
  ASSERT_EQ(words.size(), 2u);
  EXPECT_NEAR((words[{1, 0}]), 0.4, 1e-15);
  EXPECT_NEAR((words[{2, 0}]), 0.6, 1e-15);
}

TEST(WindowProbability, EnumerationGuard) {
  std::vector<StochasticMatrix> many(20, kScrambling);
  const FiniteMatrixSet set(many);
  const auto model = SequenceModel::iid(std::vector<double>(20, 0.05));
  EXPECT_THROW(window_class_probability(set, model, 0, 6, WindowClass::Sia), Error);
}

TEST(WindowProbability, ClassInclusionMonotone) {
  Rng rng(17);
  for (int t = 0; t < 200; ++t) {
    const std::size_t n = 2 + rng.below(4);
    std::vector<StochasticMatrix> mats;
    for (int i = 0; i < 3; ++i) mats.push_back(validate(oracle::random_stochastic(rng, n, 0.3, true)));
    const FiniteMatrixSet set(mats);
    const auto model = SequenceModel::iid({0.2, 0.3, 0.5});
    for (std::size_t h = 1; h <= 3; ++h) {
      const auto p = window_class_probabilities(set, model, 0, h);
      EXPECT_LE(p.markov, p.scrambling + 1e-15);
      EXPECT_LE(p.scrambling, p.sia + 1e-15);
    }
  }
}

TEST(WindowProbability, MatchesEmpiricalFrequency) {
  const FiniteMatrixSet set({kCycle, kScrambling, StochasticMatrix::identity(3)});
  const auto model = SequenceModel::stationary_markov(switching_pi(), 99);
  const std::size_t h = 2;
  const double p = window_class_probability(set, model, 0, h, WindowClass::Scrambling);
  const std::size_t windows = 100000;
  std::size_t hits = 0;
  for (std::size_t w = 0; w < windows; ++w) {
    SequenceSampler sampler(model, 1000 + w);
    const auto& a = set[sampler.next()];
    const auto& b = set[sampler.next()];
    hits += is_scrambling(multiply(b, a));
  }
  const double freq = static_cast<double>(hits) / static_cast<double>(windows);
  const double se = std::sqrt(p * (1 - p) / static_cast<double>(windows));
  EXPECT_NEAR(freq, p, 3 * se + 1e-12);
}

TEST(WindowProbability, StationaryPairLawIsShiftInvariant) {
  // The chain is periodic, so one path is locked to a phase; the law of the
  // pair at offsets 0 and 1 is compared across independent paths.
  const auto model = SequenceModel::stationary_markov(switching_pi());
  const std::size_t paths = 40000;
  double at0 = 0, at1 = 0;
  for (std::size_t r = 0; r < paths; ++r) {
    const auto s = sample(model, 3, r + 1);
    at0 += s.indices[0] == 0 && s.indices[1] == 1;
    at1 += s.indices[1] == 0 && s.indices[2] == 1;
  }
  const double p = 0.5 * 0.4;
  const double se = std::sqrt(p * (1 - p) / static_cast<double>(paths));
  EXPECT_NEAR(at0 / paths, p, 3 * se);
  EXPECT_NEAR(at1 / paths, p, 3 * se);
}

TEST(WindowStarts, CoverOneModulatingPeriod) {
  EXPECT_EQ(window_starts(SequenceModel::iid({1.0})), std::vector<std::size_t>{0});
  EXPECT_EQ(window_starts(SequenceModel::scripted({0, 1, 2})), (std::vector<std::size_t>{0, 1, 2}));
  // From state 0 the marginal alternates between e_0 and (0, 0.4, 0.6).
  EXPECT_EQ(window_starts(SequenceModel::markov({1, 0, 0}, switching_pi())).size(), 2u);
}

TEST(MatrixSet, MinPositiveEntryAndValidation) {
  EXPECT_DOUBLE_EQ(min_positive_entry(FiniteMatrixSet({kScrambling, StochasticMatrix::identity(3)})), 0.5);
  EXPECT_THROW(FiniteMatrixSet({}), Error);
  EXPECT_THROW(FiniteMatrixSet({kScrambling, StochasticMatrix::identity(2)}), Error);
}

TEST(MatrixSet, PartitionExampleWeightsMinimum) {
  const auto w = validate(oracle::uniform_in_weights(oracle::partition_example_graph()));
  // Vertices 0 and 5 each average two in-neighbours; the rest copy one.
  EXPECT_DOUBLE_EQ(min_positive_entry(FiniteMatrixSet({w})), 0.5);
}
