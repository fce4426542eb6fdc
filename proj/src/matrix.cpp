#include "stochlyap/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

#include "stochlyap/graph.hpp"

namespace stochlyap {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::NegativeEntry: return "NegativeEntry";
    case ErrorKind::RowSumViolation: return "RowSumViolation";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::EmptySequence: return "EmptySequence";
    case ErrorKind::InvalidDistribution: return "InvalidDistribution";
    case ErrorKind::EnumerationTooLarge: return "EnumerationTooLarge";
    case ErrorKind::Reducible: return "Reducible";
    case ErrorKind::NoCertificate: return "NoCertificate";
    case ErrorKind::NoScramblingWindow: return "NoScramblingWindow";
    case ErrorKind::AllBlocksDegenerate: return "AllBlocksDegenerate";
    case ErrorKind::InsufficientData: return "InsufficientData";
    case ErrorKind::NonStationaryModel: return "NonStationaryModel";
    case ErrorKind::EmptyActivation: return "EmptyActivation";
    case ErrorKind::NotReachable: return "NotReachable";
    case ErrorKind::MissingSelfArc: return "MissingSelfArc";
    case ErrorKind::InconsistentBlock: return "InconsistentBlock";
    case ErrorKind::InconsistentSystem: return "InconsistentSystem";
    case ErrorKind::ConfigParse: return "ConfigParse";
  }
  return "Unknown";
}

StochasticMatrix StochasticMatrix::identity(std::size_t n) {
  return StochasticMatrix(Matrix::Identity(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n)));
}

StochasticMatrix StochasticMatrix::trusted(Matrix entries) { return StochasticMatrix(std::move(entries)); }

StochasticMatrix validate(const Matrix& entries) {
  if (entries.rows() != entries.cols() || entries.rows() == 0)
    throw Error(ErrorKind::DimensionMismatch,
                "matrix must be square and nonempty, got " + std::to_string(entries.rows()) + "x" +
                    std::to_string(entries.cols()));
  for (Eigen::Index i = 0; i < entries.rows(); ++i) {
    double sum = 0.0;
    for (Eigen::Index j = 0; j < entries.cols(); ++j) {
      const double v = entries(i, j);
      if (!(v >= 0.0))
        throw Error(ErrorKind::NegativeEntry,
                    "entry (" + std::to_string(i) + ", " + std::to_string(j) + ") = " + std::to_string(v),
                    static_cast<long>(i * entries.cols() + j), v);
      sum += v;
    }
    if (std::abs(sum - 1.0) > kRowSumTolerance)
      throw Error(ErrorKind::RowSumViolation, "row " + std::to_string(i) + " sums to " + std::to_string(sum),
                  static_cast<long>(i), sum);
  }
  return StochasticMatrix::trusted(entries);
}

StochasticMatrix validate(const std::vector<std::vector<double>>& rows) {
  const auto n = static_cast<Eigen::Index>(rows.size());
  Matrix m(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (static_cast<Eigen::Index>(rows[i].size()) != n)
      throw Error(ErrorKind::DimensionMismatch, "row " + std::to_string(i) + " has " +
                                                    std::to_string(rows[i].size()) + " entries, expected " +
                                                    std::to_string(n));
    for (Eigen::Index j = 0; j < n; ++j) m(i, j) = rows[i][j];
  }
  return validate(m);
}

MatrixPattern::MatrixPattern(std::size_t n) : n_(n), words_((n + 63) / 64), bits_(n * words_, 0) {}

MatrixPattern::MatrixPattern(const Matrix& entries) : MatrixPattern(static_cast<std::size_t>(entries.rows())) {
  for (std::size_t i = 0; i < n_; ++i)
    for (std::size_t j = 0; j < n_; ++j)
      if (entries(i, j) > 0.0) set(i, j);
}

MatrixPattern MatrixPattern::times(const MatrixPattern& rhs) const {
  MatrixPattern out(n_);
  for (std::size_t i = 0; i < n_; ++i) {
    std::uint64_t* dst = &out.bits_[i * words_];
    for (std::size_t k = 0; k < n_; ++k) {
      if (!test(i, k)) continue;
      const std::uint64_t* src = &rhs.bits_[k * words_];
      for (std::size_t w = 0; w < words_; ++w) dst[w] |= src[w];
    }
  }
  return out;
}

bool MatrixPattern::rows_intersect(std::size_t i, std::size_t j) const {
  for (std::size_t w = 0; w < words_; ++w)
    if (bits_[i * words_ + w] & bits_[j * words_ + w]) return true;
  return false;
}

MatrixPattern pattern_of(const StochasticMatrix& a) { return MatrixPattern(a.entries()); }

double tau(const StochasticMatrix& a) {
  const std::size_t n = a.size();
  const Matrix& e = a.entries();
  double min_overlap = 1.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      double overlap = 0.0;
      for (std::size_t s = 0; s < n; ++s) overlap += std::min(e(i, s), e(j, s));
      min_overlap = std::min(min_overlap, overlap);
    }
  return std::clamp(1.0 - min_overlap, 0.0, 1.0);
}

bool is_scrambling(const StochasticMatrix& a) {
  const MatrixPattern p = pattern_of(a);
  for (std::size_t i = 0; i < p.size(); ++i)
    for (std::size_t j = i + 1; j < p.size(); ++j)
      if (!p.rows_intersect(i, j)) return false;
  return true;
}

bool is_markov(const StochasticMatrix& a) {
  const Matrix& e = a.entries();
  for (Eigen::Index j = 0; j < e.cols(); ++j)
    if ((e.col(j).array() > 0.0).all()) return true;
  return false;
}

bool is_sia(const StochasticMatrix& a) {
  const DirectedGraph g = transition_graph(pattern_of(a));
  const Components c = strongly_connected_components(g);
  const auto closed = closed_components(g, c);
  return closed.size() == 1 && component_period(g, c, closed.front()) == 1;
}

std::size_t pattern_period(const StochasticMatrix& a) {
  const MatrixPattern base = pattern_of(a);
  std::map<MatrixPattern, std::size_t> seen;
  MatrixPattern current = base;
  for (std::size_t k = 1;; ++k) {
    auto [it, inserted] = seen.emplace(current, k);
    if (!inserted) return k - it->second;
    current = current.times(base);
  }
}

MatrixClass classify(const StochasticMatrix& a) {
  return MatrixClass{is_scrambling(a), is_sia(a), is_markov(a), pattern_period(a)};
}

bool same_type(const StochasticMatrix& a, const StochasticMatrix& b) {
  if (a.size() != b.size()) throw Error(ErrorKind::DimensionMismatch, "same_type: dimensions differ");
  return pattern_of(a) == pattern_of(b);
}

StochasticMatrix multiply(const StochasticMatrix& left, const StochasticMatrix& right) {
  if (left.size() != right.size()) throw Error(ErrorKind::DimensionMismatch, "multiply: dimensions differ");
  return StochasticMatrix::trusted(left.entries() * right.entries());
}

StochasticMatrix backward_product(std::span<const StochasticMatrix> seq) {
  if (seq.empty()) throw Error(ErrorKind::EmptySequence, "backward_product of an empty sequence");
  Matrix acc = seq.front().entries();
  for (std::size_t k = 1; k < seq.size(); ++k) {
    if (seq[k].size() != seq.front().size())
      throw Error(ErrorKind::DimensionMismatch, "backward_product: factor " + std::to_string(k) + " has size " +
                                                    std::to_string(seq[k].size()));
    acc = seq[k].entries() * acc;
  }
  return StochasticMatrix::trusted(std::move(acc));
}

double spread(const Vector& x) {
  if (x.size() == 0) return 0.0;
  return x.maxCoeff() - x.minCoeff();
}

double min_positive_entry(const StochasticMatrix& a) {
  double best = 1.0;
  const Matrix& e = a.entries();
  for (Eigen::Index i = 0; i < e.rows(); ++i)
    for (Eigen::Index j = 0; j < e.cols(); ++j)
      if (e(i, j) > 0.0) best = std::min(best, e(i, j));
  return best;
}

}  // namespace stochlyap
