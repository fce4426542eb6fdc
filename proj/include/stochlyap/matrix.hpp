#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "stochlyap/error.hpp"

namespace stochlyap {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

inline constexpr double kRowSumTolerance = 1e-12;

/// Row-stochastic dense matrix. Immutable once built; the only ways in are
/// validate() and the internal product routines.
class StochasticMatrix {
 public:
  StochasticMatrix() = default;

  std::size_t size() const noexcept { return static_cast<std::size_t>(entries_.rows()); }
  const Matrix& entries() const noexcept { return entries_; }
  double operator()(std::size_t i, std::size_t j) const { return entries_(i, j); }

  static StochasticMatrix identity(std::size_t n);
  /// Wraps a matrix already known to be stochastic (products of validated
  /// factors, identity-row substitutions). No checks are performed.
  static StochasticMatrix trusted(Matrix entries);

  friend bool operator==(const StochasticMatrix& a, const StochasticMatrix& b) {
    return a.entries_ == b.entries_;
  }

 private:
  explicit StochasticMatrix(Matrix entries) : entries_(std::move(entries)) {}
  Matrix entries_;
};

StochasticMatrix validate(const Matrix& entries);
StochasticMatrix validate(const std::vector<std::vector<double>>& rows);

/// Zero/positive pattern with strict `> 0`. Rows are packed into 64-bit words
/// so pattern powers stay cheap for a few hundred states.
class MatrixPattern {
 public:
  MatrixPattern() = default;
  explicit MatrixPattern(std::size_t n);
  explicit MatrixPattern(const Matrix& entries);

  std::size_t size() const noexcept { return n_; }
  bool test(std::size_t i, std::size_t j) const {
    return (bits_[i * words_ + j / 64] >> (j % 64)) & 1u;
  }
  void set(std::size_t i, std::size_t j) { bits_[i * words_ + j / 64] |= (std::uint64_t{1} << (j % 64)); }

  /// Boolean product: (this * rhs)(i,j) = OR_k this(i,k) AND rhs(k,j).
  MatrixPattern times(const MatrixPattern& rhs) const;
  bool rows_intersect(std::size_t i, std::size_t j) const;

  friend bool operator==(const MatrixPattern&, const MatrixPattern&) = default;
  friend bool operator<(const MatrixPattern& a, const MatrixPattern& b) { return a.bits_ < b.bits_; }

 private:
  std::size_t n_ = 0;
  std::size_t words_ = 0;
  std::vector<std::uint64_t> bits_;
};

struct MatrixClass {
  bool is_scrambling = false;
  bool is_sia = false;
  bool is_markov = false;
  std::size_t period = 1;
};

MatrixPattern pattern_of(const StochasticMatrix& a);

/// Coefficient of ergodicity: 1 - min over row pairs of sum_s min(a_is, a_js).
double tau(const StochasticMatrix& a);

bool is_scrambling(const StochasticMatrix& a);
bool is_markov(const StochasticMatrix& a);
bool is_sia(const StochasticMatrix& a);
std::size_t pattern_period(const StochasticMatrix& a);
MatrixClass classify(const StochasticMatrix& a);

bool same_type(const StochasticMatrix& a, const StochasticMatrix& b);

/// W(last) ... W(first): later matrices multiply on the left.
StochasticMatrix backward_product(std::span<const StochasticMatrix> seq);
StochasticMatrix multiply(const StochasticMatrix& left, const StochasticMatrix& right);

double spread(const Vector& x);
double min_positive_entry(const StochasticMatrix& a);

}  // namespace stochlyap
