#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "stochlyap/graph.hpp"
#include "stochlyap/matrix.hpp"
#include "stochlyap/parallel.hpp"
#include "stochlyap/sequence.hpp"

namespace stochlyap {

inline constexpr double kRankCutoff = 1e-12;        // relative singular-value cutoff
inline constexpr double kConsistencyTolerance = 1e-8;

struct EquationBlock {
  Matrix a;  // n_i x m
  Vector b;  // n_i
};

/// Ax = b split row-wise across agents. Construction checks that every
/// block has m columns and that the stacked system is consistent.
class PartitionedLinearSystem {
 public:
  explicit PartitionedLinearSystem(std::vector<EquationBlock> blocks);

  std::size_t agents() const noexcept { return blocks_.size(); }
  std::size_t unknowns() const noexcept { return m_; }
  const std::vector<EquationBlock>& blocks() const noexcept { return blocks_; }
  const EquationBlock& block(std::size_t i) const { return blocks_[i]; }
  Matrix stacked_a() const;
  Vector stacked_b() const;
  /// |A x - b|_inf over the stacked system.
  double residual(const Vector& x) const;

 private:
  std::vector<EquationBlock> blocks_;
  std::size_t m_ = 0;
};

/// Orthogonal projector onto ker(a).
Matrix kernel_projection(const Matrix& a);

/// Minimum-norm solution of a x = b; throws InconsistentBlock when the
/// residual exceeds 1e-10 (relative to max(1, |b|)).
Vector initial_estimate(const Matrix& a, const Vector& b);

struct ProjectionSet {
  std::vector<Matrix> projections;
};
ProjectionSet projections_of(const PartitionedLinearSystem& system);

struct SolverState {
  std::vector<Vector> estimates;
  std::size_t k = 1;
};

SolverState initial_state(const PartitionedLinearSystem& system);

/// One synchronous round of x_i <- x_i - P_i (d_i x_i - sum_{j in N_i} x_j) / d_i,
/// with N_i the in-neighbours of i (self included). Agents update in
/// parallel from the same snapshot; Serial is the reference path.
SolverState step(const SolverState& state, const DirectedGraph& graph, const ProjectionSet& projections,
                 Execution exec = Execution::Serial);

/// W = D^{-1} A^T for the adjacency A of g: w_ij = 1/d_i when j is an
/// in-neighbour of i.
StochasticMatrix averaging_matrix(const DirectedGraph& g);

/// Block-diagonal diag(P_1, ..., P_n).
Matrix block_projection(const ProjectionSet& projections);

/// Infinity norm of the n x n matrix of blockwise spectral norms of q,
/// whose blocks are m x m.
double mixed_matrix_norm(const Matrix& q, std::size_t m);

struct ErrorTransition {
  Matrix phi;  // Phi(k+T, k), later graphs on the left
  double norm = 0.0;
};

/// Product of P (W(j) kron I) P over the given graphs in order.
ErrorTransition error_transition(std::span<const DirectedGraph> graphs, const ProjectionSet& projections);

/// Propagates e_{k+1} = P (W kron I) P e_k for one graph.
Vector propagate_error(const Vector& e, const DirectedGraph& graph, const ProjectionSet& projections);

/// Stacks agent vectors into one nm vector.
Vector stack(const std::vector<Vector>& parts);

/// Candidate communication graphs (all with self-loops) and a signal that
/// picks one per iteration.
struct GraphSequenceModel {
  std::vector<DirectedGraph> graphs;
  SequenceModel model;
  std::size_t l = 1;

  GraphSequenceModel(std::vector<DirectedGraph> graphs, SequenceModel model, std::size_t l = 1);
  std::size_t agents() const { return graphs.front().size(); }
};

/// Exact minimum over window starts of P(composition of an l-window is
/// strongly connected).
double check_condition_a(const GraphSequenceModel& model, std::size_t l);

struct SolverOptions {
  std::size_t max_iters = 100000;
  double tol = 1e-8;
  std::size_t record_every = 1;  // trace stride; the final iterate is always recorded
  Execution exec = Execution::Serial;
};

struct SolverIterate {
  std::size_t k = 0;
  double disagreement = 0.0;  // max_{i,j} |x_i - x_j|_inf
  double residual = 0.0;      // |A xbar - b|_inf at the agent mean
  double feasibility = 0.0;   // max_i |A_i x_i - b_i|_inf
};

struct SolverReport {
  bool converged = false;
  std::size_t iters = 0;
  double disagreement = 0.0;
  double residual = 0.0;
  double max_feasibility = 0.0;  // worst over every iteration, recorded or not
  Vector solution;               // agent mean at exit
  std::uint64_t seed = 0;
  std::vector<SolverIterate> trace;
  std::optional<double> fitted_rate;  // per-iteration decay of the disagreement
};

SolverReport run_solver(const PartitionedLinearSystem& system, const GraphSequenceModel& model,
                        const SolverOptions& options, std::uint64_t seed);

struct ContractionWindow {
  std::optional<std::size_t> smallest;  // shortest T with a positive-probability contracting window
  std::size_t proof_window = 0;         // (n - 1)^2 l
  double contracting_probability = 0.0; // at `smallest`, min over window starts
  double mean_norm = 1.0;               // E |||Phi||| at `smallest`, max over window starts
  double rate_estimate = 1.0;           // mean_norm^(1/T)
};

/// Searches T = 1..t_max by exact enumeration of the graph words (throws
/// EnumerationTooLarge past 1e5 words per start).
ContractionWindow find_contracting_window(const PartitionedLinearSystem& system, const GraphSequenceModel& model,
                                          std::size_t t_max);

}  // namespace stochlyap
