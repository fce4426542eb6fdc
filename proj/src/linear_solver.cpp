#include "stochlyap/linear_solver.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/SVD>

#include "stochlyap/lyapunov.hpp"
#include "stochlyap/random.hpp"

namespace stochlyap {

namespace {

Eigen::Index idx(std::size_t i) { return static_cast<Eigen::Index>(i); }

std::size_t numerical_rank(const Eigen::JacobiSVD<Matrix>& svd) {
  const Vector& s = svd.singularValues();
  if (s.size() == 0 || s(0) <= 0.0) return 0;
  std::size_t r = 0;
  while (r < static_cast<std::size_t>(s.size()) && s(idx(r)) > kRankCutoff * s(0)) ++r;
  return r;
}

double inf_norm(const Vector& v) { return v.size() == 0 ? 0.0 : v.lpNorm<Eigen::Infinity>(); }

}  // namespace

PartitionedLinearSystem::PartitionedLinearSystem(std::vector<EquationBlock> blocks) : blocks_(std::move(blocks)) {
  if (blocks_.empty()) throw Error(ErrorKind::EmptySequence, "linear system needs at least one agent");
  m_ = static_cast<std::size_t>(blocks_.front().a.cols());
  if (m_ == 0) throw Error(ErrorKind::DimensionMismatch, "linear system has no unknowns");
  for (std::size_t i = 0; i < blocks_.size(); ++i) {
    const auto& blk = blocks_[i];
    if (static_cast<std::size_t>(blk.a.cols()) != m_ || blk.a.rows() != blk.b.size())
      throw Error(ErrorKind::DimensionMismatch, "block " + std::to_string(i) + " has inconsistent dimensions",
                  static_cast<long>(i));
  }
  const Matrix a = stacked_a();
  const Vector b = stacked_b();
  const Vector x = a.completeOrthogonalDecomposition().solve(b);
  const double r = residual(x);
  if (!(r < kConsistencyTolerance * std::max(1.0, inf_norm(b))))
    throw Error(ErrorKind::InconsistentSystem, "stacked system has no exact solution", -1, r);
}

Matrix PartitionedLinearSystem::stacked_a() const {
  Eigen::Index rows = 0;
  for (const auto& blk : blocks_) rows += blk.a.rows();
  Matrix out(rows, idx(m_));
  Eigen::Index at = 0;
  for (const auto& blk : blocks_) {
    out.middleRows(at, blk.a.rows()) = blk.a;
    at += blk.a.rows();
  }
  return out;
}

Vector PartitionedLinearSystem::stacked_b() const {
  Eigen::Index rows = 0;
  for (const auto& blk : blocks_) rows += blk.b.size();
  Vector out(rows);
  Eigen::Index at = 0;
  for (const auto& blk : blocks_) {
    out.segment(at, blk.b.size()) = blk.b;
    at += blk.b.size();
  }
  return out;
}

double PartitionedLinearSystem::residual(const Vector& x) const {
  double worst = 0.0;
  for (const auto& blk : blocks_) worst = std::max(worst, inf_norm(blk.a * x - blk.b));
  return worst;
}

Matrix kernel_projection(const Matrix& a) {
  const auto m = a.cols();
  Matrix p = Matrix::Identity(m, m);
  if (a.rows() == 0) return p;
  Eigen::JacobiSVD<Matrix> svd(a, Eigen::ComputeFullV);
  const auto r = idx(numerical_rank(svd));
  const auto basis = svd.matrixV().leftCols(r);
  p.noalias() -= basis * basis.transpose();
  return p;
}

Vector initial_estimate(const Matrix& a, const Vector& b) {
  if (a.rows() != b.size()) throw Error(ErrorKind::DimensionMismatch, "block rows and right-hand side differ");
  Vector x = Vector::Zero(a.cols());
  if (a.rows() > 0) {
    Eigen::JacobiSVD<Matrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto r = idx(numerical_rank(svd));
    const Vector coeff = (svd.matrixU().leftCols(r).transpose() * b).cwiseQuotient(svd.singularValues().head(r));
    x = svd.matrixV().leftCols(r) * coeff;
  }
  const double res = inf_norm(a * x - b);
  if (!(res < 1e-10 * std::max(1.0, inf_norm(b))))
    throw Error(ErrorKind::InconsistentBlock, "block equations have no exact solution", -1, res);
  return x;
}

ProjectionSet projections_of(const PartitionedLinearSystem& system) {
  ProjectionSet set;
  for (const auto& blk : system.blocks()) set.projections.push_back(kernel_projection(blk.a));
  return set;
}

SolverState initial_state(const PartitionedLinearSystem& system) {
  SolverState state;
  for (std::size_t i = 0; i < system.agents(); ++i) {
    try {
      state.estimates.push_back(initial_estimate(system.block(i).a, system.block(i).b));
    } catch (const Error& e) {
      throw Error(e.kind(), "agent " + std::to_string(i) + ": " + e.what(), static_cast<long>(i), e.value());
    }
  }
  return state;
}

namespace {

Vector agent_update(const SolverState& state, const DirectedGraph& graph, const ProjectionSet& projections,
                    std::size_t i) {
  const auto& x = state.estimates;
  if (!graph.has_edge(i, i))
    throw Error(ErrorKind::MissingSelfArc, "agent " + std::to_string(i) + " has no self-arc", static_cast<long>(i));
  Vector gap = Vector::Zero(x[i].size());
  double d = 0.0;
  for (std::size_t j = 0; j < graph.size(); ++j)
    if (graph.has_edge(j, i)) {
      gap += x[i] - x[j];
      d += 1.0;
    }
  return x[i] - projections.projections[i] * gap / d;
}

}  // namespace

SolverState step(const SolverState& state, const DirectedGraph& graph, const ProjectionSet& projections,
                 Execution exec) {
  const std::size_t n = state.estimates.size();
  if (graph.size() != n || projections.projections.size() != n)
    throw Error(ErrorKind::DimensionMismatch, "graph, projections and state disagree on the agent count");
  SolverState next;
  next.k = state.k + 1;
  next.estimates = map_trials(n, [&](std::size_t i) { return agent_update(state, graph, projections, i); }, exec);
  return next;
}

StochasticMatrix averaging_matrix(const DirectedGraph& g) {
  const std::size_t n = g.size();
  Matrix w = Matrix::Zero(idx(n), idx(n));
  for (std::size_t i = 0; i < n; ++i) {
    const auto in = g.in_neighbors(i);
    if (in.empty()) throw Error(ErrorKind::MissingSelfArc, "vertex has no in-neighbours", static_cast<long>(i));
    for (std::size_t j : in) w(idx(i), idx(j)) = 1.0 / static_cast<double>(in.size());
  }
  return StochasticMatrix::trusted(std::move(w));
}

Matrix block_projection(const ProjectionSet& projections) {
  const std::size_t n = projections.projections.size();
  const auto m = n == 0 ? 0 : projections.projections.front().rows();
  Matrix p = Matrix::Zero(idx(n) * m, idx(n) * m);
  for (std::size_t i = 0; i < n; ++i) p.block(idx(i) * m, idx(i) * m, m, m) = projections.projections[i];
  return p;
}

double mixed_matrix_norm(const Matrix& q, std::size_t m) {
  const auto bm = idx(m);
  if (m == 0 || q.rows() % bm != 0 || q.cols() % bm != 0 || q.rows() != q.cols())
    throw Error(ErrorKind::DimensionMismatch, "matrix is not a square array of m x m blocks");
  const auto n = q.rows() / bm;
  double worst = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    double row = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      const Matrix blk = q.block(i * bm, j * bm, bm, bm);
      if (blk.isZero(0.0)) continue;
      row += Eigen::JacobiSVD<Matrix>(blk).singularValues()(0);
    }
    worst = std::max(worst, row);
  }
  return worst;
}

ErrorTransition error_transition(std::span<const DirectedGraph> graphs, const ProjectionSet& projections) {
  if (graphs.empty()) throw Error(ErrorKind::EmptySequence, "error_transition needs at least one graph");
  const std::size_t n = projections.projections.size();
  const auto m = projections.projections.front().rows();
  const Matrix p = block_projection(projections);
  const Matrix eye = Matrix::Identity(m, m);
  Matrix phi = Matrix::Identity(idx(n) * m, idx(n) * m);
  for (const auto& g : graphs) {
    if (g.size() != n) throw Error(ErrorKind::DimensionMismatch, "graph size differs from the agent count");
    for (std::size_t v = 0; v < n; ++v)
      if (!g.has_edge(v, v))
        throw Error(ErrorKind::MissingSelfArc, "agent " + std::to_string(v) + " has no self-arc", static_cast<long>(v));
    const Matrix w = averaging_matrix(g).entries();
    Matrix kron = Matrix::Zero(idx(n) * m, idx(n) * m);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (w(idx(i), idx(j)) != 0.0) kron.block(idx(i) * m, idx(j) * m, m, m) = w(idx(i), idx(j)) * eye;
    phi = p * kron * p * phi;
  }
  return {phi, mixed_matrix_norm(phi, static_cast<std::size_t>(m))};
}

Vector propagate_error(const Vector& e, const DirectedGraph& graph, const ProjectionSet& projections) {
  const std::size_t n = projections.projections.size();
  const auto m = projections.projections.front().rows();
  if (e.size() != idx(n) * m || graph.size() != n)
    throw Error(ErrorKind::DimensionMismatch, "error vector, graph and projections disagree");
  std::vector<Vector> pe(n);
  for (std::size_t j = 0; j < n; ++j) pe[j] = projections.projections[j] * e.segment(idx(j) * m, m);
  const Matrix w = averaging_matrix(graph).entries();
  Vector out(e.size());
  for (std::size_t i = 0; i < n; ++i) {
    Vector mix = Vector::Zero(m);
    for (std::size_t j = 0; j < n; ++j)
      if (w(idx(i), idx(j)) != 0.0) mix += w(idx(i), idx(j)) * pe[j];
    out.segment(idx(i) * m, m) = projections.projections[i] * mix;
  }
  return out;
}

Vector stack(const std::vector<Vector>& parts) {
  Eigen::Index total = 0;
  for (const auto& p : parts) total += p.size();
  Vector out(total);
  Eigen::Index at = 0;
  for (const auto& p : parts) {
    out.segment(at, p.size()) = p;
    at += p.size();
  }
  return out;
}

GraphSequenceModel::GraphSequenceModel(std::vector<DirectedGraph> graphs_in, SequenceModel model_in, std::size_t l_in)
    : graphs(std::move(graphs_in)), model(std::move(model_in)), l(l_in) {
  if (graphs.empty()) throw Error(ErrorKind::EmptySequence, "graph model needs at least one candidate graph");
  const std::size_t n = graphs.front().size();
  for (std::size_t g = 0; g < graphs.size(); ++g) {
    if (graphs[g].size() != n)
      throw Error(ErrorKind::DimensionMismatch, "candidate graph " + std::to_string(g) + " has a different size",
                  static_cast<long>(g));
    if (!graphs[g].has_all_self_loops())
      throw Error(ErrorKind::MissingSelfArc, "candidate graph " + std::to_string(g) + " lacks self-arcs",
                  static_cast<long>(g));
  }
  if (model.alphabet_size() > graphs.size())
    throw Error(ErrorKind::DimensionMismatch, "graph signal emits indices outside the candidate list");
  if (l == 0) throw Error(ErrorKind::DimensionMismatch, "window length l must be positive");
}

double check_condition_a(const GraphSequenceModel& model, std::size_t l) {
  if (l == 0) throw Error(ErrorKind::DimensionMismatch, "window length l must be positive");
  check_enumeration_size(model.graphs.size(), l);
  DirectedGraph self_loops(model.agents());
  self_loops.add_self_loops();
  double worst = 1.0;
  for (std::size_t start : window_starts(model.model)) {
    const WindowLaw law = window_law(model.model, start, l);
    double p = 0.0;
    for_each_word(
        law, l, self_loops,
        [&](const DirectedGraph& acc, std::size_t s) { return compose(model.graphs[s], acc); },
        [&](const DirectedGraph& acc, double prob) {
          if (is_strongly_connected(acc)) p += prob;
        });
    worst = std::min(worst, p);
  }
  return worst;
}

namespace {

SolverIterate measure(const PartitionedLinearSystem& system, const SolverState& state) {
  SolverIterate it;
  it.k = state.k;
  const auto& x = state.estimates;
  Vector mean = Vector::Zero(x.front().size());
  for (const auto& xi : x) mean += xi;
  mean /= static_cast<double>(x.size());
  // max_{i,j} |x_i - x_j|_inf is the largest coordinate range across agents.
  for (Eigen::Index c = 0; c < mean.size(); ++c) {
    double lo = x.front()(c), hi = lo;
    for (const auto& xi : x) {
      lo = std::min(lo, xi(c));
      hi = std::max(hi, xi(c));
    }
    it.disagreement = std::max(it.disagreement, hi - lo);
  }
  it.residual = system.residual(mean);
  for (std::size_t i = 0; i < x.size(); ++i)
    it.feasibility = std::max(it.feasibility, inf_norm(system.block(i).a * x[i] - system.block(i).b));
  return it;
}

}  // namespace

SolverReport run_solver(const PartitionedLinearSystem& system, const GraphSequenceModel& model,
                        const SolverOptions& options, std::uint64_t seed) {
  if (model.agents() != system.agents())
    throw Error(ErrorKind::DimensionMismatch, "graph model and system disagree on the agent count");
  const ProjectionSet projections = projections_of(system);
  SolverState state = initial_state(system);
  SequenceSampler signal(model.model, seed);
  const std::size_t stride = std::max<std::size_t>(options.record_every, 1);

  SolverReport report;
  report.seed = seed;
  SolverIterate it = measure(system, state);
  report.trace.push_back(it);
  report.max_feasibility = it.feasibility;
  auto done = [&](const SolverIterate& s) { return s.disagreement < options.tol && s.residual < options.tol; };
  while (!done(it) && state.k < options.max_iters) {
    state = step(state, model.graphs[signal.next()], projections, options.exec);
    it = measure(system, state);
    report.max_feasibility = std::max(report.max_feasibility, it.feasibility);
    if ((state.k - 1) % stride == 0 || done(it)) report.trace.push_back(it);
  }
  if (report.trace.back().k != it.k) report.trace.push_back(it);
  report.converged = done(it);
  report.iters = state.k;
  report.disagreement = it.disagreement;
  report.residual = it.residual;
  report.solution = Vector::Zero(system.unknowns());
  for (const auto& xi : state.estimates) report.solution += xi;
  report.solution /= static_cast<double>(state.estimates.size());

  std::vector<double> ks, values;
  for (const auto& s : report.trace) {
    ks.push_back(static_cast<double>(s.k));
    values.push_back(s.disagreement);
  }
  report.fitted_rate = fit_log_slope_rate(ks, values, 1e-300, 3);
  return report;
}

ContractionWindow find_contracting_window(const PartitionedLinearSystem& system, const GraphSequenceModel& model,
                                          std::size_t t_max) {
  const ProjectionSet projections = projections_of(system);
  const std::size_t n = system.agents();
  const auto m = idx(system.unknowns());
  ContractionWindow out;
  out.proof_window = (n - 1) * (n - 1) * model.l;
  const Matrix p = block_projection(projections);
  std::vector<Matrix> factors;
  for (const auto& g : model.graphs) factors.push_back(error_transition(std::span(&g, 1), projections).phi);
  for (std::size_t t = 1; t <= t_max; ++t) {
    check_enumeration_size(model.graphs.size(), t, 1e5);
    double worst_prob = 1.0, worst_mean = 0.0;
    for (std::size_t start : window_starts(model.model)) {
      const WindowLaw law = window_law(model.model, start, t);
      double prob = 0.0, mean = 0.0;
      for_each_word(
          law, t, p, [&](const Matrix& acc, std::size_t s) -> Matrix { return factors[s] * acc; },
          [&](const Matrix& phi, double w) {
            const double norm = mixed_matrix_norm(phi, static_cast<std::size_t>(m));
            mean += w * norm;
            if (norm < 1.0 - 1e-12) prob += w;
          });
      worst_prob = std::min(worst_prob, prob);
      worst_mean = std::max(worst_mean, mean);
    }
    if (worst_prob > 0.0) {
      out.smallest = t;
      out.contracting_probability = worst_prob;
      out.mean_norm = worst_mean;
      out.rate_estimate = std::pow(worst_mean, 1.0 / static_cast<double>(t));
      return out;
    }
  }
  return out;
}

}  // namespace stochlyap
