#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "stochlyap/matrix.hpp"
#include "stochlyap/parallel.hpp"
#include "stochlyap/sequence.hpp"

namespace stochlyap {

inline constexpr double kMaxPathEnumeration = 1e6;

/// x_k = A_{y_k} x_{k-1} with a finite set of linear modes (not necessarily
/// stochastic) and a switching signal y.
struct SwitchedSystem {
  std::vector<Matrix> modes;
  SequenceModel signal;

  SwitchedSystem(std::vector<Matrix> modes, SequenceModel signal);
  std::size_t dimension() const { return static_cast<std::size_t>(modes.front().rows()); }
  std::size_t mode_count() const { return modes.size(); }
};

struct LyapunovFunction {
  std::function<double(const Vector&)> evaluate;
  std::string name;
  /// Degree a of positive homogeneity V(c x) = c^a V(x), if any.
  std::optional<double> degree;

  double operator()(const Vector& x) const { return evaluate(x); }
};

LyapunovFunction inf_norm_lyapunov();
LyapunovFunction one_norm_lyapunov();
LyapunovFunction two_norm_lyapunov();
/// max - min of the state; vanishes on span(1).
LyapunovFunction spread_lyapunov();
/// Looks a function up by name ("inf_norm", "one_norm", "two_norm", "spread").
LyapunovFunction lyapunov_by_name(const std::string& name);

/// Sampling of {x : V(x) = 1}. For n = 2 every face of the unit inf-norm
/// square gets `resolution` evenly spaced points; for n >= 3 each face gets
/// `face_samples` Halton points. Cube corners and +-e_i are always included.
/// Points are rescaled onto the V-level set using V's homogeneity degree.
struct SphereGrid {
  std::size_t resolution = 101;
  std::size_t face_samples = 2048;
};

std::vector<Vector> sphere_points(std::size_t n, const SphereGrid& grid, const LyapunovFunction& v);

struct FiniteStepCertificate {
  std::size_t horizon = 0;  // T
  double alpha = 0.0;
  bool supermartingale_ok = false;
  double rate = 0.0;        // (1 - alpha)^(1/T)
  double beta = 0.0;        // worst grid value of E[V(x_{k+T}) | x_k, y_k] with V(x_k) = 1
  double beta_one_step = 0.0;
  std::size_t worst_mode = 0;
  std::size_t grid_resolution = 0;
  std::vector<double> beta_by_horizon;
};

/// E[V(x_{k+T}) | x_k = x, y_k = mode], summing over every length-T
/// continuation of the signal.
double conditional_expectation_V(const SwitchedSystem& sys, const LyapunovFunction& v, const Vector& x,
                                 std::size_t mode, std::size_t horizon);

/// Worst case over modes and grid points of the T-step conditional expectation.
struct ContractionFactor {
  double value = 0.0;
  std::size_t mode = 0;
  Vector point;
};
ContractionFactor contraction_factor(const SwitchedSystem& sys, const LyapunovFunction& v,
                                     const std::vector<Vector>& points, std::size_t horizon);

/// First horizon T <= t_max whose contraction factor is below 1. Throws
/// NoCertificate when none is.
FiniteStepCertificate certify_homogeneous(const SwitchedSystem& sys, const LyapunovFunction& v, std::size_t t_max,
                                          const SphereGrid& grid = {});

struct DecayReport {
  double fitted_rate = 0.0;
  double tail_fraction = 0.0;  // trials with V(x_steps) < tolerance
  std::vector<double> per_trial_rate;
  std::vector<double> mean_v;  // indexed by k = 0..steps
  std::vector<double> median_v;
  std::vector<double> q99_v;
};

DecayReport monte_carlo_decay(const SwitchedSystem& sys, const LyapunovFunction& v, const Vector& x0,
                              std::size_t steps, std::size_t trials, std::uint64_t seed, double tolerance = 1e-8,
                              Execution exec = Execution::Parallel);

/// exp of the least-squares slope of log values[k] against k, over entries
/// above `floor`. Returns nullopt when fewer than `min_points` qualify.
std::optional<double> fit_log_slope_rate(const std::vector<double>& ks, const std::vector<double>& values,
                                         double floor = 1e-300, std::size_t min_points = 2);

}  // namespace stochlyap
