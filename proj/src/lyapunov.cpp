#include "stochlyap/lyapunov.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace stochlyap {

SwitchedSystem::SwitchedSystem(std::vector<Matrix> modes_in, SequenceModel signal_in)
    : modes(std::move(modes_in)), signal(std::move(signal_in)) {
  if (modes.empty()) throw Error(ErrorKind::EmptySequence, "switched system needs at least one mode");
  const auto n = modes.front().rows();
  for (std::size_t p = 0; p < modes.size(); ++p)
    if (modes[p].rows() != n || modes[p].cols() != n || n == 0)
      throw Error(ErrorKind::DimensionMismatch, "mode " + std::to_string(p) + " is not " + std::to_string(n) +
                                                    "x" + std::to_string(n));
  if (signal.alphabet_size() > modes.size())
    throw Error(ErrorKind::DimensionMismatch, "switching signal emits modes outside the mode list");
}

LyapunovFunction inf_norm_lyapunov() {
  return {[](const Vector& x) { return x.size() == 0 ? 0.0 : x.lpNorm<Eigen::Infinity>(); }, "inf_norm", 1.0};
}

LyapunovFunction one_norm_lyapunov() {
  return {[](const Vector& x) { return x.lpNorm<1>(); }, "one_norm", 1.0};
}

LyapunovFunction two_norm_lyapunov() {
  return {[](const Vector& x) { return x.norm(); }, "two_norm", 1.0};
}

LyapunovFunction spread_lyapunov() {
  return {[](const Vector& x) { return spread(x); }, "spread", 1.0};
}

LyapunovFunction lyapunov_by_name(const std::string& name) {
  if (name == "inf_norm") return inf_norm_lyapunov();
  if (name == "one_norm") return one_norm_lyapunov();
  if (name == "two_norm") return two_norm_lyapunov();
  if (name == "spread") return spread_lyapunov();
  throw Error(ErrorKind::ConfigParse, "unknown Lyapunov function '" + name + "'");
}

namespace {

double radical_inverse(std::size_t index, std::size_t base) {
  double result = 0.0;
  double f = 1.0 / static_cast<double>(base);
  while (index > 0) {
    result += f * static_cast<double>(index % base);
    index /= base;
    f /= static_cast<double>(base);
  }
  return result;
}

constexpr std::size_t kPrimes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71};

}  // namespace

std::vector<Vector> sphere_points(std::size_t n, const SphereGrid& grid, const LyapunovFunction& v) {
  const auto dim = static_cast<Eigen::Index>(n);
  std::vector<Vector> raw;
  for (Eigen::Index i = 0; i < dim; ++i)
    for (double sign : {1.0, -1.0}) raw.push_back(sign * Vector::Unit(dim, i));
  if (n <= 12) {
    for (std::size_t mask = 0; mask < (std::size_t{1} << n); ++mask) {
      Vector c(dim);
      for (Eigen::Index i = 0; i < dim; ++i) c(i) = ((mask >> i) & 1u) ? 1.0 : -1.0;
      raw.push_back(c);
    }
  }
  if (n == 2) {
    const std::size_t r = std::max<std::size_t>(grid.resolution, 2);
    for (std::size_t k = 0; k < r; ++k) {
      const double s = -1.0 + 2.0 * static_cast<double>(k) / static_cast<double>(r - 1);
      for (double sign : {1.0, -1.0}) {
        raw.push_back((Vector(2) << sign, s).finished());
        raw.push_back((Vector(2) << s, sign).finished());
      }
    }
  } else if (n >= 3) {
    for (Eigen::Index face = 0; face < dim; ++face)
      for (double sign : {1.0, -1.0})
        for (std::size_t k = 1; k <= grid.face_samples; ++k) {
          Vector x(dim);
          std::size_t prime = 0;
          for (Eigen::Index i = 0; i < dim; ++i) {
            if (i == face) {
              x(i) = sign;
              continue;
            }
            x(i) = -1.0 + 2.0 * radical_inverse(k, kPrimes[prime++ % std::size(kPrimes)]);
          }
          raw.push_back(std::move(x));
        }
  }
  const double degree = v.degree.value_or(1.0);
  std::vector<Vector> out;
  out.reserve(raw.size());
  for (auto& x : raw) {
    const double level = v(x);
    if (!(level > 0.0)) continue;
    out.push_back(x / std::pow(level, 1.0 / degree));
  }
  return out;
}

double conditional_expectation_V(const SwitchedSystem& sys, const LyapunovFunction& v, const Vector& x,
                                 std::size_t mode, std::size_t horizon) {
  if (horizon == 0) return v(x);
  check_enumeration_size(sys.mode_count(), horizon, kMaxPathEnumeration);
  const WindowLaw law = continuation_law(sys.signal, mode, horizon);
  double expectation = 0.0;
  for_each_word(
      law, horizon, x, [&](const Vector& state, std::size_t p) -> Vector { return sys.modes[p] * state; },
      [&](const Vector& state, double prob) { expectation += prob * v(state); });
  return expectation;
}

ContractionFactor contraction_factor(const SwitchedSystem& sys, const LyapunovFunction& v,
                                     const std::vector<Vector>& points, std::size_t horizon) {
  ContractionFactor worst{-1.0, 0, Vector()};
  for (std::size_t mode = 0; mode < sys.signal.alphabet_size(); ++mode)
    for (const auto& x : points) {
      const double value = conditional_expectation_V(sys, v, x, mode, horizon) / v(x);
      if (value > worst.value) worst = {value, mode, x};
    }
  return worst;
}

FiniteStepCertificate certify_homogeneous(const SwitchedSystem& sys, const LyapunovFunction& v, std::size_t t_max,
                                          const SphereGrid& grid) {
  if (!v.degree)
    throw Error(ErrorKind::NoCertificate, "Lyapunov function '" + v.name + "' is not positively homogeneous");
  const auto points = sphere_points(sys.dimension(), grid, v);
  FiniteStepCertificate cert;
  cert.grid_resolution = grid.resolution;
  for (std::size_t t = 1; t <= t_max; ++t) {
    const auto factor = contraction_factor(sys, v, points, t);
    cert.beta_by_horizon.push_back(factor.value);
    if (t == 1) {
      cert.beta_one_step = factor.value;
      cert.supermartingale_ok = factor.value <= 1.0 + 1e-12;
    }
    if (factor.value < 1.0) {
      cert.horizon = t;
      cert.beta = factor.value;
      cert.alpha = 1.0 - factor.value;
      cert.rate = std::pow(factor.value, 1.0 / static_cast<double>(t));
      cert.worst_mode = factor.mode;
      return cert;
    }
  }
  throw Error(ErrorKind::NoCertificate, "no horizon up to " + std::to_string(t_max) + " contracts V",
              static_cast<long>(t_max));
}

std::optional<double> fit_log_slope_rate(const std::vector<double>& ks, const std::vector<double>& values,
                                         double floor, std::size_t min_points) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!(values[i] > floor)) continue;
    const double x = ks[i], y = std::log(values[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++count;
  }
  if (count < min_points) return std::nullopt;
  const double c = static_cast<double>(count);
  const double denom = c * sxx - sx * sx;
  if (denom <= 0.0) return std::nullopt;
  return std::exp((c * sxy - sx * sy) / denom);
}

DecayReport monte_carlo_decay(const SwitchedSystem& sys, const LyapunovFunction& v, const Vector& x0,
                              std::size_t steps, std::size_t trials, std::uint64_t seed, double tolerance,
                              Execution exec) {
  if (trials == 0) throw Error(ErrorKind::InsufficientData, "monte_carlo_decay needs at least one trial");
  std::vector<double> ks(steps + 1);
  std::iota(ks.begin(), ks.end(), 0.0);

  struct Trial {
    std::vector<double> values;
    double rate = 0.0;
  };
  auto trajectories = map_trials(
      trials,
      [&](std::size_t t) {
        SequenceSampler signal(sys.signal, trial_seed(seed, t));
        Trial out;
        out.values.reserve(steps + 1);
        Vector x = x0;
        out.values.push_back(v(x));
        for (std::size_t k = 1; k <= steps; ++k) {
          x = sys.modes[signal.next()] * x;
          out.values.push_back(v(x));
        }
        // Exact zeros are convergence already achieved and are excluded from the fit.
        out.rate = fit_log_slope_rate(ks, out.values).value_or(0.0);
        return out;
      },
      exec);

  DecayReport report;
  double log_sum = 0.0;
  bool any_zero = false;
  std::size_t tail = 0;
  for (const auto& tr : trajectories) {
    report.per_trial_rate.push_back(tr.rate);
    if (tr.rate <= 0.0)
      any_zero = true;
    else
      log_sum += std::log(tr.rate);
    if (tr.values.back() < tolerance) ++tail;
  }
  report.fitted_rate = any_zero ? 0.0 : std::exp(log_sum / static_cast<double>(trials));
  report.tail_fraction = static_cast<double>(tail) / static_cast<double>(trials);

  std::vector<double> column(trials);
  const std::size_t q99_index = static_cast<std::size_t>(std::ceil(0.99 * static_cast<double>(trials))) - 1;
  for (std::size_t k = 0; k <= steps; ++k) {
    for (std::size_t t = 0; t < trials; ++t) column[t] = trajectories[t].values[k];
    std::sort(column.begin(), column.end());
    report.mean_v.push_back(std::accumulate(column.begin(), column.end(), 0.0) / static_cast<double>(trials));
    report.median_v.push_back(column[(trials - 1) / 2]);
    report.q99_v.push_back(column[q99_index]);
  }
  return report;
}

}  // namespace stochlyap
