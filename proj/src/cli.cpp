#include "stochlyap/cli.hpp"

#include <cstdio>
#include <ostream>
#include <sstream>

#include "stochlyap/async.hpp"
#include "stochlyap/linear_solver.hpp"
#include "stochlyap/lyapunov.hpp"
#include "stochlyap/product.hpp"

namespace stochlyap::cli {

namespace {

using io::Json;

std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

/// JSON has no infinities or NaN; emit null for them.
Json finite_or_null(double x) { return std::isfinite(x) ? Json(x) : Json(nullptr); }

/// Fields may hold their value inline or name a JSON file next to the config.
class ConfigReader {
 public:
  ConfigReader(const std::filesystem::path& path, Json config) : base_(path.parent_path()), config_(std::move(config)) {
    if (!config_.is_object()) throw Error(ErrorKind::ConfigParse, "config must be a JSON object");
  }

  bool has(const char* key) const { return config_.contains(key); }

  Json get(const char* key) {
    if (!config_.contains(key)) throw Error(ErrorKind::ConfigParse, std::string("missing field '") + key + "'");
    Json& value = config_.at(key);
    if (value.is_string() && value.get<std::string>().ends_with(".json"))
      value = io::read_json_file(base_ / value.get<std::string>());
    return value;
  }

  template <class T>
  T value(const char* key, T fallback) const {
    return config_.contains(key) ? config_.at(key).get<T>() : fallback;
  }

  Json& raw() { return config_; }

 private:
  std::filesystem::path base_;
  Json config_;
};

std::vector<StochasticMatrix> stochastic_list(const Json& j, std::vector<std::string>* labels) {
  if (!j.is_array() || j.empty()) throw Error(ErrorKind::ConfigParse, "matrix list must be a nonempty array");
  std::vector<StochasticMatrix> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const Json& item = j[i];
    const bool labelled = item.is_object() && item.contains("matrix");
    try {
      out.push_back(validate(io::matrix_from_json(labelled ? item.at("matrix") : item)));
    } catch (const Error& e) {
      throw Error(e.kind(), "matrix " + std::to_string(i) + ": " + e.what(), e.index(), e.value());
    }
    if (labels) labels->push_back(labelled ? item.value("label", "F" + std::to_string(i)) : "F" + std::to_string(i));
  }
  return out;
}

Json class_json(const StochasticMatrix& w) {
  const MatrixClass c = classify(w);
  return Json{{"scrambling", c.is_scrambling}, {"sia", c.is_sia}, {"markov", c.is_markov}, {"period", c.period},
              {"tau", tau(w)}};
}

RunOutput run_classify(ConfigReader& cfg, std::uint64_t seed) {
  std::vector<std::string> labels;
  const FiniteMatrixSet set(stochastic_list(cfg.get("matrices"), &labels), labels);
  RunOutput out;
  Json rows = Json::array();
  std::ostringstream csv;
  csv << "label,scrambling,sia,markov,period,tau\n";
  for (std::size_t i = 0; i < set.count(); ++i) {
    Json c = class_json(set[i]);
    c["label"] = set.labels()[i];
    csv << set.labels()[i] << ',' << int(c["scrambling"].get<bool>()) << ',' << int(c["sia"].get<bool>()) << ','
        << int(c["markov"].get<bool>()) << ',' << c["period"].get<std::size_t>() << ',' << num(tau(set[i])) << '\n';
    rows.push_back(std::move(c));
  }
  out.summary["matrices"] = std::move(rows);
  if (cfg.has("model")) {
    const SequenceModel model = io::sequence_model_from_json(cfg.get("model"), seed);
    const auto h_max = cfg.value<std::size_t>("h_max", 4);
    Json windows = Json::array();
    const auto starts = window_starts(model);
    for (std::size_t h = 1; h <= h_max; ++h) {
      WindowClassProbabilities worst{1.0, 1.0, 1.0};
      for (std::size_t s : starts) {
        const auto p = window_class_probabilities(set, model, s, h);
        worst.scrambling = std::min(worst.scrambling, p.scrambling);
        worst.sia = std::min(worst.sia, p.sia);
        worst.markov = std::min(worst.markov, p.markov);
      }
      windows.push_back({{"h", h}, {"scrambling", worst.scrambling}, {"sia", worst.sia}, {"markov", worst.markov}});
    }
    out.summary["windows"] = std::move(windows);
  }
  out.trace_csv = csv.str();
  return out;
}

RunOutput run_certify(ConfigReader& cfg, std::uint64_t seed, const RunRequest& req) {
  std::vector<Matrix> modes;
  const Json list = cfg.get("modes");
  if (!list.is_array() || list.empty()) throw Error(ErrorKind::ConfigParse, "modes must be a nonempty array");
  for (const auto& m : list) modes.push_back(io::matrix_from_json(m));
  const SwitchedSystem sys(std::move(modes), io::sequence_model_from_json(cfg.get("model"), seed));
  const LyapunovFunction v = lyapunov_by_name(cfg.value<std::string>("lyapunov", "inf_norm"));
  SphereGrid grid;
  if (cfg.has("grid")) {
    const Json g = cfg.get("grid");
    grid.resolution = g.value("resolution", grid.resolution);
    grid.face_samples = g.value("face_samples", grid.face_samples);
  }
  const auto cert = certify_homogeneous(sys, v, cfg.value<std::size_t>("t_max", 4), grid);

  RunOutput out;
  out.summary["certificate"] = {{"T", cert.horizon},
                                {"alpha", cert.alpha},
                                {"beta", cert.beta},
                                {"rate", cert.rate},
                                {"supermartingale_ok", cert.supermartingale_ok},
                                {"beta_one_step", cert.beta_one_step},
                                {"beta_by_horizon", cert.beta_by_horizon},
                                {"worst_mode", cert.worst_mode},
                                {"grid_resolution", cert.grid_resolution},
                                {"lyapunov", v.name}};

  const std::size_t steps = req.steps.value_or(cfg.value<std::size_t>("steps", 200));
  const std::size_t trials = req.trials.value_or(cfg.value<std::size_t>("trials", 100));
  const double tol = req.tol.value_or(cfg.value<double>("tol", 1e-8));
  Vector x0 = cfg.has("x0") ? io::vector_from_json(cfg.get("x0")) : Vector::Ones(static_cast<Eigen::Index>(sys.dimension()));
  if (static_cast<std::size_t>(x0.size()) != sys.dimension())
    throw Error(ErrorKind::DimensionMismatch, "x0 has the wrong length");
  const auto decay = monte_carlo_decay(sys, v, x0, steps, trials, seed, tol);
  out.summary["monte_carlo"] = {{"steps", steps},
                                {"trials", trials},
                                {"fitted_rate", decay.fitted_rate},
                                {"certified_rate", cert.rate},
                                {"tail_fraction", decay.tail_fraction}};
  std::ostringstream csv;
  csv << "k,mean_v,median_v,q99_v\n";
  for (std::size_t k = 0; k <= steps; ++k)
    csv << k << ',' << num(decay.mean_v[k]) << ',' << num(decay.median_v[k]) << ',' << num(decay.q99_v[k]) << '\n';
  out.trace_csv = csv.str();
  return out;
}

RunOutput run_product(ConfigReader& cfg, std::uint64_t seed, const RunRequest& req) {
  std::vector<std::string> labels;
  const FiniteMatrixSet set(stochastic_list(cfg.get("matrices"), &labels), labels);
  const SequenceModel model = io::sequence_model_from_json(cfg.get("model"), seed);
  const std::size_t steps = req.steps.value_or(cfg.value<std::size_t>("steps", 10000));
  const std::size_t runs = req.trials.value_or(cfg.value<std::size_t>("trials", 1));
  const double tol = req.tol.value_or(cfg.value<double>("tol", 1e-8));
  const auto h_max = cfg.value<std::size_t>("h_max", 8);
  const auto marks = cfg.value<bool>("every_step", false) ? every_step_checkpoints(steps) : power_of_two_checkpoints(steps);
  const auto traces = simulate_ensemble(set, model, steps, marks, runs, seed);

  RunOutput out;
  Json windows;
  for (auto [name, cls] : {std::pair{"scrambling", WindowClass::Scrambling}, std::pair{"sia", WindowClass::Sia},
                           std::pair{"markov", WindowClass::Markov}}) {
    const auto h = find_window_length(set, model, cls, h_max);
    windows[name] = h ? Json(*h) : Json(nullptr);
  }
  out.summary["window_length"] = windows;
  if (const auto h = find_window_length(set, model, WindowClass::Scrambling, h_max)) {
    const auto bound = scrambling_window_bound(set, model, *h);
    out.summary["bound"] = {{"h", bound.h}, {"p", bound.p}, {"alpha", bound.alpha}, {"rate", bound.theoretical_bound}};
  }
  if (model.is_stationary() && cfg.has("block_horizon")) {
    const auto horizon = cfg.value<std::size_t>("block_horizon", 1);
    const auto blocks = cfg.value<std::size_t>("blocks", std::max<std::size_t>(steps / horizon, 1));
    try {
      const auto est = block_log_tau_estimate(set, model, horizon, blocks, seed);
      out.summary["block_estimate"] = {{"horizon", horizon},        {"blocks_used", est.blocks_used},
                                       {"factor", est.factor},      {"per_step", est.per_step},
                                       {"log_std_error", est.log_std_error}, {"zero_fraction", est.zero_fraction}};
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::AllBlocksDegenerate) throw;
      out.summary["block_estimate"] = {{"horizon", horizon}, {"per_step", 0.0}, {"zero_fraction", 1.0}};
    }
  }

  Json runs_json = Json::array();
  std::ostringstream csv;
  csv << "run,k,tau,spread\n";
  bool all_reached = true;
  for (std::size_t r = 0; r < traces.size(); ++r) {
    const auto& tr = traces[r];
    for (std::size_t i = 0; i < tr.checkpoints.size(); ++i)
      csv << r << ',' << tr.checkpoints[i] << ',' << num(tr.taus[i]) << ',' << num(tr.spreads[i]) << '\n';
    Json run{{"seed", tr.seed}, {"steps_run", tr.steps_run}, {"final_tau", tr.taus.empty() ? 0.0 : tr.taus.back()}};
    const auto below = first_checkpoint_below(tr, tol);
    run["first_below_tol"] = below ? Json(*below) : Json(nullptr);
    all_reached = all_reached && below.has_value();
    try {
      run["fitted_rate"] = fit_empirical_rate(tr);
    } catch (const Error&) {
      run["fitted_rate"] = nullptr;
    }
    runs_json.push_back(std::move(run));
  }
  out.summary["runs"] = std::move(runs_json);
  out.summary["tol"] = tol;
  out.summary["converged"] = all_reached;
  out.trace_csv = csv.str();
  out.exit_code = all_reached ? kOk : kNotConverged;
  return out;
}

RunOutput run_async(ConfigReader& cfg, std::uint64_t seed, const RunRequest& req) {
  StochasticMatrix w;
  if (cfg.has("weights"))
    w = validate(io::matrix_from_json(cfg.get("weights")));
  else
    w = averaging_matrix(io::graph_from_json(cfg.get("graph")));
  const std::size_t n = w.size();
  const AsyncClockModel clocks = cfg.has("clocks") ? io::clocks_from_json(cfg.get("clocks"), seed)
                                                   : AsyncClockModel::bernoulli(std::vector<double>(n, 0.5), seed);
  Vector x0(static_cast<Eigen::Index>(n));
  if (cfg.has("x0"))
    x0 = io::vector_from_json(cfg.get("x0"));
  else
    for (std::size_t i = 0; i < n; ++i) x0(static_cast<Eigen::Index>(i)) = static_cast<double>(i);
  const std::size_t steps = req.steps.value_or(cfg.value<std::size_t>("steps", 1000));
  const double tol = req.tol.value_or(cfg.value<double>("tol", 1e-8));
  const auto trace = simulate_async(w, clocks, x0, steps, seed);

  RunOutput out;
  const DirectedGraph g = graph_of(w);
  const auto root = find_root(g);
  out.summary["rooted"] = root.has_value();
  out.summary["period"] = pattern_period(w);
  if (root) {
    const auto part = hierarchical_partition(g, *root);
    const auto seq = hierarchical_sequence(part);
    out.summary["root"] = *root;
    out.summary["levels"] = part.levels;
    out.summary["hierarchical_sequence"] = seq;
    out.summary["hierarchical_product_markov"] = is_markov(hierarchical_product(w, seq));
  }
  out.summary["events"] = trace.events;
  out.summary["ticks"] = trace.ticks;
  out.summary["initial_spread"] = trace.spreads.front();
  out.summary["final_spread"] = trace.spreads.back();
  out.summary["agreement"] = trace.spreads.back() < tol;
  out.summary["final_state"] = io::vector_to_json(trace.final_state);
  std::ostringstream csv;
  csv << "k,spread\n";
  for (std::size_t k = 0; k < trace.spreads.size(); ++k) csv << k << ',' << num(trace.spreads[k]) << '\n';
  out.trace_csv = csv.str();
  return out;
}

RunOutput run_lineq(ConfigReader& cfg, std::uint64_t seed, const RunRequest& req) {
  const PartitionedLinearSystem system = io::system_from_json(cfg.get("system"));
  const Json gm = cfg.get("graph_model");
  std::vector<DirectedGraph> graphs;
  if (!gm.contains("graphs")) throw Error(ErrorKind::ConfigParse, "graph_model needs 'graphs'");
  for (const auto& g : gm.at("graphs")) graphs.push_back(io::graph_from_json(g));
  const SequenceModel signal = gm.contains("model")
                                   ? io::sequence_model_from_json(gm.at("model"), seed)
                                   : SequenceModel::iid(std::vector<double>(graphs.size(), 1.0 / graphs.size()), seed);
  const GraphSequenceModel model(std::move(graphs), signal, gm.value<std::size_t>("l", 1));

  SolverOptions options;
  options.max_iters = req.steps.value_or(cfg.value<std::size_t>("max_iters", options.max_iters));
  options.tol = req.tol.value_or(cfg.value<double>("tol", options.tol));
  options.record_every = cfg.value<std::size_t>("record_every", 1);

  RunOutput out;
  try {
    out.summary["condition_a"] = check_condition_a(model, model.l);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::EnumerationTooLarge) throw;
    out.summary["condition_a"] = nullptr;
  }
  const auto report = run_solver(system, model, options, seed);
  out.summary["converged"] = report.converged;
  out.summary["iters"] = report.iters;
  out.summary["disagreement"] = report.disagreement;
  out.summary["residual"] = report.residual;
  out.summary["max_feasibility"] = report.max_feasibility;
  out.summary["solution"] = io::vector_to_json(report.solution);
  out.summary["fitted_rate"] = report.fitted_rate ? finite_or_null(*report.fitted_rate) : Json(nullptr);
  out.summary["tol"] = options.tol;
  if (cfg.value<std::size_t>("window_t_max", 0) > 0) {
    try {
      const auto win = find_contracting_window(system, model, cfg.value<std::size_t>("window_t_max", 0));
      out.summary["contracting_window"] = {{"smallest", win.smallest ? Json(*win.smallest) : Json(nullptr)},
                                           {"proof_window", win.proof_window},
                                           {"probability", win.contracting_probability},
                                           {"mean_norm", win.mean_norm},
                                           {"rate_estimate", win.rate_estimate}};
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::EnumerationTooLarge) throw;
    }
  }
  std::ostringstream csv;
  csv << "k,disagreement,residual,feasibility\n";
  for (const auto& it : report.trace)
    csv << it.k << ',' << num(it.disagreement) << ',' << num(it.residual) << ',' << num(it.feasibility) << '\n';
  out.trace_csv = csv.str();
  out.exit_code = report.converged ? kOk : kNotConverged;
  return out;
}

}  // namespace

RunOutput execute(const RunRequest& request) {
  ConfigReader cfg(request.config, io::read_json_file(request.config));
  if (cfg.has("kind") && cfg.raw().at("kind").get<std::string>() != request.kind)
    throw Error(ErrorKind::ConfigParse, "config kind '" + cfg.raw().at("kind").get<std::string>() +
                                            "' does not match requested kind '" + request.kind + "'");
  const std::uint64_t seed = request.seed.value_or(cfg.value<std::uint64_t>("seed", 0));

  RunOutput out;
  if (request.kind == "classify")
    out = run_classify(cfg, seed);
  else if (request.kind == "certify")
    out = run_certify(cfg, seed, request);
  else if (request.kind == "product")
    out = run_product(cfg, seed, request);
  else if (request.kind == "async")
    out = run_async(cfg, seed, request);
  else if (request.kind == "lineq")
    out = run_lineq(cfg, seed, request);
  else
    throw Error(ErrorKind::ConfigParse, "unknown experiment kind '" + request.kind + "'");

  // The hash covers the resolved inputs plus every override.
  Json effective = cfg.raw();
  effective["seed"] = seed;
  if (request.trials) effective["__trials"] = *request.trials;
  if (request.steps) effective["__steps"] = *request.steps;
  if (request.tol) effective["__tol"] = *request.tol;
  Json summary{{"kind", request.kind},
               {"seed", seed},
               {"config_hash", io::fnv1a_hex(effective.dump())},
               {"artifact_version", kArtifactVersion},
               {"result", std::move(out.summary)}};
  summary["exit_code"] = out.exit_code;
  out.summary = std::move(summary);
  return out;
}

int run(const RunRequest& request, std::ostream& err) {
  RunOutput out;
  try {
    out = execute(request);
  } catch (const Error& e) {
    err << request.config.string() << ": " << e.what() << '\n';
    return kValidation;
  } catch (const Json::exception& e) {
    err << request.config.string() << ": " << e.what() << '\n';
    return kValidation;
  }
  try {
    std::filesystem::create_directories(request.out);
    io::write_atomically(request.out / "summary.json", out.summary.dump(2) + "\n");
    io::write_atomically(request.out / "trace.csv", out.trace_csv);
  } catch (const std::exception& e) {
    err << "writing results: " << e.what() << '\n';
    return kFailure;
  }
  return out.exit_code;
}

}  // namespace stochlyap::cli
