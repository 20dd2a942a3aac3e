#include "cli.hpp"

#include "seqei/rng.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>

namespace seqei::cli {

namespace {

namespace fs = std::filesystem;

// Bad flags, unreadable inputs and invalid configs: exit code 2.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Seed streams derived from the single run seed.
enum SeedStream : std::uint64_t {
  kDesignStream = 101,
  kNoiseStream = 102,
  kConstraintNoiseStream = 103,
  kLoopStream = 104,
  kCandidateStream = 105,
};

template <typename F>
auto reading(const std::string& what, F&& f) {
  try {
    return f();
  } catch (const std::exception& e) {
    throw UsageError(what + ": " + e.what());
  }
}

void require_file(const std::string& path) {
  if (path.empty() || !fs::exists(path)) throw UsageError("file not found: '" + path + "'");
}

std::vector<int> parse_resolution(const std::string& s) {
  std::vector<int> r;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, ',')) {
    try {
      std::size_t used = 0;
      r.push_back(std::stoi(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw UsageError("bad grid resolution '" + s + "'");
    }
  }
  return r;
}

std::vector<double> parse_list(const std::string& s) {
  std::vector<double> r;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, ',')) {
    try {
      std::size_t used = 0;
      r.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw UsageError("bad number list '" + s + "'");
    }
  }
  return r;
}

std::string resolve(const std::string& p, const fs::path& base) {
  if (p.empty()) return p;
  const fs::path path(p);
  return path.is_absolute() ? p : (base / path).string();
}

SimulatorSpec parse_simulator(const json& j, const fs::path& base) {
  SimulatorSpec s;
  s.kind = parse_simulator_kind(j.at("kind").get<std::string>());
  if (j.contains("path")) s.grid_path = resolve(j["path"].get<std::string>(), base);
  if (s.kind == SimulatorKind::grid_file) require_file(s.grid_path);
  if (j.contains("interpolation")) {
    s.interpolation = parse_interpolation(j["interpolation"].get<std::string>());
  } else if (s.kind == SimulatorKind::grid_file) {
    s.interpolation = reading("grid file", [&] { return read_grid_json(s.grid_path); }).interpolation;
  }
  if (j.contains("center")) {
    const auto c = j["center"].get<std::vector<double>>();
    s.center = Eigen::Map<const Eigen::VectorXd>(c.data(), static_cast<Eigen::Index>(c.size()));
  }
  s.noise_sd = j.value("noise_sd", 0.0);
  if (!(s.noise_sd >= 0.0)) throw UsageError("noise_sd must be >= 0");
  return s;
}

CandidateSet make_candidates(const CandidateSpec& c, const Domain& domain, std::uint64_t seed) {
  if (!c.file.empty()) {
    auto set = reading("candidate file", [&] { return read_candidates_csv(c.file); });
    if (set.points.cols() != domain.dims()) throw UsageError("candidate file has the wrong dimension");
    return set;
  }
  if (c.lhs > 0) {
    return CandidateSet(latin_hypercube(c.lhs, domain, seed).points, Provenance::lhs);
  }
  std::vector<int> res = c.grid;
  if (res.size() == 1 && domain.dims() > 1) res.assign(static_cast<std::size_t>(domain.dims()), res[0]);
  if (res.empty()) res.assign(static_cast<std::size_t>(domain.dims()), domain.dims() == 1 ? 200 : 50);
  return grid_candidates(domain, res);
}

std::string summarize_loo(const Diagnostics& d) {
  int big = 0;
  for (Eigen::Index i = 0; i < d.standardized_residuals.size(); ++i) {
    if (std::abs(d.standardized_residuals[i]) > 3.0) ++big;
  }
  std::ostringstream s;
  s << "loo: n=" << d.standardized_residuals.size()
    << " max|r|=" << format_double(d.max_abs_residual())
    << " rms=" << format_double(d.rms_residual()) << " |r|>3: " << big;
  return s.str();
}

// ---------------------------------------------------------------------------

int cmd_design(int n, const std::string& bounds, bool maximin, int restarts, bool centered,
               std::uint64_t seed, const std::string& out_path, std::ostream& out, std::ostream& err) {
  if (n < 1) throw UsageError("--n must be >= 1");
  if (maximin && n < 2) throw UsageError("--maximin needs --n >= 2");
  if (restarts < 1) throw UsageError("--restarts must be >= 1");
  Domain domain = [&] {
    try {
      return Domain::parse(bounds);
    } catch (const std::exception& e) {
      throw UsageError(std::string("invalid --bounds: ") + e.what());
    }
  }();
  const LhsOptions opts{centered};
  const Design design = maximin ? maximin_lhs(n, domain, seed, restarts, opts)
                                : latin_hypercube(n, domain, seed, opts);
  std::ostream& note = out_path.empty() ? err : out;
  if (out_path.empty()) {
    write_points_csv(out, design.points);
  } else {
    write_points_csv(out_path, design.points);
  }
  if (n >= 2) note << "min_distance=" << format_double(min_interpoint_distance(design)) << '\n';
  return kSuccess;
}

int cmd_fit(const std::string& data_path, const std::string& bounds, const std::string& transform,
            bool select, const FitConfig& fc, const std::string& out_path, std::ostream& out,
            std::ostream& err) {
  require_file(data_path);
  std::optional<Domain> domain;
  if (!bounds.empty()) {
    domain = reading("--bounds", [&] { return Domain::parse(bounds); });
  }
  const Transformation requested = reading("--transform", [&] { return Transformation::parse(transform); });
  Transformation chosen = requested;
  if (select) {
    const Dataset raw = reading("dataset", [&] { return read_dataset_csv(data_path, Transformation(), domain); });
    const TransformSelection sel = choose_transformation(raw.X, raw.z_raw, raw.domain, fc);
    for (const auto& s : sel.scores) {
      out << "transform " << s.transformation.name() << ": ";
      if (s.admissible) {
        out << "max|r|=" << format_double(s.max_abs_residual) << " rms=" << format_double(s.rms_residual);
      } else {
        out << "inadmissible";
      }
      out << '\n';
    }
    chosen = sel.chosen;
    out << "chosen transformation: " << chosen.name() << '\n';
  }
  const Dataset data = reading("dataset", [&] { return read_dataset_csv(data_path, chosen, domain); });
  const GpModel model = fit(data, fc);
  if (model.degenerate_variance()) {
    err << "warning: outputs are constant; process variance is degenerate\n";
  }
  if (data.size() >= 3) out << summarize_loo(loo_cv(model)) << '\n';
  out << "loglik=" << format_double(model.loglik()) << " sigma2=" << format_double(model.sigma2())
      << '\n';
  write_json(out_path, model_to_json(model));
  return kSuccess;
}

struct ProposeArgs {
  std::string model_path;
  std::string criterion_json;
  std::string kind = "minimize";
  std::optional<double> a;
  std::string levels;
  double alpha = 1.96;
  int g = 0;
  double w = 0.5;
  double lambda = 1.96;
  double p_target = 0.5;
  std::string constraint_bounds;
  std::string constraint_model_path;
  std::string grid;
  int lhs = 0;
  std::string candidates_path;
  int mc = 10000;
  std::uint64_t seed = 0;
  std::string out_path;
  std::string surface_path;
};

CriterionSpec criterion_from_flags(const ProposeArgs& a) {
  if (!a.criterion_json.empty()) {
    return reading("--criterion", [&] { return criterion_from_json(json::parse(a.criterion_json)); });
  }
  return reading("criterion flags", [&] {
    CriterionSpec s;
    s.kind = parse_criterion_kind(a.kind);
    if (s.kind == CriterionKind::contour && !a.a) throw UsageError("contour needs --a");
    s.a = a.a.value_or(0.0);
    s.alpha = a.alpha;
    s.g = a.g > 0 ? a.g : (s.kind == CriterionKind::percentile ? 2 : 1);
    s.w = a.w;
    s.lambda = a.lambda;
    s.p_target = a.p_target;
    if (!a.levels.empty()) s.levels = parse_list(a.levels);
    if (!a.constraint_bounds.empty()) {
      const Domain c = Domain::parse(a.constraint_bounds);
      s.constraint_lo = c.lower()[0];
      s.constraint_hi = c.upper()[0];
    }
    s.validate();
    return s;
  });
}

int cmd_propose(const ProposeArgs& a, std::ostream& out, std::ostream& err) {
  require_file(a.model_path);
  const GpModel model = reading("model", [&] { return model_from_json(read_json(a.model_path)); });
  const CriterionSpec spec = criterion_from_flags(a);
  std::optional<GpModel> cmodel;
  if (spec.kind == CriterionKind::constrained_minimize) {
    require_file(a.constraint_model_path);
    cmodel = reading("constraint model", [&] { return model_from_json(read_json(a.constraint_model_path)); });
  }
  CandidateSpec cs;
  if (!a.grid.empty()) cs.grid = parse_resolution(a.grid);
  cs.lhs = a.lhs;
  cs.file = a.candidates_path;
  if (!cs.file.empty()) require_file(cs.file);
  const CandidateSet cands = make_candidates(cs, model.dataset().domain, a.seed);
  for (Eigen::Index i = 0; i < cands.size(); ++i) {
    if (!model.dataset().domain.contains(cands.points.row(i).transpose(), 1e-12)) {
      err << "warning: candidate " << i + 1 << " lies outside the model domain (extrapolating)\n";
      break;
    }
  }

  IncumbentOptions io;
  io.percentile_mc = a.mc;
  io.percentile_seed = a.seed;
  Eigen::VectorXd cvals;
  if (cmodel) {
    cvals = cmodel->dataset().z_raw;
    io.constraint_values = &cvals;
  }
  const Incumbent inc = update_incumbent(model, spec, io);
  const Proposal p = propose(model, spec, inc, cands, cmodel ? &*cmodel : nullptr,
                             !a.surface_path.empty());
  const std::string text = proposal_to_json(p, inc, spec).dump(2);
  if (a.out_path.empty()) {
    out << text << '\n';
  } else {
    std::ofstream f(a.out_path);
    if (!f) throw UsageError("cannot write '" + a.out_path + "'");
    f << text << '\n';
    out << "ei_value=" << format_double(p.ei_value) << '\n';
  }
  if (p.surface) write_surface_csv(a.surface_path, *p.surface);
  return kSuccess;
}

int cmd_loop(const std::string& config_path, std::uint64_t seed, const std::string& out_override,
             std::ostream& out) {
  require_file(config_path);
  const json j = reading("config", [&] { return read_json(config_path); });
  RunConfig cfg = [&] {
    try {
      return parse_run_config(j, fs::path(config_path).parent_path(), seed);
    } catch (const UsageError&) {
      throw;
    } catch (const std::exception& e) {
      throw UsageError(std::string("invalid run config: ") + e.what());
    }
  }();
  if (cfg.history_path.empty()) cfg.history_path = out_override;
  if (cfg.history_path.empty()) throw UsageError("no history output path (config output.history or --out)");
  const json history = execute_run(cfg);
  write_json(cfg.history_path, history);
  out << "stop_reason=" << history.at("stop_reason").get<std::string>()
      << " added_runs=" << history.at("iterations").size();
  if (history.contains("best_output")) {
    out << " best_output=" << format_double(history["best_output"].get<double>());
  } else if (history.contains("best")) {
    out << " best_z=" << format_double(history["best"]["z"].get<double>());
  }
  out << '\n';
  return kSuccess;
}

int cmd_verify(const std::string& kind, int trials, long samples, std::uint64_t seed, int g,
               double alpha, int levels, double lambda, const std::string& out_path,
               std::ostream& out) {
  CriterionSpec spec;
  try {
    spec.kind = parse_criterion_kind(kind);
  } catch (const std::exception& e) {
    throw UsageError(e.what());
  }
  if (!has_mc_oracle(spec.kind)) {
    throw UsageError("criterion '" + kind + "' has no Monte Carlo oracle");
  }
  if (trials < 1 || samples < 1000) throw UsageError("--trials must be >= 1 and --samples >= 1000");
  spec.alpha = alpha;
  spec.lambda = lambda;
  spec.g = g > 0 ? g : 2;
  if (spec.kind == CriterionKind::multi_contour) spec.levels.assign(static_cast<std::size_t>(std::max(levels, 1)), 0.0);
  if (spec.kind == CriterionKind::multi_contour) {
    for (std::size_t i = 0; i < spec.levels.size(); ++i) spec.levels[i] = static_cast<double>(i);
  }
  try {
    spec.validate();
  } catch (const std::exception& e) {
    throw UsageError(e.what());
  }
  const VerifyReport r = verify_criterion(spec, trials, samples, seed);
  const json j = report_to_json(r);
  if (!out_path.empty()) write_json(out_path, j);
  out << "verify " << kind << ": " << (r.pass ? "PASS" : "FAIL") << " trials=" << r.trials
      << " max|z|=" << format_double(r.max_abs_z) << " failures=" << r.failures << '\n';
  return r.pass ? kSuccess : kFailure;
}

}  // namespace

RunConfig parse_run_config(const json& j, const fs::path& base_dir, std::uint64_t seed) {
  RunConfig c;
  c.seed = j.value("seed", seed);
  if (!j.contains("simulator")) throw UsageError("run config needs a 'simulator'");
  c.simulator = parse_simulator(j.at("simulator"), base_dir);
  if (j.contains("constraint_simulator")) {
    c.constraint_simulator = parse_simulator(j["constraint_simulator"], base_dir);
  }
  if (j.contains("domain")) {
    c.domain = domain_from_json(j["domain"]);
  } else {
    c.domain = natural_domain(c.simulator);
  }
  if (!c.domain) throw UsageError("run config needs a 'domain' for this simulator");

  if (j.contains("initial_design")) {
    const json& d = j["initial_design"];
    c.initial.generator = d.value("generator", c.initial.generator);
    c.initial.n = d.value("n", 0);
    c.initial.restarts = d.value("restarts", c.initial.restarts);
    c.initial.centered = d.value("centered", false);
    if (d.contains("file")) {
      c.initial.file = resolve(d["file"].get<std::string>(), base_dir);
      require_file(c.initial.file);
    }
  }
  if (c.initial.generator != "maximin_lhs" && c.initial.generator != "lhs") {
    throw UsageError("initial_design.generator must be 'maximin_lhs' or 'lhs'");
  }
  c.transformation = Transformation::parse(j.value("transformation", std::string("identity")));
  c.maximize = j.value("maximize", false);
  if (!j.contains("criterion")) throw UsageError("run config needs a 'criterion'");
  c.criterion = criterion_from_json(j["criterion"]);
  if (c.maximize && (c.transformation.kind() != TransformKind::identity || !c.criterion.minimizes())) {
    throw UsageError("maximize requires the identity transformation and a minimizing criterion");
  }
  if (c.criterion.kind == CriterionKind::constrained_minimize && !c.constraint_simulator) {
    throw UsageError("constrained_minimize needs a 'constraint_simulator'");
  }
  if (j.contains("candidates")) {
    const json& cj = j["candidates"];
    if (cj.contains("grid")) {
      c.candidates.grid = cj["grid"].is_array() ? cj["grid"].get<std::vector<int>>()
                                                : std::vector<int>{cj["grid"].get<int>()};
    }
    c.candidates.lhs = cj.value("lhs", 0);
    if (cj.contains("file")) {
      c.candidates.file = resolve(cj["file"].get<std::string>(), base_dir);
      require_file(c.candidates.file);
    }
  }
  if (j.contains("stop")) {
    const json& s = j["stop"];
    if (s.contains("threshold")) c.stop.threshold = s["threshold"].get<double>();
    c.stop.budget = s.value("budget", c.stop.budget);
  }
  if (c.criterion.is_contour_family() && !c.stop.threshold) {
    throw UsageError("contour criteria need an explicit stop.threshold");
  }
  if (j.contains("fit")) {
    const json& f = j["fit"];
    c.fit.nugget = f.value("nugget", c.fit.nugget);
    c.fit.max_nugget = f.value("max_nugget", c.fit.max_nugget);
    c.fit.starts = f.value("starts", c.fit.starts);
    c.fit.max_evals_per_start = f.value("max_evals_per_start", c.fit.max_evals_per_start);
    if (f.contains("fixed_p")) c.fit.fixed_p = f["fixed_p"].get<double>();
    c.refit_every = f.value("refit_every", 1);
  }
  c.percentile_mc = j.value("percentile_mc", c.percentile_mc);
  if (j.contains("output")) {
    const json& o = j["output"];
    c.history_path = resolve(o.value("history", std::string()), base_dir);
    c.surfaces_dir = resolve(o.value("surfaces_dir", std::string()), base_dir);
    c.dataset_path = resolve(o.value("dataset", std::string()), base_dir);
  }
  return c;
}

json execute_run(const RunConfig& c) {
  const Domain& domain = *c.domain;
  Simulator sim = make_simulator(c.simulator, derive_seed(c.seed, kNoiseStream));
  std::optional<Simulator> csim;
  if (c.constraint_simulator) {
    csim = make_simulator(*c.constraint_simulator, derive_seed(c.seed, kConstraintNoiseStream));
  }
  if (c.maximize) {
    sim = [base = std::move(sim)](const Eigen::VectorXd& x) { return -base(x); };
  }

  // Initial runs: a dataset file, a design file to evaluate, or a generated design.
  Eigen::MatrixXd X;
  Eigen::VectorXd z;
  bool have_outputs = false;
  if (!c.initial.file.empty()) {
    const CsvTable t = reading("initial design", [&] { return read_csv(c.initial.file); });
    if (t.rows.cols() == domain.dims() + 1) {
      X = t.rows.leftCols(domain.dims());
      z = t.rows.col(domain.dims());
      if (c.maximize) z = -z;
      have_outputs = true;
    } else if (t.rows.cols() == domain.dims()) {
      X = t.rows;
    } else {
      throw UsageError("initial design file has the wrong number of columns");
    }
  } else {
    const int n = c.initial.n > 0 ? c.initial.n : initial_run_count(static_cast<int>(domain.dims()));
    const std::uint64_t s = derive_seed(c.seed, kDesignStream);
    X = c.initial.generator == "lhs"
            ? latin_hypercube(n, domain, s, {c.initial.centered}).points
            : maximin_lhs(n, domain, s, c.initial.restarts, {c.initial.centered}).points;
  }
  if (!have_outputs) {
    z.resize(X.rows());
    for (Eigen::Index i = 0; i < X.rows(); ++i) z[i] = sim(X.row(i).transpose());
  }
  Eigen::VectorXd cz;
  if (csim) {
    cz.resize(X.rows());
    for (Eigen::Index i = 0; i < X.rows(); ++i) cz[i] = (*csim)(X.row(i).transpose());
  }
  const Dataset initial(X, z, c.transformation, domain);
  const CandidateSet cands = make_candidates(c.candidates, domain, derive_seed(c.seed, kCandidateStream));

  LoopConfig lc;
  lc.criterion = c.criterion;
  lc.stop = c.stop;
  lc.fit = c.fit;
  lc.refit_every = c.refit_every;
  lc.percentile_mc = c.percentile_mc;
  lc.keep_surfaces = !c.surfaces_dir.empty();
  lc.seed = derive_seed(c.seed, kLoopStream);
  const RunHistory h = run_loop(initial, sim, cands, lc, csim ? &*csim : nullptr, csim ? &cz : nullptr);

  json j = history_to_json(h);
  j["seed"] = c.seed;
  j["criterion"] = criterion_to_json(c.criterion);
  j["transformation"] = std::string(c.transformation.name());
  j["sense"] = c.maximize ? "maximize" : "minimize";
  j["domain"] = domain_to_json(domain);
  if (c.maximize && h.best_x.size() > 0) j["best_output"] = -h.best_z;

  if (!c.surfaces_dir.empty()) {
    fs::create_directories(c.surfaces_dir);
    for (const auto& r : h.iterations) {
      if (r.surface) {
        write_surface_csv((fs::path(c.surfaces_dir) / ("surface_" + std::to_string(r.index) + ".csv")).string(),
                          *r.surface);
      }
    }
  }
  if (!c.dataset_path.empty()) {
    Dataset final_data = initial;
    for (const auto& r : h.iterations) final_data = final_data.with_run(r.x, r.z);
    write_dataset_csv(c.dataset_path, final_data);
  }
  return j;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Sequential design of computer experiments by expected improvement", "seqei"};
  app.require_subcommand(1);

  std::uint64_t seed = 0;

  auto* design = app.add_subcommand("design", "Generate a (maximin) Latin hypercube design");
  int n = 0;
  std::string bounds;
  bool maximin = false;
  bool centered = false;
  int restarts = 20;
  std::string design_out;
  design->add_option("--n", n, "Number of runs")->required();
  design->add_option("--bounds", bounds, "Bounds as l1:u1,l2:u2,...")->required();
  design->add_flag("--maximin", maximin, "Maximize the minimum interpoint distance");
  design->add_option("--restarts", restarts, "Maximin restarts")->capture_default_str();
  design->add_flag("--centered", centered, "Use stratum centres instead of jitter");
  design->add_option("--seed", seed, "Random seed");
  design->add_option("--out", design_out, "Output CSV (default: stdout)");

  auto* fitc = app.add_subcommand("fit", "Fit a GP emulator to a dataset CSV (x1,...,xd,z)");
  std::string data_path;
  std::string fit_bounds;
  std::string transform = "identity";
  bool select = false;
  FitConfig fc;
  double fixed_p = 0.0;
  std::string model_out = "model.json";
  fitc->add_option("--data", data_path, "Dataset CSV")->required();
  fitc->add_option("--bounds", fit_bounds, "Input bounds (default: bounding box of the data)");
  fitc->add_option("--transform", transform, "identity | sqrt | log1p")->capture_default_str();
  fitc->add_flag("--select-transform", select, "Choose the transformation by LOO diagnostics");
  fitc->add_option("--nugget", fc.nugget, "Correlation nugget")->capture_default_str();
  fitc->add_option("--starts", fc.starts, "Likelihood multistarts (default 10*d)");
  fitc->add_option("--fixed-p", fixed_p, "Hold every smoothness exponent at this value");
  fitc->add_option("--seed", seed, "Random seed");
  fitc->add_option("--out", model_out, "Model JSON path")->capture_default_str();

  auto* prop = app.add_subcommand("propose", "Propose the next run by maximizing EI");
  ProposeArgs pa;
  prop->add_option("--model", pa.model_path, "Model JSON")->required();
  prop->add_option("--criterion", pa.criterion_json, "Criterion as JSON (overrides --kind etc.)");
  prop->add_option("--kind", pa.kind, "Criterion kind")->capture_default_str();
  prop->add_option("--a", pa.a, "Contour level");
  prop->add_option("--levels", pa.levels, "Contour levels a1,a2,...");
  prop->add_option("--alpha", pa.alpha, "Contour tolerance multiplier")->capture_default_str();
  prop->add_option("--g", pa.g, "Improvement exponent");
  prop->add_option("--w", pa.w, "Weighted-EI weight")->capture_default_str();
  prop->add_option("--lambda", pa.lambda, "Lower-quantile multiplier")->capture_default_str();
  prop->add_option("--p-target", pa.p_target, "Percentile target")->capture_default_str();
  prop->add_option("--constraint-bounds", pa.constraint_bounds, "Feasible interval lo:hi");
  prop->add_option("--constraint-model", pa.constraint_model_path, "Constraint model JSON");
  prop->add_option("--grid", pa.grid, "Grid resolution m1,m2,...");
  prop->add_option("--lhs", pa.lhs, "Use an n-point Latin hypercube as candidates");
  prop->add_option("--candidates", pa.candidates_path, "Candidate CSV (x1,...,xd)");
  prop->add_option("--mc", pa.mc, "Monte Carlo draws for percentile estimates")->capture_default_str();
  prop->add_option("--seed", seed, "Random seed");
  prop->add_option("--out", pa.out_path, "Proposal JSON (default: stdout)");
  prop->add_option("--surface", pa.surface_path, "Write x1,...,xd,yhat,s,ei per candidate");

  auto* loop = app.add_subcommand("loop", "Run the sequential EI loop from a run config");
  std::string config_path;
  std::string loop_out;
  loop->add_option("--config", config_path, "Run config JSON")->required();
  loop->add_option("--seed", seed, "Seed (used when the config has none)");
  loop->add_option("--out", loop_out, "History JSON (used when the config has none)");

  auto* verify = app.add_subcommand("verify", "Check a closed-form EI against Monte Carlo");
  std::string kind;
  int trials = 100;
  long samples = 1000000;
  int vg = 2;
  double valpha = 1.96;
  double vlambda = 1.96;
  int vlevels = 2;
  std::string report_out;
  verify->add_option("--kind", kind, "Criterion kind")->required();
  verify->add_option("--trials", trials, "Random configurations")->capture_default_str();
  verify->add_option("--samples", samples, "Monte Carlo draws per trial")->capture_default_str();
  verify->add_option("--g", vg, "Exponent for exponentiated/percentile kinds")->capture_default_str();
  verify->add_option("--alpha", valpha, "Contour tolerance multiplier")->capture_default_str();
  verify->add_option("--lambda", vlambda, "Lower-quantile multiplier")->capture_default_str();
  verify->add_option("--levels", vlevels, "Number of contour levels (multi_contour)")->capture_default_str();
  verify->add_option("--seed", seed, "Random seed");
  verify->add_option("--out", report_out, "Report JSON path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kSuccess;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  }

  try {
    if (*design) return cmd_design(n, bounds, maximin, restarts, centered, seed, design_out, out, err);
    if (*fitc) {
      fc.seed = seed;
      if (fitc->count("--fixed-p") > 0) fc.fixed_p = fixed_p;
      return cmd_fit(data_path, fit_bounds, transform, select, fc, model_out, out, err);
    }
    if (*prop) {
      pa.seed = seed;
      return cmd_propose(pa, out, err);
    }
    if (*loop) return cmd_loop(config_path, seed, loop_out, out);
    if (*verify) {
      return cmd_verify(kind, trials, samples, seed, vg, valpha, vlevels, vlambda, report_out, out);
    }
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kFailure;
  }
  return kUsage;
}

}  // namespace seqei::cli
