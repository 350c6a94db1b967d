#include "hymh/scenario.hpp"

#include "hymh/analysis.hpp"
#include "hymh/field_io.hpp"
#include "hymh/random.hpp"

#include "json.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

namespace hymh {

using nlohmann::json;

namespace {

// ---------------------------------------------------------------------------
// Parsing

void check_keys(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
  if (!obj.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto& [key, _] : obj.items())
    if (!allowed.count(key)) throw ConfigError(where + ": unknown key '" + key + "'");
}

template <typename T>
T read(const json& obj, const std::string& key, T fallback, const std::string& where) {
  if (!obj.contains(key)) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(where + "." + key + ": wrong type");
  }
}

Complex parse_entry(const json& e, const std::string& where) {
  if (e.is_number()) return {e.get<double>(), 0.0};
  if (e.is_array() && e.size() == 2 && e[0].is_number() && e[1].is_number())
    return {e[0].get<double>(), e[1].get<double>()};
  throw ConfigError(where + ": matrix entries must be numbers or [re, im] pairs");
}

CMatrix parse_matrix(const json& m, const std::string& where) {
  if (!m.is_array() || m.empty()) throw ConfigError(where + ": matrix must be a non-empty array of rows");
  const auto rows = static_cast<Eigen::Index>(m.size());
  CMatrix out(rows, rows);
  for (Eigen::Index a = 0; a < rows; ++a) {
    const json& row = m[a];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != rows)
      throw ConfigError(where + ": matrix must be square");
    for (Eigen::Index b = 0; b < rows; ++b) out(a, b) = parse_entry(row[b], where);
  }
  return out;
}

json matrix_json(const CMatrix& m) {
  json rows = json::array();
  for (Eigen::Index a = 0; a < m.rows(); ++a) {
    json row = json::array();
    for (Eigen::Index b = 0; b < m.cols(); ++b) row.push_back({m(a, b).real(), m(a, b).imag()});
    rows.push_back(row);
  }
  return rows;
}

void require_one_of(const std::string& value, const std::set<std::string>& options, const std::string& where) {
  if (!options.count(value)) throw ConfigError(where + ": unsupported value '" + value + "'");
}

}  // namespace

ScenarioConfig parse_config(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  check_keys(doc, {"command", "seed", "grid", "base_metric", "rank", "higgs", "twist", "h0", "target", "solver",
                   "initial_guesses", "checks", "outputs"},
             "config");
  ScenarioConfig c;
  c.command = read<std::string>(doc, "command", c.command, "config");
  require_one_of(c.command, {"solve", "flow", "verify-identities", "compare", "chern"}, "config.command");
  c.seed = read<std::uint64_t>(doc, "seed", c.seed, "config");
  c.rank = read<int>(doc, "rank", c.rank, "config");
  if (c.rank < 1 || c.rank > 8) throw ConfigError("config.rank: must be between 1 and 8");

  if (doc.contains("grid")) {
    const json& g = doc["grid"];
    check_keys(g, {"n", "N", "periods"}, "grid");
    c.n = read<int>(g, "n", c.n, "grid");
    c.N = read<int>(g, "N", c.N, "grid");
    c.periods = read<std::vector<double>>(g, "periods", c.periods, "grid");
  }
  if (c.n != 1 && c.n != 2) throw ConfigError("grid.n: must be 1 or 2");
  if (c.N < 8 || (c.N & (c.N - 1)) != 0) throw ConfigError("grid.N: must be a power of two >= 8");
  if (!c.periods.empty() && static_cast<int>(c.periods.size()) != 2 * c.n)
    throw ConfigError("grid.periods: need 2n entries");

  if (doc.contains("base_metric")) {
    const json& m = doc["base_metric"];
    check_keys(m, {"family", "g0", "amplitude", "kmax"}, "base_metric");
    c.metric_family = read<std::string>(m, "family", c.metric_family, "base_metric");
    require_one_of(c.metric_family, {"identity", "constant", "conformal"}, "base_metric.family");
    if (m.contains("g0")) c.g0 = parse_matrix(m["g0"], "base_metric.g0");
    c.metric_amplitude = read<double>(m, "amplitude", c.metric_amplitude, "base_metric");
    c.metric_kmax = read<int>(m, "kmax", c.metric_kmax, "base_metric");
    if (c.metric_family == "identity" && (m.contains("g0") || m.contains("amplitude")))
      throw ConfigError("base_metric: identity family takes no parameters");
  }
  if (c.g0 && c.g0->rows() != c.n) throw ConfigError("base_metric.g0: must be n x n");

  if (doc.contains("higgs")) {
    const json& h = doc["higgs"];
    check_keys(h, {"recipe", "amplitude", "components"}, "higgs");
    c.higgs_recipe = read<std::string>(h, "recipe", c.higgs_recipe, "higgs");
    require_one_of(c.higgs_recipe, {"zero", "random-commuting", "random", "explicit"}, "higgs.recipe");
    c.higgs_amplitude = read<double>(h, "amplitude", c.higgs_amplitude, "higgs");
    if (h.contains("components")) {
      if (c.higgs_recipe != "explicit") throw ConfigError("higgs.components: only with recipe 'explicit'");
      for (const json& m : h["components"]) c.higgs_components.push_back(parse_matrix(m, "higgs.components"));
    }
    if (c.higgs_recipe == "explicit") {
      if (static_cast<int>(c.higgs_components.size()) != c.n) throw ConfigError("higgs.components: need n matrices");
      for (const CMatrix& m : c.higgs_components)
        if (m.rows() != c.rank) throw ConfigError("higgs.components: matrices must be rank x rank");
    }
  }

  if (doc.contains("twist")) {
    const json& t = doc["twist"];
    check_keys(t, {"recipe", "margin", "matrix"}, "twist");
    c.twist_recipe = read<std::string>(t, "recipe", c.twist_recipe, "twist");
    require_one_of(c.twist_recipe, {"none", "auto", "explicit"}, "twist.recipe");
    c.twist_margin = read<double>(t, "margin", c.twist_margin, "twist");
    if (t.contains("matrix")) {
      if (c.twist_recipe != "explicit") throw ConfigError("twist.matrix: only with recipe 'explicit'");
      c.twist = parse_matrix(t["matrix"], "twist.matrix");
      if (c.twist->rows() != c.n) throw ConfigError("twist.matrix: must be n x n");
      if ((*c.twist - c.twist->adjoint()).norm() > 1e-12) throw ConfigError("twist.matrix: must be Hermitian");
    }
    if (c.twist_recipe == "explicit" && !c.twist) throw ConfigError("twist: recipe 'explicit' needs 'matrix'");
  }

  if (doc.contains("h0")) {
    const json& h = doc["h0"];
    check_keys(h, {"family", "amplitude", "kmax"}, "h0");
    c.h0_family = read<std::string>(h, "family", c.h0_family, "h0");
    require_one_of(c.h0_family, {"identity", "random"}, "h0.family");
    c.h0_amplitude = read<double>(h, "amplitude", c.h0_amplitude, "h0");
    c.h0_kmax = read<int>(h, "kmax", c.h0_kmax, "h0");
  }

  if (doc.contains("target")) {
    const json& t = doc["target"];
    const std::string recipe = read<std::string>(t, "recipe", c.target_recipe, "target");
    require_one_of(recipe, {"manufactured", "omega-shift", "conformal", "file"}, "target.recipe");
    c.target_recipe = recipe;
    if (recipe == "file") {
      check_keys(t, {"recipe", "path"}, "target");
      c.target_path = read<std::string>(t, "path", "", "target");
      if (c.target_path.empty()) throw ConfigError("target: recipe 'file' needs 'path'");
      if (!std::filesystem::exists(c.target_path)) throw ConfigError("target.path: file not found: " + c.target_path);
    } else if (recipe == "omega-shift") {
      check_keys(t, {"recipe", "epsilon"}, "target");
      c.target_epsilon = read<double>(t, "epsilon", c.target_epsilon, "target");
      if (c.target_epsilon < 0.0) throw ConfigError("target.epsilon: must be nonnegative");
    } else {
      check_keys(t, {"recipe", "amplitude", "kmax"}, "target");
      c.target_amplitude = read<double>(t, "amplitude", c.target_amplitude, "target");
      c.target_kmax = read<int>(t, "kmax", c.target_kmax, "target");
    }
  }

  if (doc.contains("solver")) {
    const json& s = doc["solver"];
    check_keys(s, {"residual_tol", "newton_max_iter", "krylov_tol", "krylov_restart", "krylov_max_iter", "pd_margin",
                   "dt", "dt_min", "max_steps", "flow_tol"},
               "solver");
    SolverOptions& o = c.solver;
    o.residual_tol = read<double>(s, "residual_tol", o.residual_tol, "solver");
    o.newton_max_iter = read<int>(s, "newton_max_iter", o.newton_max_iter, "solver");
    o.krylov_tol = read<double>(s, "krylov_tol", o.krylov_tol, "solver");
    o.krylov_restart = read<int>(s, "krylov_restart", o.krylov_restart, "solver");
    o.krylov_max_iter = read<int>(s, "krylov_max_iter", o.krylov_max_iter, "solver");
    o.pd_margin = read<double>(s, "pd_margin", o.pd_margin, "solver");
    o.dt = read<double>(s, "dt", o.dt, "solver");
    o.dt_min = read<double>(s, "dt_min", o.dt_min, "solver");
    o.max_steps = read<int>(s, "max_steps", o.max_steps, "solver");
    c.flow_tol = read<double>(s, "flow_tol", c.flow_tol, "solver");
  }

  c.initial_guesses = read<std::vector<std::string>>(doc, "initial_guesses", c.initial_guesses, "config");
  if (c.initial_guesses.empty()) throw ConfigError("initial_guesses: must not be empty");
  for (const auto& g : c.initial_guesses) require_one_of(g, {"identity", "random"}, "initial_guesses");

  if (doc.contains("checks")) {
    const json& k = doc["checks"];
    check_keys(k, {"recovery_tol", "agreement_tol", "identity_tol", "comparison_tol"}, "checks");
    c.recovery_tol = read<double>(k, "recovery_tol", c.recovery_tol, "checks");
    c.agreement_tol = read<double>(k, "agreement_tol", c.agreement_tol, "checks");
    c.identity_tol = read<double>(k, "identity_tol", c.identity_tol, "checks");
    c.comparison_tol = read<double>(k, "comparison_tol", c.comparison_tol, "checks");
  }

  if (doc.contains("outputs")) {
    const json& o = doc["outputs"];
    check_keys(o, {"fields", "csv"}, "outputs");
    c.write_fields = read<bool>(o, "fields", c.write_fields, "outputs");
    c.write_csv = read<bool>(o, "csv", c.write_csv, "outputs");
  }
  return c;
}

ScenarioConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

// ---------------------------------------------------------------------------
// Instances

namespace {

enum Stream : std::uint64_t { kMetric = 1, kHiggs = 2, kH0 = 3, kTarget = 4, kGuess = 5, kCheck = 6 };

HiggsField make_higgs(const ScenarioConfig& c, CounterRng rng) {
  const int n = c.n, r = c.rank;
  if (c.higgs_recipe == "zero") return HiggsField(n, r);
  if (c.higgs_recipe == "explicit") return HiggsField(c.higgs_components);
  std::vector<CMatrix> comps;
  if (c.higgs_recipe == "random") {
    for (int i = 0; i < n; ++i) comps.push_back(random_matrix(rng, r, c.higgs_amplitude));
  } else {
    // Polynomials in one matrix commute.
    const CMatrix M = random_matrix(rng, r, c.higgs_amplitude);
    for (int i = 0; i < n; ++i) {
      const double a = rng.uniform(-1.0, 1.0), b = rng.uniform(-1.0, 1.0);
      comps.push_back(a * M + b * M * M);
    }
  }
  return HiggsField(comps);
}

// Pointwise smallest eigenvalue of S relative to h. S^h is self-adjoint only up
// to discretisation error, so it is symmetrised first.
ScalarField min_eigenvalue(const MatrixField& S, const HermitianMetricField& h) {
  return herm_eig_bounds(hermitian_part(S, h), h).min;
}

}  // namespace

Instance build_instance(const ScenarioConfig& c) {
  GridSpec grid = [&] {
    try {
      return GridSpec(c.n, c.N, c.periods);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
  }();
  const CounterRng root(c.seed);
  Instance inst;
  const int r = c.rank;

  CounterRng mrng = root.split(kMetric);
  if (c.metric_family == "identity") {
    inst.g = BaseMetric::identity(grid);
  } else {
    const CMatrix g0 = c.g0 ? *c.g0
                            : (c.metric_family == "constant" ? random_hpd(mrng, c.n, 0.7, 1.5)
                                                             : CMatrix(CMatrix::Identity(c.n, c.n)));
    try {
      if (c.metric_family == "constant") {
        inst.g = BaseMetric::constant(grid, g0);
      } else {
        ScalarField u = random_trig_polynomial(grid, mrng, c.metric_kmax, 1.0, true);
        const double sup = sup_abs(u);
        if (sup > 0.0) u *= Complex(c.metric_amplitude / sup);
        inst.g = BaseMetric::conformal(u, g0);
      }
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("base_metric: ") + e.what());
    }
  }

  HiggsField theta = make_higgs(c, root.split(kHiggs));

  CounterRng hrng = root.split(kH0);
  inst.h0 = c.h0_family == "identity" ? HermitianMetricField(MatrixField::identity(grid, r))
                                      : random_metric(grid, r, hrng, c.h0_kmax, c.h0_amplitude);

  // Known solution, if the recipe provides one.
  CounterRng trng = root.split(kTarget);
  std::optional<HermitianMetricField> h_true;
  const bool needs_target = c.command != "chern";
  if (!needs_target) {
  } else if (c.target_recipe == "manufactured") {
    MatrixField K = random_hermitian_field(grid, r, trng, c.target_kmax, 1.0);
    MatrixField S_true = endo_product(K, inst.h0.inverse());
    const double sup = sup_norm(S_true, inst.h0);
    if (sup > 0.0) S_true *= Complex(c.target_amplitude / sup);
    inst.H_true = exp_self_adjoint(S_true, inst.h0);
  } else if (c.target_recipe == "conformal") {
    ScalarField f = random_trig_polynomial(grid, trng, c.target_kmax, 1.0, true);
    const double sup = sup_abs(f);
    if (sup > 0.0) f *= Complex(c.target_amplitude / sup);
    inst.H_true = scale(exp(f * Complex(-1.0)), MatrixField::identity(grid, r));
  } else if (c.target_recipe == "omega-shift" && c.target_epsilon == 0.0) {
    inst.H_true = MatrixField::identity(grid, r);
  }
  if (inst.H_true) h_true.emplace(metric_from_endo(*inst.H_true, inst.h0));

  // Twist.
  CMatrix B = CMatrix::Zero(c.n, c.n);
  if (c.twist_recipe == "explicit") {
    B = *c.twist;
  } else if (c.twist_recipe == "auto") {
    // B = beta Id shifts every S^h by beta tr(g^{-1}) Id; choose beta so the
    // smallest eigenvalue of Omega (and of S^{h_true}) equals the margin.
    const HiggsBundle plain(theta);
    ScalarField trg(grid);
    for (std::size_t p = 0; p < grid.size(); ++p) trg[p] = inst.g.gup().at(p).trace();
    const double margin = c.twist_margin + (c.target_recipe == "omega-shift" ? 1.5 * c.target_epsilon : 0.0);
    double beta = -1e300;
    auto absorb = [&](const HermitianMetricField& h) {
      const ScalarField m = min_eigenvalue(hym_higgs_tensor(h, plain, inst.g), h);
      for (std::size_t p = 0; p < grid.size(); ++p) beta = std::max(beta, (margin - m[p].real()) / trg[p].real());
    };
    absorb(inst.h0);
    if (h_true) absorb(*h_true);
    B = beta * CMatrix::Identity(c.n, c.n);
  }
  inst.bundle = HiggsBundle(theta, B);

  if (!needs_target) {
  } else if (c.target_recipe == "file") {
    MatrixField P;
    try {
      P = read_matrix_field(c.target_path);
    } catch (const std::runtime_error& e) {
      throw ConfigError(std::string("target.path: ") + e.what());
    }
    if (P.grid() != grid || P.rank() != r) throw ConfigError("target.path: field does not match grid or rank");
    inst.P = std::move(P);
  } else if (c.target_recipe == "omega-shift") {
    MatrixField P = hym_higgs_tensor(inst.h0, inst.bundle, inst.g);
    const ScalarField bump = ScalarField::sample(grid, [](std::span<const double> x) { return 1.0 + 0.5 * std::cos(x[0]); });
    P -= scale(bump * Complex(c.target_epsilon), MatrixField::identity(grid, r));
    inst.P = std::move(P);
  } else {
    inst.P = endo_product(hym_higgs_tensor(*h_true, inst.bundle, inst.g), *inst.H_true);
  }
  return inst;
}

ProblemSpec make_problem(const ScenarioConfig& c, const Instance& inst) {
  return ProblemSpec{inst.g, inst.bundle, inst.h0, inst.P, c.solver};
}

// ---------------------------------------------------------------------------
// Pipelines

namespace {

struct Context {
  const ScenarioConfig& cfg;
  std::string out_dir;
  json results = json::object();
  json verdicts = json::object();
  json timing = json::object();
  bool numerical_failure = false;

  void verdict(const std::string& name, bool ok) { verdicts[name] = ok; }
  std::string path(const std::string& file) const { return (std::filesystem::path(out_dir) / file).string(); }
};

double now_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

json report_json(const SolveReport& r) {
  return json{{"converged", r.converged},
              {"iterations", r.iterations},
              {"residual_history", r.residual_history},
              {"step_history", r.step_history},
              {"krylov_iterations", r.krylov_iterations},
              {"dt_halvings", r.dt_halvings},
              {"h_eig_min", r.h_eig_min},
              {"h_eig_max", r.h_eig_max},
              {"c1_proxy", r.c1_proxy},
              {"self_test_max", r.self_test_max},
              {"hermitian_defect_max", r.hermitian_defect_max},
              {"omega_positivity_lost", r.omega_positivity_lost},
              {"message", r.message}};
}

MatrixField initial_guess(const std::string& kind, const Instance& inst, const ScenarioConfig& c, int index) {
  const GridSpec& grid = inst.h0.grid();
  if (kind == "identity") return MatrixField::identity(grid, c.rank);
  CounterRng rng = CounterRng(c.seed).split(kGuess).split(static_cast<std::uint64_t>(index));
  MatrixField S = endo_product(random_hermitian_field(grid, c.rank, rng, 1, 1.0), inst.h0.inverse());
  const double sup = sup_norm(S, inst.h0);
  if (sup > 0.0) S *= Complex(0.3 / sup);
  return exp_self_adjoint(S, inst.h0);
}

void write_history_csv(const std::string& path, const std::vector<std::pair<std::string, SolveReport>>& runs) {
  std::ofstream out(path);
  out << "run,iteration,residual,step,krylov\n";
  out.precision(17);
  for (const auto& [name, r] : runs)
    for (std::size_t k = 0; k < r.residual_history.size(); ++k) {
      out << name << ',' << k << ',' << r.residual_history[k] << ',';
      if (k > 0 && k - 1 < r.step_history.size()) out << r.step_history[k - 1];
      out << ',';
      if (k < r.krylov_iterations.size()) out << r.krylov_iterations[k];
      out << '\n';
    }
}

double recovery_error(const SolveReport& r, const Instance& inst) {
  return sup_norm(r.H - *inst.H_true, inst.h0);
}

void run_solve(Context& ctx, const Instance& inst) {
  const ScenarioConfig& c = ctx.cfg;
  const ProblemSpec spec = make_problem(c, inst);
  spec.validate();
  std::vector<std::pair<std::string, SolveReport>> runs;
  json jr = json::array();
  for (std::size_t k = 0; k < c.initial_guesses.size(); ++k) {
    const MatrixField H0 = initial_guess(c.initial_guesses[k], inst, c, static_cast<int>(k));
    SolveReport rep = newton_solve(spec, &H0);
    json j = report_json(rep);
    j["initial_guess"] = c.initial_guesses[k];
    if (inst.H_true) j["recovery_error"] = recovery_error(rep, inst);
    jr.push_back(j);
    ctx.timing["newton_" + std::to_string(k)] = rep.wall_time;
    if (!rep.converged) ctx.numerical_failure = true;
    ctx.verdict("converged_" + std::to_string(k), rep.converged);
    if (inst.H_true) ctx.verdict("recovery_" + std::to_string(k), recovery_error(rep, inst) <= c.recovery_tol);
    runs.emplace_back(c.initial_guesses[k] + "_" + std::to_string(k), std::move(rep));
  }
  ctx.results["newton"] = jr;
  if (runs.size() > 1) {
    double worst = 0.0;
    for (std::size_t k = 1; k < runs.size(); ++k)
      worst = std::max(worst, sup_norm(runs[k].second.H - runs[0].second.H, inst.h0));
    ctx.results["guess_agreement"] = worst;
    ctx.verdict("guess_agreement", worst <= c.agreement_tol);
  }
  if (!ctx.out_dir.empty()) {
    if (c.write_csv) write_history_csv(ctx.path("residuals.csv"), runs);
    if (c.write_fields) write_field(ctx.path("H.bin"), runs.front().second.H);
  }
}

void run_flow(Context& ctx, const Instance& inst) {
  const ScenarioConfig& c = ctx.cfg;
  const ProblemSpec spec = make_problem(c, inst);
  spec.validate();
  const SolveReport flow = heat_flow_solve(spec, c.flow_tol);
  const SolveReport newton = newton_solve(spec);
  json jf = report_json(flow);
  // Per-step histories of a flow are long; keep the endpoints.
  if (!flow.residual_history.empty())
    jf["residual_history"] = json::array({flow.residual_history.front(), flow.residual_history.back()});
  jf["step_history"] = json::array();
  ctx.results["flow"] = jf;
  ctx.results["newton"] = report_json(newton);
  ctx.timing["flow"] = flow.wall_time;
  ctx.timing["newton"] = newton.wall_time;
  if (!flow.converged || !newton.converged) ctx.numerical_failure = true;
  ctx.verdict("flow_converged", flow.converged);
  ctx.verdict("newton_converged", newton.converged);
  const double diff = sup_norm(flow.H - newton.H, inst.h0);
  ctx.results["flow_newton_difference"] = diff;
  ctx.verdict("flow_newton_agreement", diff <= c.agreement_tol);
  if (inst.H_true) {
    ctx.results["flow_recovery_error"] = recovery_error(flow, inst);
    ctx.verdict("flow_recovery", recovery_error(flow, inst) <= c.recovery_tol);
  }
  if (!ctx.out_dir.empty() && c.write_csv)
    write_history_csv(ctx.path("residuals.csv"), {{"newton", newton}});
  if (!ctx.out_dir.empty() && c.write_fields) write_field(ctx.path("H_flow.bin"), flow.H);
}

void run_verify(Context& ctx, const Instance& inst) {
  const ScenarioConfig& c = ctx.cfg;
  const GridSpec& grid = inst.h0.grid();
  const HiggsField& theta = inst.bundle.theta;
  CounterRng rng = CounterRng(c.seed).split(kCheck);
  MatrixField H = inst.H_true ? *inst.H_true : initial_guess("random", inst, c, 99);
  const HermitianMetricField h = metric_from_endo(H, inst.h0);
  const double tol = c.identity_tol;

  // Curvature difference: S^{H h0} - S^{h0} against Lambda sqrt(-1) D''(D'^{h0}H . H^{-1}).
  const MatrixField S0 = hym_higgs_tensor(inst.h0, inst.bundle, inst.g);
  const MatrixField S1 = hym_higgs_tensor(h, inst.bundle, inst.g);
  const double cd = sup_norm(S1 - S0 - curvature_difference(H, inst.h0, theta, inst.g), inst.h0);
  ctx.results["curvature_difference"] = cd;
  ctx.verdict("curvature_difference", cd <= tol);

  // F_theta through the form calculus and through the four-term expansion.
  const double ft = sup_frobenius(f_theta(H, inst.h0, theta, inst.g) - f_theta_expanded(H, inst.h0, theta, inst.g));
  ctx.results["f_theta_paths"] = ft;
  ctx.verdict("f_theta_paths", ft <= tol);

  // Pointwise tensor formula against the form-level (1,1) curvature.
  {
    const FormMatrixField th = theta.form(grid);
    const FormMatrixField ts = antiholomorphic_one_form(higgs_adjoint(theta, h));
    FormMatrixField r11 = chern_curvature(h);
    if (!theta.is_zero()) {
      r11 -= wedge(th, ts);
      r11 -= wedge(ts, th);
    }
    MatrixField viaforms = lambda_contract(r11, inst.g);
    ScalarField tw(grid);
    for (std::size_t p = 0; p < grid.size(); ++p)
      for (int i = 0; i < c.n; ++i)
        for (int j = 0; j < c.n; ++j) tw[p] += inst.g.gup().at(p)(i, j) * inst.bundle.twist(i, j);
    viaforms += scale(tw, MatrixField::identity(grid, c.rank));
    const double d = sup_frobenius(viaforms - S1);
    ctx.results["higgs_tensor_paths"] = d;
    ctx.verdict("higgs_tensor_paths", d <= tol);
  }

  const double adj = adjoint_transform_check(theta, inst.h0, h);
  ctx.results["adjoint_transform"] = adj;
  ctx.verdict("adjoint_transform", adj <= tol);

  const double res_paths = sup_frobenius(residual(H, make_problem(c, inst)) - residual_expanded(H, make_problem(c, inst)));
  ctx.results["residual_paths"] = res_paths;
  ctx.verdict("residual_paths", res_paths <= tol);

  const bool kahler = inst.g.flags().is_kahler;
  const double bk = bochner_kodaira_residual(theta, inst.h0, inst.g, c.seed);
  ctx.results["bochner_kodaira"] = bk;
  ctx.results["base_kahler"] = kahler;
  ctx.verdict("bochner_kodaira", bk <= (kahler ? 1e-7 : 1e-6));

  // Conformal shift law.
  {
    ScalarField f = random_trig_polynomial(grid, rng, 2, 1.0, true);
    f *= Complex(0.5 / std::max(sup_abs(f), 1e-300));
    const HermitianMetricField hf(scale(exp(f * Complex(-1.0)), inst.h0.matrix()));
    const MatrixField lhs = hym_higgs_tensor(hf, inst.bundle, inst.g) - S0 -
                            scale(laplacian(f, inst.g), MatrixField::identity(grid, c.rank));
    const double d = sup_norm(lhs, inst.h0);
    ctx.results["conformal_shift"] = d;
    ctx.verdict("conformal_shift", d <= 1e-8);
  }

  if (c.rank == 1) {
    const MatrixField plain = hym_higgs_tensor(h, HiggsBundle(HiggsField(c.n, 1), inst.bundle.twist), inst.g);
    const double d = sup_frobenius(plain - S1) / std::max(1.0, sup_frobenius(S1));
    ctx.results["rank1_invisibility"] = d;
    ctx.verdict("rank1_invisibility", d <= 1e-13);
  }
}

void run_compare(Context& ctx, const Instance& inst) {
  const ScenarioConfig& c = ctx.cfg;
  const ProblemSpec spec = make_problem(c, inst);
  spec.validate();
  const MatrixField S0 = spec.omega();
  const double gap = herm_eig_bounds(hermitian_part(S0 - spec.P, inst.h0), inst.h0).min.values().real().minCoeff();
  ctx.results["target_gap"] = gap;
  const SolveReport rep = newton_solve(spec);
  ctx.results["newton"] = report_json(rep);
  ctx.timing["newton"] = rep.wall_time;
  if (!rep.converged) {
    ctx.numerical_failure = true;
    ctx.verdict("converged", false);
    return;
  }
  ctx.verdict("converged", true);
  const HermitianMetricField h1 = metric_from_endo(rep.H, inst.h0);
  const ComparisonVerdict v = comparison_check(h1, inst.h0, inst.bundle, inst.g, c.comparison_tol);
  ctx.results["comparison"] = json{{"status", to_string(v.status)},
                                   {"max_eigenvalue", v.max_eigenvalue},
                                   {"omega_min", v.omega_min},
                                   {"hypothesis_gap", v.hypothesis_gap},
                                   {"tolerance", v.tolerance},
                                   {"hypothesis", v.hypothesis}};
  if (v.status == ComparisonVerdict::Status::hypothesis_not_met)
    throw HypothesisError(v.hypothesis, "comparison hypotheses do not hold");
  ctx.verdict("comparison", v.pass);
  if (!ctx.out_dir.empty() && c.write_csv) {
    std::ofstream out(ctx.path("kappa.csv"));
    out << "point,kappa\n";
    out.precision(17);
    for (std::size_t p = 0; p < v.kappa.size(); ++p) out << p << ',' << v.kappa[p].real() << '\n';
  }
}

void run_chern(Context& ctx, const Instance& inst) {
  const ScenarioConfig& c = ctx.cfg;
  if (!inst.bundle.theta.is_integrable()) throw HypothesisError("θ∧θ=0", "the Higgs field is not integrable");
  if (c.n != 2) throw HypothesisError("n = 2", "the Chern number identities are evaluated on complex surfaces");
  if (!inst.g.is_constant()) throw HypothesisError("Kähler base", "the base metric must be constant");
  const ChernReport r = chern_inequality_check(inst.h0, inst.bundle, inst.g);
  auto cj = [](Complex z) { return json::array({z.real(), z.imag()}); };
  ctx.results["chern"] = json{{"c1_tilde_sq_form", cj(r.c1_tilde_sq_form)},
                              {"c1_tilde_sq_scalar", cj(r.c1_tilde_sq_scalar)},
                              {"c2_tilde_form", cj(r.c2_tilde_form)},
                              {"c2_tilde_scalar", cj(r.c2_tilde_scalar)},
                              {"c1_residual", r.c1_residual},
                              {"c2_residual", r.c2_residual},
                              {"c1_omega", cj(r.c1_omega)},
                              {"c1_sq", cj(r.c1_sq)},
                              {"c2", cj(r.c2)},
                              {"discriminant_full", cj(r.discriminant_full)},
                              {"discriminant_tilde", cj(r.discriminant_tilde)},
                              {"eta_integral", cj(r.eta_integral)},
                              {"eta_residual", r.eta_residual},
                              {"rhs", r.rhs},
                              {"a", r.a},
                              {"b", r.b},
                              {"t2_residual", r.t2_residual},
                              {"spread_identity_residual", r.spread_identity_residual},
                              {"spread_violation", r.spread_violation},
                              {"max_imaginary", r.max_imaginary},
                              {"twisted", inst.bundle.twisted()}};
  ctx.verdict("c1_identity", r.c1_residual <= 1e-6);
  ctx.verdict("c2_identity", r.c2_residual <= 1e-6);
  ctx.verdict("t2_identity", r.t2_residual <= 1e-9);
  ctx.verdict("eta_nonnegative", r.eta_integral.real() >= -1e-9);
  ctx.verdict("eta_identity", r.eta_residual <= 1e-6);
  ctx.verdict("spread", r.spread_identity_residual <= 1e-12 && r.spread_violation <= 1e-12);
  ctx.verdict("real_integrals", r.max_imaginary <= 1e-9);
  ctx.verdict("tilde_bound", r.tilde_bound);
  ctx.verdict("full_bound", r.full_bound);
  if (!inst.bundle.twisted()) {
    const double worst = std::max({std::abs(r.c1_omega), std::abs(r.c1_sq), std::abs(r.c2)});
    ctx.results["trivial_bundle_integrals"] = worst;
    ctx.verdict("trivial_bundle_integrals", worst <= 1e-7);
  }
}

}  // namespace

RunOutcome run_scenario(const ScenarioConfig& cfg, const std::string& out_dir) {
  const auto t0 = std::chrono::steady_clock::now();
  Context ctx{cfg, out_dir};
  json summary = {{"schema_version", 1},
                  {"command", cfg.command},
                  {"seed", cfg.seed},
                  {"grid", {{"n", cfg.n}, {"N", cfg.N}}},
                  {"rank", cfg.rank}};
  RunOutcome outcome;
  try {
    if (!out_dir.empty()) std::filesystem::create_directories(out_dir);
    const Instance inst = build_instance(cfg);
    summary["twist"] = matrix_json(inst.bundle.twist);
    summary["higgs_integrable"] = inst.bundle.theta.is_integrable();
    if (cfg.command == "solve")
      run_solve(ctx, inst);
    else if (cfg.command == "flow")
      run_flow(ctx, inst);
    else if (cfg.command == "verify-identities")
      run_verify(ctx, inst);
    else if (cfg.command == "compare")
      run_compare(ctx, inst);
    else
      run_chern(ctx, inst);
    bool all = true;
    for (const auto& [_, v] : ctx.verdicts.items()) all = all && v.get<bool>();
    outcome.status = ctx.numerical_failure ? 4 : (all ? 0 : 1);
  } catch (const ConfigError& e) {
    outcome.status = 2;
    summary["error"] = e.what();
  } catch (const HypothesisError& e) {
    outcome.status = 3;
    summary["error"] = e.what();
    summary["violated_hypothesis"] = e.hypothesis();
  } catch (const NumericalError& e) {
    outcome.status = 4;
    summary["error"] = e.what();
  } catch (const std::domain_error& e) {
    outcome.status = 4;
    summary["error"] = e.what();
  }
  summary["results"] = ctx.results;
  summary["verdicts"] = ctx.verdicts;
  summary["status"] = outcome.status;
  ctx.timing["total"] = now_since(t0);
  summary["timing"] = ctx.timing;
  outcome.summary = summary.dump(2);
  if (!out_dir.empty()) {
    std::ofstream out(ctx.path("summary.json"));
    out << outcome.summary << '\n';
  }
  return outcome;
}

std::string strip_timing(const std::string& summary) {
  json doc = json::parse(summary);
  doc.erase("timing");
  return doc.dump(2);
}

}  // namespace hymh
