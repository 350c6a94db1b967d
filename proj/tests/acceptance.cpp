// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.
#include "json.hpp"

#include "hymh/analysis.hpp"
#include "hymh/random.hpp"
#include "hymh/scenario.hpp"

#include <sys/wait.h>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

using namespace hymh;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2e", v);
  return buf;
}

std::string scenario_dir() {
  const char* d = std::getenv("HYMH_SCENARIOS");
  return d ? d : "scenarios";
}

ScenarioConfig scenario(const std::string& name) { return load_config(scenario_dir() + "/" + name); }

HiggsField commuting_higgs(CounterRng& rng, int n, int r, double amp) {
  const CMatrix M = random_matrix(rng, r, amp);
  std::vector<CMatrix> c;
  for (int i = 0; i < n; ++i) c.push_back(rng.uniform(-1, 1) * M + rng.uniform(-1, 1) * M * M);
  return HiggsField(c);
}

MatrixField random_endo(const HermitianMetricField& h0, CounterRng& rng, double amp) {
  MatrixField S = endo_product(random_hermitian_field(h0.grid(), h0.rank(), rng, 1, 1.0), h0.inverse());
  S *= Complex(amp / sup_norm(S, h0));
  return exp_self_adjoint(S, h0);
}

ScalarField bounded(const GridSpec& g, CounterRng& rng, int kmax, double amp) {
  ScalarField f = random_trig_polynomial(g, rng, kmax, 1.0, true);
  f *= Complex(amp / sup_abs(f));
  return f;
}

struct Result {
  bool pass = true;
  std::string detail;
};

int failures = 0;

void report(int id, const std::string& name, const std::function<Result()>& body) {
  const auto t0 = Clock::now();
  Result r;
  try {
    r = body();
  } catch (const std::exception& e) {
    r = {false, std::string("exception: ") + e.what()};
  }
  if (!r.pass) ++failures;
  std::cout << (r.pass ? "PASS" : "FAIL") << "  [" << id << "] " << name << ": " << r.detail << " ("
            << std::fixed;
  std::cout.precision(1);
  std::cout << seconds_since(t0) << " s)" << std::defaultfloat << std::endl;
}

// Identity gate on the curvature difference formula.
Result criterion1() {
  const auto t0 = Clock::now();
  double worst = 0.0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const int n = seed <= 5 ? 1 : 2;
    const GridSpec g(n, n == 1 ? 64 : 16);
    CounterRng rng(seed, 101);
    const BaseMetric m = BaseMetric::constant(g, random_hpd(rng, n, 0.7, 1.5));
    const HermitianMetricField h0 = random_metric(g, 2, rng, 1, 0.3);
    const HiggsField th = commuting_higgs(rng, n, 2, 0.5);
    const MatrixField H = random_endo(h0, rng, 0.3);
    const HiggsBundle b(th);
    const MatrixField lhs = hym_higgs_tensor(metric_from_endo(H, h0), b, m) - hym_higgs_tensor(h0, b, m);
    worst = std::max(worst, sup_norm(lhs - curvature_difference(H, h0, th, m), h0));
  }
  const double t = seconds_since(t0);
  return {worst <= 1e-7 && t < 30.0,
          "max sup-norm defect " + sci(worst) + " over 10 instances (tol 1e-7), " + sci(t) + " s (limit 30 s)"};
}

Result criterion2() {
  double kahler = 0.0;
  int k = 0;
  for (const char* family : {"identity", "constant", "conformal"}) {
    const GridSpec g(1, 64);
    CounterRng rng(200 + k, 102);
    BaseMetric m = BaseMetric::identity(g);
    if (std::string(family) == "constant") m = BaseMetric::constant(g, random_hpd(rng, 1, 0.7, 1.5));
    if (std::string(family) == "conformal") m = BaseMetric::conformal(bounded(g, rng, 1, 0.3), CMatrix::Identity(1, 1));
    const HermitianMetricField h0 = random_metric(g, 2, rng, 1, 0.3);
    kahler = std::max(kahler, bochner_kodaira_residual(commuting_higgs(rng, 1, 2, 0.5), h0, m, 7 + k));
    ++k;
  }
  const GridSpec g2(2, 32);
  CounterRng rng(210, 102);
  const BaseMetric conf = BaseMetric::conformal(bounded(g2, rng, 1, 0.3), CMatrix::Identity(2, 2));
  const HermitianMetricField h2 = random_metric(g2, 2, rng, 1, 0.3);
  const double nonkahler = bochner_kodaira_residual(commuting_higgs(rng, 2, 2, 0.5), h2, conf, 11);
  const bool is_nonkahler = !conf.flags().is_kahler;
  return {kahler <= 1e-7 && nonkahler <= 1e-6 && is_nonkahler,
          "Kaehler N=64 max residual " + sci(kahler) + " (tol 1e-7); conformal n=2 N=32 " +
              (is_nonkahler ? "non-Kaehler" : "KAEHLER?") + " residual " + sci(nonkahler) + " (tol 1e-6)"};
}

Result criterion3() {
  double worst = 0.0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const int n = seed % 2 ? 1 : 2;
    const GridSpec g(n, n == 1 ? 64 : 16);
    CounterRng rng(seed, 103);
    const BaseMetric m = BaseMetric::constant(g, random_hpd(rng, n, 0.7, 1.5));
    const HermitianMetricField h = random_metric(g, 1, rng, 1, 0.5);
    std::vector<CMatrix> c;
    for (int i = 0; i < n; ++i) c.push_back(random_matrix(rng, 1, 1.0));
    const MatrixField with = hym_higgs_tensor(h, HiggsBundle(HiggsField(c)), m);
    const MatrixField without = hym_higgs_tensor(h, HiggsBundle(HiggsField(n, 1)), m);
    worst = std::max(worst, sup_frobenius(with - without) / std::max(1.0, sup_frobenius(without)));
  }
  return {worst <= 1e-13, "max relative difference " + sci(worst) + " over 5 seeds (tol 1e-13)"};
}

Result criterion4() {
  double worst = 0.0;
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    const GridSpec g(1, 64);
    CounterRng rng(seed, 104);
    const BaseMetric m = BaseMetric::constant(g, random_hpd(rng, 1, 0.7, 1.5));
    const HermitianMetricField h = random_metric(g, 2, rng, 1, 0.3);
    const HiggsBundle b(commuting_higgs(rng, 1, 2, 0.5));
    const ScalarField f = bounded(g, rng, 3, 0.5);
    const HermitianMetricField hf(scale(exp(f * Complex(-1.0)), h.matrix()));
    const MatrixField d = hym_higgs_tensor(hf, b, m) - hym_higgs_tensor(h, b, m) -
                          scale(laplacian(f, m), MatrixField::identity(g, 2));
    worst = std::max(worst, sup_norm(d, h));
  }
  return {worst <= 1e-8, "max sup-norm " + sci(worst) + " at N=64 over 3 seeds (tol 1e-8)"};
}

std::vector<std::uint64_t> solver_seeds() { return {11, 12, 13}; }

ScenarioConfig solver_config(std::uint64_t seed) {
  ScenarioConfig c = scenario("solve.json");
  c.seed = seed;
  c.target_amplitude = 0.5;
  c.initial_guesses = {"identity", "random"};
  return c;
}

Result criterion5() {
  Result out;
  std::ostringstream d;
  double worst_res = 0.0, worst_rec = 0.0, worst_agree = 0.0, worst_time = 0.0;
  int worst_it = 0;
  for (std::uint64_t seed : solver_seeds()) {
    const RunOutcome o = run_scenario(solver_config(seed), "");
    const json s = json::parse(o.summary);
    if (o.status != 0) {
      out.pass = false;
      d << "seed " << seed << " status " << o.status << "; ";
      continue;
    }
    for (const json& run : s["results"]["newton"]) {
      worst_it = std::max(worst_it, run["iterations"].get<int>());
      worst_res = std::max(worst_res, run["residual_history"].back().get<double>());
      worst_rec = std::max(worst_rec, run["recovery_error"].get<double>());
      out.pass = out.pass && run["converged"].get<bool>();
    }
    worst_agree = std::max(worst_agree, s["results"]["guess_agreement"].get<double>());
    worst_time = std::max(worst_time, s["timing"]["total"].get<double>());
  }
  out.pass = out.pass && worst_it <= 15 && worst_res <= 1e-10 && worst_rec <= 1e-6 && worst_agree <= 1e-5 &&
             worst_time < 60.0;
  d << "3 seeds, |S_true| = 0.5, N=32: max iterations " << worst_it << " (<= 15), residual " << sci(worst_res)
    << " (<= 1e-10), recovery " << sci(worst_rec) << " (<= 1e-6), guess agreement " << sci(worst_agree)
    << " (<= 1e-5), slowest run " << sci(worst_time) << " s (< 60 s)";
  out.detail = d.str();
  return out;
}

Result criterion6() {
  Result out;
  std::ostringstream d;
  double worst = 0.0;
  for (std::uint64_t seed : solver_seeds()) {
    ScenarioConfig c = solver_config(seed);
    c.command = "flow";
    c.initial_guesses = {"identity"};
    const RunOutcome o = run_scenario(c, "");
    const json s = json::parse(o.summary);
    if (!s["results"].contains("flow_newton_difference")) {
      out.pass = false;
      d << "seed " << seed << " status " << o.status << "; ";
      continue;
    }
    out.pass = out.pass && s["results"]["flow"]["converged"].get<bool>() && s["results"]["newton"]["converged"].get<bool>();
    worst = std::max(worst, s["results"]["flow_newton_difference"].get<double>());
  }
  out.pass = out.pass && worst <= 1e-6;
  d << "max |H_flow - H_newton| " << sci(worst) << " over the criterion-5 scenarios (tol 1e-6)";
  out.detail = d.str();
  return out;
}

Result criterion7() {
  Result out;
  std::ostringstream d;
  double worst = 0.0, min_gap = 1e300;
  for (std::uint64_t seed = 21; seed <= 25; ++seed) {
    ScenarioConfig c = scenario("compare.json");
    c.seed = seed;
    const RunOutcome o = run_scenario(c, "");
    const json s = json::parse(o.summary);
    if (o.status != 0) {
      out.pass = false;
      d << "seed " << seed << " status " << o.status << "; ";
      continue;
    }
    min_gap = std::min(min_gap, s["results"]["target_gap"].get<double>());
    worst = std::max(worst, s["results"]["comparison"]["max_eigenvalue"].get<double>());
  }
  out.pass = out.pass && min_gap >= 1e-3 && worst <= 1.0 + 1e-6;
  d << "5 seeds: min PD gap " << sci(min_gap) << " (>= 1e-3), max eigenvalue of h0^-1 h1 " << worst
    << " (<= 1 + 1e-6)";
  out.detail = d.str();
  return out;
}

// kappa is the smallest eigenvalue of S^{h0}; it is smooth only away from
// eigenvalue crossings, so the instances keep the two eigenvalues apart.
Result criterion8() {
  double spread = 0.0, offset = 0.0, gap = 1e300;
  struct Case {
    int n, N, r;
  };
  int k = 0;
  for (const Case cs : {Case{1, 64, 1}, Case{1, 64, 2}, Case{2, 32, 2}}) {
    const GridSpec g(cs.n, cs.N);
    CounterRng rng(300 + k++, 108);
    const BaseMetric m = BaseMetric::constant(g, random_hpd(rng, cs.n, 0.7, 1.5));
    const HermitianMetricField h0 = random_metric(g, cs.r, rng, 1, 0.3);
    const HiggsField th = commuting_higgs(rng, cs.n, cs.r, 1.0);
    // Twist so that the mean of kappa is positive while kappa itself still varies.
    const CMatrix gu = m.gup().at(0);
    const double trace_gu = gu.trace().real();
    const EigenBounds eb = herm_eig_bounds(hermitian_part(hym_higgs_tensor(h0, HiggsBundle(th), m), h0), h0);
    const double mean0 = eb.min.values().real().mean();
    if (cs.r > 1) gap = std::min(gap, (eb.max - eb.min).values().real().minCoeff());
    const HiggsBundle b(th, CMatrix::Identity(cs.n, cs.n) * ((0.5 - mean0) / trace_gu));
    const GauduchonResult res = gauduchon_normalize(h0, b, m);
    const ScalarField vol = m.volume_density();
    const double mean =
        (integrate(res.kappa_after, vol) / integrate(ScalarField::constant(g, 1.0), vol)).real();
    spread = std::max(spread, sup_abs(res.kappa_after - ScalarField::constant(g, mean)));
    offset = std::max(offset, std::abs(mean - res.lambda0));
  }
  return {spread <= 1e-7 && offset <= 1e-9,
          "kappa after normalization constant within " + sci(spread) + " (tol 1e-7), mean minus lambda0 " +
              sci(offset) + " (tol 1e-9); smallest eigenvalue gap of S^{h0} " + sci(gap)};
}

Result criterion9() {
  Result out;
  std::ostringstream d;
  double c1 = 0.0, c2 = 0.0, t2 = 0.0, eta = 1e300, spread = 0.0, trivial = 0.0;
  for (int r : {1, 2})
    for (const char* twist : {"auto", "none"}) {
      ScenarioConfig c = scenario("chern.json");
      c.N = 32;
      c.rank = r;
      c.twist_recipe = twist;
      const RunOutcome o = run_scenario(c, "");
      const json s = json::parse(o.summary);
      if (!s["results"].contains("chern")) {
        out.pass = false;
        d << "r=" << r << " twist " << twist << " status " << o.status << "; ";
        continue;
      }
      const json& ch = s["results"]["chern"];
      c1 = std::max(c1, ch["c1_residual"].get<double>());
      c2 = std::max(c2, ch["c2_residual"].get<double>());
      t2 = std::max(t2, ch["t2_residual"].get<double>());
      eta = std::min(eta, ch["eta_integral"][0].get<double>());
      spread = std::max({spread, ch["spread_identity_residual"].get<double>(), ch["spread_violation"].get<double>()});
      if (s["results"].contains("trivial_bundle_integrals"))
        trivial = std::max(trivial, s["results"]["trivial_bundle_integrals"].get<double>());
    }
  out.pass = out.pass && c1 <= 1e-6 && c2 <= 1e-6 && t2 <= 1e-9 && eta >= -1e-9 && spread <= 1e-12 && trivial <= 1e-7;
  d << "n=2 N=32 r in {1,2}: c1 " << sci(c1) << ", c2 " << sci(c2) << " (<= 1e-6); T2 " << sci(t2)
    << " (<= 1e-9); eta integral min " << sci(eta) << " (>= -1e-9); spread " << sci(spread)
    << " (<= 1e-12); trivial-bundle integrals " << sci(trivial) << " (<= 1e-7)";
  out.detail = d.str();
  return out;
}

Result criterion10() {
  std::vector<std::string> checked;
  bool same = true;
  for (const char* name : {"solve.json", "chern.json", "compare.json"}) {
    const ScenarioConfig c = scenario(name);
    same = same && strip_timing(run_scenario(c, "").summary) == strip_timing(run_scenario(c, "").summary);
    checked.push_back(name);
  }
  // The same through the command-line tool, comparing the written summary files.
  const char* cli = std::getenv("HYMH_CLI");
  std::string via_cli = "command line not checked (HYMH_CLI unset)";
  if (cli) {
    const fs::path dir = fs::temp_directory_path() / "hymh_acceptance_det";
    fs::remove_all(dir);
    std::string text[2];
    for (int k = 0; k < 2; ++k) {
      const fs::path out = dir / std::to_string(k);
      const std::string cmd =
          std::string(cli) + " solve --config " + scenario_dir() + "/solve.json --out " + out.string() + " > /dev/null";
      const int raw = std::system(cmd.c_str());
      if (!WIFEXITED(raw) || WEXITSTATUS(raw) != 0) same = false;
      std::ifstream in(out / "summary.json");
      std::stringstream ss;
      ss << in.rdbuf();
      text[k] = strip_timing(ss.str());
    }
    same = same && !text[0].empty() && text[0] == text[1];
    via_cli = "command line summary.json compared";
  }
  std::string list;
  for (const auto& s : checked) list += (list.empty() ? "" : ", ") + s;
  return {same, std::string(same ? "identical" : "DIFFERENT") + " summaries without timing for " + list + "; " + via_cli};
}

}  // namespace

int main() {
  report(1, "identity gate (curvature difference)", criterion1);
  report(2, "Bochner-Kodaira adjointness", criterion2);
  report(3, "rank-1 invisibility", criterion3);
  report(4, "conformal shift law", criterion4);
  report(5, "solver recovery", criterion5);
  report(6, "cross-solver agreement", criterion6);
  report(7, "comparison principle", criterion7);
  report(8, "Gauduchon normalization", criterion8);
  report(9, "Chern identity suite", criterion9);
  report(10, "determinism", criterion10);
  std::cout << (failures ? std::to_string(failures) + " criteria failed" : std::string("all criteria passed")) << std::endl;
  return failures ? 1 : 0;
}
