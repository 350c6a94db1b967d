#pragma once

#include "hymh/solver.hpp"

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace hymh {

/// Malformed or inconsistent configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ScenarioConfig {
  std::string command = "solve";  // solve | flow | verify-identities | compare | chern
  std::uint64_t seed = 1;

  // grid
  int n = 1;
  int N = 32;
  std::vector<double> periods;  // empty: 2 pi on every axis

  // base metric
  std::string metric_family = "identity";  // identity | constant | conformal
  std::optional<CMatrix> g0;               // constant part; random HPD when absent (family constant)
  double metric_amplitude = 0.3;           // conformal exponent amplitude
  int metric_kmax = 1;

  int rank = 2;

  // Higgs field
  std::string higgs_recipe = "zero";  // zero | random-commuting | random | explicit
  double higgs_amplitude = 0.5;
  std::vector<CMatrix> higgs_components;

  // twist of the auxiliary line factor
  std::string twist_recipe = "auto";  // none | auto | explicit
  double twist_margin = 0.5;          // auto: minimum eigenvalue of Omega (and of P where relevant)
  std::optional<CMatrix> twist;

  // reference metric h0
  std::string h0_family = "random";  // identity | random
  double h0_amplitude = 0.3;
  int h0_kmax = 1;

  // target P
  std::string target_recipe = "manufactured";  // manufactured | omega-shift | conformal | file
  double target_amplitude = 0.4;               // manufactured: sup of S_true; conformal: amplitude of f
  int target_kmax = 1;
  double target_epsilon = 0.0;  // omega-shift: P = S^{h0} - eps (1 + cos x_0 / 2) Id
  std::string target_path;

  SolverOptions solver;
  double flow_tol = 1e-10;
  std::vector<std::string> initial_guesses = {"identity"};  // identity | random

  // verdict tolerances
  double recovery_tol = 1e-6;
  double agreement_tol = 1e-5;
  double identity_tol = 1e-7;
  double comparison_tol = 1e-6;

  bool write_fields = false;
  bool write_csv = true;
};

/// Parses the JSON configuration text; ConfigError on malformed input.
ScenarioConfig parse_config(const std::string& text);
ScenarioConfig load_config(const std::string& path);

/// Everything a pipeline needs, built deterministically from a config.
struct Instance {
  BaseMetric g;
  HiggsBundle bundle;
  HermitianMetricField h0;
  MatrixField P;
  std::optional<MatrixField> H_true;  // known solution (manufactured / conformal recipes)
};
Instance build_instance(const ScenarioConfig& cfg);
ProblemSpec make_problem(const ScenarioConfig& cfg, const Instance& inst);

struct RunOutcome {
  int status = 0;        // 0 pass, 1 a verdict failed, 2 config, 3 hypothesis, 4 numerical
  std::string summary;   // JSON document
};
/// Runs the configured pipeline; writes summary.json (and CSV / field dumps)
/// into `out_dir` when it is non-empty.
RunOutcome run_scenario(const ScenarioConfig& cfg, const std::string& out_dir);

/// Removes the "timing" block from a summary so runs can be compared.
std::string strip_timing(const std::string& summary);

}  // namespace hymh
