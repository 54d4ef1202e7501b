#include "choquard/runner.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>

#include "choquard/error.hpp"
#include "choquard/field_io.hpp"
#include "choquard/ground_state.hpp"
#include "choquard/linearized.hpp"
#include "choquard/potential.hpp"

#ifndef CHQ_VERSION
#define CHQ_VERSION "unknown"
#endif

namespace chq {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// Non-finite values become null in JSON; keep them readable instead.
json number(double x) {
  if (std::isfinite(x)) return x;
  if (std::isnan(x)) return "nan";
  return x > 0 ? "inf" : "-inf";
}

json numbers(const std::vector<double>& v) {
  json a = json::array();
  for (double x : v) a.push_back(number(x));
  return a;
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path);
  require(static_cast<bool>(out), ErrorCode::io, "cannot open " + path.string() + " for writing");
  out << std::setprecision(17);
  return out;
}

SolverOptions solver_options(const ExperimentConfig& c) {
  SolverOptions o;
  o.tol = c.tol;
  o.max_iter = c.max_iter;
  return o;
}

ModelParams model(const ExperimentConfig& c) { return ModelParams{c.omega, c.mu, c.p}; }

json ground_state_json(const GroundStateResult& gs) {
  return json{{"converged", gs.converged},
              {"residual", number(gs.residual)},
              {"iterations", gs.iterations},
              {"message", gs.message},
              {"boundary_ratio", number(gs.boundary_ratio)},
              {"negative_ratio", number(gs.negative_ratio)},
              {"functionals", to_json(gs.report)}};
}

json conditions_json(const ConditionReport& r) {
  json checks = json::array();
  for (const ConditionCheck& c : r.checks)
    checks.push_back(json{{"name", c.name},
                          {"passed", c.passed},
                          {"evaluated", c.evaluated},
                          {"measured", number(c.measured)},
                          {"bound", number(c.bound)},
                          {"witness", numbers(c.witness)},
                          {"note", c.note}});
  return json{{"kind", ConditionReport::kind}, {"all_passed", r.all_passed()}, {"checks", checks}};
}

json gate_json(const ComplexField& phi, const SampledPotential& pot, const ExperimentConfig& c) {
  const DilationSecondDerivative d = d2E_lambda(phi, pot, c.mu, c.p);
  return json{{"raw", number(d.raw)}, {"reduced", number(d.reduced)}, {"P", number(d.P)}, {"negative", d.raw < 0.0}};
}

int verdict_exit(Verdict v) { return v == Verdict::fail ? exit_verdict_fail : exit_success; }

int run_ground_state(const ExperimentConfig& c, const fs::path& dir, json& results, bool psi1) {
  const GridPtr grid = make_grid(c.grid_n, c.box_l);
  const PotentialSpec spec = psi1 ? PotentialSpec::zero() : c.potential_spec();
  const GroundStateResult gs = psi1 ? solve_psi1(c.mu, c.p, grid, solver_options(c))
                                    : solve_ground_state(spec, model(c), grid, solver_options(c));
  const std::string name = psi1 ? "psi1.fld" : "groundstate.fld";
  write_field((dir / name).string(), gs.phi);
  const SampledPotential pot = build_potential(spec, grid);
  results["ground_state"] = ground_state_json(gs);
  results["d2E_lambda"] = gate_json(gs.phi, pot, c);
  if (!psi1) results["potential"] = json{{"description", spec.describe()}, {"conditions", conditions_json(validate_conditions(spec, grid))}};
  results["files"] = json::array({name});
  return gs.converged ? exit_success : exit_verdict_fail;
}

int run_spectrum(const ExperimentConfig& c, const fs::path& dir, json& results) {
  const GridPtr grid = make_grid(c.grid_n, c.box_l);
  OperatorTag tag = OperatorTag::L1;
  if (c.op == "L2") tag = OperatorTag::L2;
  if (c.op == "L1_omega") tag = OperatorTag::L1_omega;
  if (c.op == "L2_omega") tag = OperatorTag::L2_omega;
  const bool at_psi1 = tag == OperatorTag::L1 || tag == OperatorTag::L2;
  const PotentialSpec spec = at_psi1 ? PotentialSpec::zero() : c.potential_spec();
  const ModelParams m = at_psi1 ? ModelParams{1.0, c.mu, c.p} : model(c);
  const GroundStateResult gs =
      at_psi1 ? solve_psi1(c.mu, c.p, grid, solver_options(c)) : solve_ground_state(spec, m, grid, solver_options(c));
  results["ground_state"] = ground_state_json(gs);
  if (!gs.converged) return exit_verdict_fail;

  const LinearizedOperator op(tag, gs.phi, spec, m);
  SpectrumOptions so;
  so.count = c.eigen_count;
  so.seed = c.seed;
  so.radial_sector = c.radial_sector;
  const SpectrumReport r = lowest_eigenpairs(op, so);

  std::ofstream csv = open_out(dir / "spectrum.csv");
  csv << "index,eigenvalue,residual\n";
  json files = json::array({"spectrum.csv"});
  for (std::size_t k = 0; k < r.eigenvalues.size(); ++k) {
    csv << k << ',' << r.eigenvalues[k] << ',' << r.residuals[k] << '\n';
    char name[32];
    std::snprintf(name, sizeof name, "eigenvector_%02zu.fld", k);
    write_field((dir / name).string(), to_complex(r.eigenvectors[k]));
    files.push_back(name);
  }
  results["spectrum"] = json{{"operator", to_string(r.tag)},
                             {"eigenvalues", numbers(r.eigenvalues)},
                             {"residuals", numbers(r.residuals)},
                             {"morse_index", r.morse_index},
                             {"kernel_dim_estimate", r.kernel_dim_estimate},
                             {"kernel_tol", number(r.kernel_tol)},
                             {"morse_tol", number(r.morse_tol)},
                             {"radial_sector", c.radial_sector},
                             {"iterations", r.iterations}};
  results["files"] = files;
  return exit_success;
}

int run_evolve(const ExperimentConfig& c, const fs::path& dir, json& results) {
  const PotentialSpec spec = c.potential_spec();
  ComplexField u0 = c.initial.empty() ? ComplexField(make_grid(c.grid_n, c.box_l)) : read_field(c.initial);
  if (c.initial.empty()) {
    const GroundStateResult gs = solve_ground_state(spec, model(c), u0.grid_ptr(), solver_options(c));
    results["ground_state"] = ground_state_json(gs);
    u0 = dilate(gs.phi, c.lambda);
    results["initial"] = json{{"kind", "dilated ground state"}, {"lambda", c.lambda}};
  } else {
    results["initial"] = json{{"kind", "file"},
                              {"path", c.initial},
                              {"grid_n", u0.grid().n()},
                              {"box_l", u0.grid().half_width()}};
  }
  EvolveOptions o;
  o.dt = c.dt;
  o.T = c.t_final;
  o.sample_stride = c.sample_stride;
  o.snapshot_stride = c.snapshot_stride;
  std::optional<ComplexField> last;
  o.observer = [&last](double, const ComplexField& u) { last = u; };
  const EvolutionTrace trace = evolve(u0, spec, c.mu, c.p, o);

  json files = json::array({"trace.csv", "final.fld"});
  std::ofstream csv = open_out(dir / "trace.csv");
  write_trace_csv(trace, csv);
  write_field((dir / "final.fld").string(), last ? *last : u0);
  for (std::size_t k = 0; k < trace.snapshots.size(); ++k) {
    char name[32];
    std::snprintf(name, sizeof name, "snapshot_%04zu.fld", k);
    write_field((dir / name).string(), trace.snapshots[k]);
    files.push_back(name);
  }
  results["trace"] = to_json(trace);
  results["snapshot_times"] = numbers(trace.snapshot_times);
  if (trace.size() >= 3) {
    try {
      const VirialReport v = virial_check(trace);
      results["virial"] = json{{"max_mismatch", number(v.max_mismatch)},
                               {"max_abs_mismatch", number(v.max_abs_mismatch)},
                               {"max_8P", number(v.max_8P)},
                               {"samples", v.samples}};
    } catch (const Error& e) {
      results["virial"] = json{{"error", e.what()}};
    }
  }
  results["files"] = files;
  return exit_success;
}

GroundStateResult experiment_state(const ExperimentConfig& c, const PotentialSpec& spec, json& results) {
  GroundStateResult gs = solve_ground_state(spec, model(c), make_grid(c.grid_n, c.box_l), solver_options(c));
  results["ground_state"] = ground_state_json(gs);
  return gs;
}

int run_instability(const ExperimentConfig& c, const fs::path& dir, json& results) {
  const PotentialSpec spec = c.potential_spec();
  const GroundStateResult gs = experiment_state(c, spec, results);
  InstabilityOptions o;
  o.lambda = c.lambda;
  o.dt = c.dt;
  o.T_max = c.t_final;
  o.sample_stride = c.sample_stride;
  const InstabilityReport r = instability_experiment(gs, spec, o);

  std::ofstream csv = open_out(dir / "trace.csv");
  write_trace_csv(r.trace, csv);
  std::ofstream cmp = open_out(dir / "comparison.csv");
  cmp << "t,lambda_u,slack\n";
  for (std::size_t i = 0; i < r.comparison_times.size(); ++i)
    cmp << r.comparison_times[i] << ',' << r.comparison_lambda[i] << ',' << r.comparison_slack[i] << '\n';

  results["verdict"] = to_json(r.verdict);
  results["trace"] = to_json(r.trace);
  results["gate"] = number(r.gate);
  results["gate_negative"] = r.gate < 0.0;
  results["mass_defect"] = number(r.mass_defect);
  results["E_phi"] = number(r.E_phi);
  results["E_u0"] = number(r.E_u0);
  results["P_u0"] = number(r.P_u0);
  results["growth_time"] = number(r.growth_time);
  results["window"] = r.window;
  results["files"] = json::array({"trace.csv", "comparison.csv"});
  return verdict_exit(r.verdict.verdict);
}

int run_stability(const ExperimentConfig& c, const fs::path& dir, json& results) {
  const PotentialSpec spec = c.potential_spec();
  const GroundStateResult gs = experiment_state(c, spec, results);
  StabilityOptions o;
  o.epsilon = c.epsilon;
  o.n_perturbations = c.seeds;
  o.seed = c.seed;
  o.dt = c.dt;
  o.T = c.t_final;
  o.sample_stride = c.sample_stride;
  const StabilityReport r = stability_experiment(gs, spec, o);

  std::ofstream csv = open_out(dir / "runs.csv");
  csv << "seed,initial_distance,sup_distance,delta_E,mass_defect,exit,exit_time\n";
  json runs = json::array();
  for (const StabilityRun& run : r.runs) {
    csv << run.seed << ',' << run.initial_distance << ',' << run.sup_distance << ',' << run.delta_E << ','
        << run.mass_defect << ',' << to_string(run.exit) << ',' << run.exit_time << '\n';
    runs.push_back(json{{"seed", run.seed},
                        {"initial_distance", number(run.initial_distance)},
                        {"sup_distance", number(run.sup_distance)},
                        {"delta_E", number(run.delta_E)},
                        {"mass_defect", number(run.mass_defect)},
                        {"exit", to_string(run.exit)},
                        {"exit_time", number(run.exit_time)}});
  }
  std::ofstream reg = open_out(dir / "regression.csv");
  reg << "dist_sq,delta_E\n";
  for (std::size_t i = 0; i < r.regression_dist_sq.size(); ++i)
    reg << r.regression_dist_sq[i] << ',' << r.regression_delta_E[i] << '\n';

  results["verdict"] = to_json(r.verdict);
  results["runs"] = runs;
  results["phi_x_norm"] = number(r.phi_x_norm);
  results["fitted_C"] = number(r.fitted_C);
  results["r_squared"] = number(r.r_squared);
  results["files"] = json::array({"runs.csv", "regression.csv"});
  return verdict_exit(r.verdict.verdict);
}

int run_limits(const ExperimentConfig& c, const fs::path& dir, json& results) {
  const LimitStudy s =
      rescaled_limit_study(c.potential_spec(), c.mu, c.p, c.omegas, make_grid(c.grid_n, c.box_l), solver_options(c));
  std::ofstream csv = open_out(dir / "limits.csv");
  csv << "omega,ok,converged,residual,F_tilde,potential_term,h1_sq,h1_distance,F_gap,d2E,error\n";
  json rows = json::array();
  for (const LimitRow& r : s.rows) {
    std::string err = r.error;
    for (char& ch : err)
      if (ch == ',' || ch == '\n') ch = ';';
    csv << r.omega << ',' << r.ok << ',' << r.converged << ',' << r.residual << ',' << r.F_tilde << ','
        << r.potential_term << ',' << r.h1_sq << ',' << r.h1_distance << ',' << r.F_gap << ',' << r.d2E << ','
        << err << '\n';
    rows.push_back(json{{"omega", number(r.omega)},
                        {"ok", r.ok},
                        {"error", r.error},
                        {"converged", r.converged},
                        {"residual", number(r.residual)},
                        {"F_tilde", number(r.F_tilde)},
                        {"potential_term", number(r.potential_term)},
                        {"h1_sq", number(r.h1_sq)},
                        {"h1_distance", number(r.h1_distance)},
                        {"F_gap", number(r.F_gap)},
                        {"d2E", number(r.d2E)}});
  }
  results["verdict"] = to_json(s.verdict);
  results["rows"] = rows;
  results["F_psi1"] = number(s.F_psi1);
  results["h1_sq_psi1"] = number(s.h1_sq_psi1);
  results["files"] = json::array({"limits.csv"});
  // Flagged rows are part of the result; only the trend criteria decide the exit code.
  for (const Criterion& cr : s.verdict.criteria)
    if (!cr.passed && cr.name != "failed rows") return exit_verdict_fail;
  return exit_success;
}

}  // namespace

const char* version_string() { return CHQ_VERSION; }

json to_json(const FunctionalReport& r) {
  return json{{"E", number(r.E)},
              {"Q", number(r.Q)},
              {"S_omega", number(r.S_omega)},
              {"I_omega", number(r.I_omega)},
              {"P", number(r.P)},
              {"F_mu", number(r.F_mu)},
              {"grad_sq", number(r.grad_sq)},
              {"pot_term", number(r.pot_term)},
              {"x_norm_sq", number(r.x_norm_sq)},
              {"omega", number(r.omega)},
              {"mu", number(r.mu)},
              {"p", number(r.p)},
              {"residuals",
               json{{"action", number(r.residual_action())},
                    {"energy", number(r.residual_energy())},
                    {"nehari", number(r.residual_nehari())},
                    {"split", number(r.residual_split())}}}};
}

json to_json(const ExperimentVerdict& v) {
  json criteria = json::array();
  for (const Criterion& c : v.criteria)
    criteria.push_back(json{{"name", c.name},
                            {"relation", c.relation},
                            {"measured", number(c.measured)},
                            {"threshold", number(c.threshold)},
                            {"passed", c.passed}});
  return json{{"kind", to_string(v.kind)},
              {"mu", number(v.mu)},
              {"p", number(v.p)},
              {"omega", number(v.omega)},
              {"lambda", number(v.lambda)},
              {"epsilon", number(v.epsilon)},
              {"criteria", criteria},
              {"verdict", to_string(v.verdict)},
              {"warnings", v.warnings},
              {"notes", v.notes}};
}

json to_json(const EvolutionTrace& t) {
  return json{{"exit", to_string(t.exit)},
              {"exit_time", number(t.exit_time)},
              {"dt", number(t.dt)},
              {"steps", t.steps},
              {"samples", t.size()},
              {"mass_drift", t.size() ? number(t.max_relative_drift(t.Q)) : json(nullptr)},
              {"energy_drift", t.size() ? number(t.max_relative_drift(t.E)) : json(nullptr)},
              {"probe_run", t.probe_run},
              {"probe_confirmed", t.probe_confirmed},
              {"probe_grad_sq", number(t.probe_grad_sq)},
              {"message", t.message}};
}

void write_report(const json& results, const ExperimentConfig& config, const std::string& path) {
  json cfg = json::object();
  std::istringstream lines(canonical_config(config));
  std::string line;
  while (std::getline(lines, line)) {
    const auto eq = line.find(" = ");
    cfg[line.substr(0, eq)] = line.substr(eq + 3);
  }
  const json report{{"schema", report_schema},
                    {"version", version_string()},
                    {"command", to_string(config.command)},
                    {"config", cfg},
                    {"config_hash", config_hash(config)},
                    {"timestamp", utc_timestamp()},
                    {"results", results}};
  std::ofstream out(path);
  require(static_cast<bool>(out), ErrorCode::io, "cannot open report " + path + " for writing");
  out << report.dump(2) << '\n';
  require(static_cast<bool>(out), ErrorCode::io, "write failed: " + path);
}

int run_command(const ExperimentConfig& c, std::ostream& diag) {
  try {
    const fs::path dir(c.out);
    std::error_code ec;
    fs::create_directories(dir, ec);
    require(!ec && fs::is_directory(dir), ErrorCode::io, "cannot create output directory " + c.out);

    json results = json::object();
    int code = exit_success;
    switch (c.command) {
      case Command::groundstate: code = run_ground_state(c, dir, results, false); break;
      case Command::psi1: code = run_ground_state(c, dir, results, true); break;
      case Command::spectrum: code = run_spectrum(c, dir, results); break;
      case Command::evolve: code = run_evolve(c, dir, results); break;
      case Command::instability: code = run_instability(c, dir, results); break;
      case Command::stability: code = run_stability(c, dir, results); break;
      case Command::limits: code = run_limits(c, dir, results); break;
    }
    results["exit_code"] = code;
    write_report(results, c, (dir / "report.json").string());
    if (code == exit_verdict_fail) diag << "chq: " << to_string(c.command) << ": verdict fail, see " << (dir / "report.json").string() << '\n';
    return code;
  } catch (const Error& e) {
    diag << "chq: error: " << e.what() << '\n';
  } catch (const std::exception& e) {
    diag << "chq: error: " << e.what() << '\n';
  }
  return exit_runtime_error;
}

}  // namespace chq
