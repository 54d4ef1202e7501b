#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "choquard/config.hpp"
#include "choquard/error.hpp"
#include "choquard/field_io.hpp"
#include "choquard/runner.hpp"
#include "doctest.h"
#include "json.hpp"
#include "oracles.hpp"

using namespace chq;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("chq_test_" + std::to_string(::getpid())) / name;
  fs::remove_all(p);
  fs::create_directories(p.parent_path());
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string error_of(const std::string& text, ErrorCode* code = nullptr) {
  try {
    parse_config_text(text, "cfg");
  } catch (const Error& e) {
    if (code) *code = e.code();
    return e.what();
  }
  return {};
}

std::string without_timestamp(const std::string& s) {
  std::istringstream in(s);
  std::string line, out;
  while (std::getline(in, line))
    if (line.find("\"timestamp\"") == std::string::npos) out += line + "\n";
  return out;
}

nlohmann::json load_json(const fs::path& p) { return nlohmann::json::parse(slurp(p)); }

}  // namespace

TEST_CASE("minimal config gets the documented defaults") {
  const ExperimentConfig c = parse_config_text("command = psi1\nmu = 1\np = 2.5\n");
  CHECK(c.command == Command::psi1);
  CHECK(c.grid_n == 64);
  CHECK(c.box_l == 8.0);
  CHECK(c.tol == 1e-8);
  CHECK(c.mu == 1.0);
  CHECK(c.p == 2.5);
  CHECK(c.omega == 1.0);
  CHECK(c.out == "out");
}

TEST_CASE("config range violations name the constraint") {
  ErrorCode code{};
  CHECK(error_of("mu = 3.5\n", &code).find("0<mu<3") != std::string::npos);
  CHECK(code == ErrorCode::domain);
  CHECK(error_of("mu = 0\n").find("0<mu<3") != std::string::npos);
  CHECK(error_of("mu = 1.5\np = 1.4\n").find("p>2-mu/3") != std::string::npos);
  CHECK(error_of("omega = -1\n").find("omega>0") != std::string::npos);
  CHECK(error_of("dt = 0\n").find("dt>0") != std::string::npos);
  CHECK(error_of("grid_n = 48\n").find("power of two") != std::string::npos);
  CHECK(error_of("omegas = 10, 5\n").find("increasing") != std::string::npos);
  CHECK(error_of("potential = polynomial\n").find("potential_coeffs") != std::string::npos);
  CHECK(error_of("v2_table = t.txt\n").find("v2_dr>0") != std::string::npos);
}

TEST_CASE("config schema violations name the key and location") {
  ErrorCode code{};
  const std::string dup = error_of("mu = 1\n# comment\np = 2.5\nmu = 2\n", &code);
  CHECK(dup.find("'mu'") != std::string::npos);
  CHECK(dup.find("cfg:1") != std::string::npos);
  CHECK(dup.find("cfg:4") != std::string::npos);
  CHECK(code == ErrorCode::invalid_argument);

  const std::string unknown = error_of("mu = 1\nmass = 2\n");
  CHECK(unknown.find("unknown key 'mass'") != std::string::npos);
  CHECK(unknown.find("cfg:2") != std::string::npos);

  CHECK(error_of("mu = one\n").find("expected a number") != std::string::npos);
  CHECK(error_of("grid_n = 32.5\n").find("expected an integer") != std::string::npos);
  CHECK(error_of("radial_sector = maybe\n").find("true or false") != std::string::npos);
  CHECK(error_of("command = run\n").find("unknown command") != std::string::npos);
  CHECK(error_of("just words\n", &code).find("cfg:1") != std::string::npos);
  CHECK(code == ErrorCode::format);
}

TEST_CASE("later sources override earlier ones") {
  ConfigBuilder b;
  b.load_text("mu = 1\np = 2.5\nomega = 3\n", "file");
  b.set("mu", "2", "--mu");
  const ExperimentConfig c = b.build();
  CHECK(c.mu == 2.0);
  CHECK(c.omega == 3.0);
  b.set("mu", "4", "--mu");
  try {
    b.build();
    FAIL("expected a range error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("--mu") != std::string::npos);
  }
  CHECK_THROWS_AS(b.set("nope", "1", "--set nope"), Error);
}

TEST_CASE("canonical form round trips and hashes stably") {
  const ExperimentConfig c = parse_config_text(
      "command = limits\nmu = 0.7\np = 2.3\nomega = 0.1\nomegas = 10, 31.6, 1000\npotential = polynomial\n"
      "potential_coeffs = 0, 0, 1, 0.25\nseed = 42\nradial_sector = true\nout = somewhere\n");
  const std::string text = canonical_config(c);
  const ExperimentConfig back = parse_config_text(text);
  CHECK(canonical_config(back) == text);
  CHECK(back.omegas == std::vector<double>{10.0, 31.6, 1000.0});
  CHECK(back.potential_coeffs == std::vector<double>{0.0, 0.0, 1.0, 0.25});
  CHECK(config_hash(back) == config_hash(c));
  CHECK(config_hash(c).size() == 16);

  ExperimentConfig moved = c;
  moved.out = "elsewhere";
  CHECK(config_hash(moved) == config_hash(c));
  ExperimentConfig changed = c;
  changed.mu = 0.7000000000000001;
  CHECK(config_hash(changed) != config_hash(c));

  std::size_t lines = 0;
  for (char ch : text) lines += ch == '\n';
  CHECK(lines == ConfigBuilder::keys().size());
}

TEST_CASE("field files round trip bit for bit") {
  const fs::path dir = scratch("fields");
  fs::create_directories(dir);
  const ComplexField f = test::random_bumps(make_grid(16, 3.5), 9);
  write_field((dir / "a.fld").string(), f);
  CHECK(fs::file_size(dir / "a.fld") == 24 + 16 * 16 * 16 * 16);
  const ComplexField g = read_field((dir / "a.fld").string());
  CHECK(g.grid().n() == 16);
  CHECK(g.grid().half_width() == 3.5);
  CHECK(std::memcmp(f.data(), g.data(), f.size() * sizeof(cplx)) == 0);

  // Header layout: magic, u64 n, f64 L, then (re, im) of the first sample.
  const std::string bytes = slurp(dir / "a.fld");
  CHECK(bytes.substr(0, 8) == "CHQFLD01");
  CHECK(static_cast<unsigned char>(bytes[8]) == 16);
  double first_re = 0.0;
  std::memcpy(&first_re, bytes.data() + 24, 8);
  CHECK(first_re == f[0].real());
}

TEST_CASE("malformed field files are rejected") {
  const fs::path dir = scratch("bad_fields");
  fs::create_directories(dir);
  const ComplexField f = test::random_bumps(make_grid(8, 2.0), 1);
  write_field((dir / "ok.fld").string(), f);
  const std::string good = slurp(dir / "ok.fld");

  auto write_bytes = [&](const std::string& name, const std::string& b) {
    std::ofstream(dir / name, std::ios::binary) << b;
    return (dir / name).string();
  };
  auto code_of = [](const std::string& path, std::string* msg = nullptr) {
    try {
      read_field(path);
    } catch (const Error& e) {
      if (msg) *msg = e.what();
      return e.code();
    }
    return ErrorCode::runtime;
  };

  std::string msg;
  CHECK(code_of(write_bytes("magic.fld", "XXXX" + good.substr(4)), &msg) == ErrorCode::format);
  CHECK(msg.find("magic") != std::string::npos);

  CHECK(code_of(write_bytes("short.fld", good.substr(0, good.size() - 5)), &msg) == ErrorCode::io);
  CHECK(msg.find("expected " + std::to_string(good.size())) != std::string::npos);
  CHECK(msg.find("got " + std::to_string(good.size() - 5)) != std::string::npos);

  std::string odd = good;
  odd[8] = 12;
  CHECK(code_of(write_bytes("odd.fld", odd), &msg) == ErrorCode::format);
  CHECK(msg.find("power of two") != std::string::npos);

  CHECK(code_of((dir / "missing.fld").string()) == ErrorCode::io);
  CHECK_THROWS_AS(write_field((dir / "no/such/dir/x.fld").string(), f), Error);
}

TEST_CASE("psi1 command writes the field and a reproducible report") {
  const fs::path dir = scratch("psi1");
  ExperimentConfig c = parse_config_text("command = psi1\nmu = 1\np = 2.5\ngrid_n = 32\nbox_l = 8\n");
  c.out = dir.string();
  std::ostringstream diag;
  REQUIRE(run_command(c, diag) == exit_success);
  CHECK(diag.str().empty());
  CHECK(fs::exists(dir / "psi1.fld"));

  const nlohmann::json r = load_json(dir / "report.json");
  CHECK(r["schema"] == report_schema);
  CHECK(r["version"] == version_string());
  CHECK(r["config_hash"] == config_hash(c));
  CHECK(r["command"] == "psi1");
  CHECK(r["results"]["ground_state"]["residual"].get<double>() < 1e-8);
  const auto& fr = r["results"]["ground_state"]["functionals"];
  for (const char* key : {"E", "Q", "S_omega", "I_omega", "P", "F_mu", "grad_sq", "pot_term", "x_norm_sq"})
    CHECK(fr.contains(key));
  for (const char* key : {"action", "energy", "nehari", "split"}) {
    REQUIRE(fr["residuals"].contains(key));
    CHECK(fr["residuals"][key].get<double>() < 1e-12);
  }

  // Re-run from the report's embedded config.
  const fs::path again = scratch("psi1_again");
  ConfigBuilder b;
  b.load_file((dir / "report.json").string());
  b.set("out", again.string(), "test");
  REQUIRE(run_command(b.build(), diag) == exit_success);
  std::string first = without_timestamp(slurp(dir / "report.json"));
  std::string second = without_timestamp(slurp(again / "report.json"));
  const auto strip_out = [](std::string s, const std::string& out) {
    for (auto pos = s.find(out); pos != std::string::npos; pos = s.find(out)) s.erase(pos, out.size());
    return s;
  };
  CHECK(strip_out(first, dir.string()) == strip_out(second, again.string()));
  CHECK(slurp(dir / "psi1.fld") == slurp(again / "psi1.fld"));
}

TEST_CASE("same run twice gives identical reports apart from the timestamp") {
  const fs::path dir = scratch("twice");
  ExperimentConfig c = parse_config_text(
      "command = evolve\nmu = 1\np = 2.5\ngrid_n = 32\nbox_l = 6\ndt = 0.01\nt_final = 0.05\n"
      "lambda = 1.1\nsnapshot_stride = 2\ntol = 1e-6\nmax_iter = 500\n");
  c.out = dir.string();
  std::ostringstream diag;
  REQUIRE(run_command(c, diag) == exit_success);
  const std::string first = slurp(dir / "report.json");
  const std::string trace = slurp(dir / "trace.csv");
  REQUIRE(run_command(c, diag) == exit_success);
  CHECK(without_timestamp(first) == without_timestamp(slurp(dir / "report.json")));
  CHECK(trace == slurp(dir / "trace.csv"));

  CHECK(trace.substr(0, trace.find('\n')) == "t,Q,E,moment_xx,grad_sq,P");
  const nlohmann::json r = nlohmann::json::parse(first);
  CHECK(r["results"]["trace"]["samples"] == 6);
  CHECK(r["results"]["snapshot_times"].size() == 3);
  CHECK(fs::exists(dir / "snapshot_0002.fld"));
  CHECK(fs::exists(dir / "final.fld"));
  CHECK(r["results"]["trace"]["mass_drift"].get<double>() < 1e-12);

  // evolve from a field file continues the trajectory.
  ExperimentConfig from_file = c;
  from_file.initial = (dir / "final.fld").string();
  from_file.out = (dir / "continued").string();
  REQUIRE(run_command(from_file, diag) == exit_success);
  const nlohmann::json r2 = load_json(dir / "continued" / "report.json");
  CHECK(r2["results"]["initial"]["kind"] == "file");
  CHECK(!r2["results"].contains("ground_state"));
}

TEST_CASE("instability with a positive gate exits with verdict failure") {
  const fs::path dir = scratch("gate");
  ExperimentConfig c = parse_config_text(
      "command = instability\nmu = 1\np = 2.1\nomega = 10\ngrid_n = 32\nbox_l = 4\ndt = 1e-3\n"
      "t_final = 0.02\nlambda = 1.2\nsample_stride = 5\n");
  c.out = dir.string();
  std::ostringstream diag;
  CHECK(run_command(c, diag) == exit_verdict_fail);
  CHECK(diag.str().find("verdict fail") != std::string::npos);
  const nlohmann::json r = load_json(dir / "report.json");
  CHECK(r["results"]["gate"].get<double>() > 0.0);
  CHECK(r["results"]["gate_negative"] == false);
  CHECK(r["results"]["verdict"]["verdict"] == "fail");
  CHECK(r["results"]["exit_code"] == 1);
  CHECK(fs::exists(dir / "trace.csv"));
}

TEST_CASE("limits with a diverging row still succeeds") {
  const fs::path dir = scratch("limits");
  ExperimentConfig c = parse_config_text(
      "command = limits\nmu = 1\np = 2.5\ngrid_n = 16\nbox_l = 8\nomegas = 0.001, 10\n");
  c.out = dir.string();
  std::ostringstream diag;
  CHECK(run_command(c, diag) == exit_success);
  const nlohmann::json r = load_json(dir / "report.json");
  REQUIRE(r["results"]["rows"].size() == 2);
  CHECK(r["results"]["rows"][0]["ok"] == false);
  CHECK_FALSE(r["results"]["rows"][0]["error"].get<std::string>().empty());
  CHECK(r["results"]["rows"][1]["ok"] == true);
  const std::string csv = slurp(dir / "limits.csv");
  CHECK(csv.substr(0, csv.find('\n')) ==
        "omega,ok,converged,residual,F_tilde,potential_term,h1_sq,h1_distance,F_gap,d2E,error");
}

TEST_CASE("runtime errors map to exit code 2") {
  ExperimentConfig c = parse_config_text("command = evolve\ngrid_n = 16\nbox_l = 5\n");
  c.initial = "/nonexistent/field.fld";
  c.out = scratch("missing_initial").string();
  std::ostringstream diag;
  CHECK(run_command(c, diag) == exit_runtime_error);
  CHECK(diag.str().find("/nonexistent/field.fld") != std::string::npos);

  c.out = "/proc/chq_not_writable";
  std::ostringstream diag2;
  CHECK(run_command(c, diag2) == exit_runtime_error);
  CHECK(diag2.str().find("/proc/chq_not_writable") != std::string::npos);

  try {
    write_report(nlohmann::json::object(), c, "/proc/chq_not_writable/report.json");
    FAIL("expected an I/O error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::io);
    CHECK(std::string(e.what()).find("/proc/chq_not_writable/report.json") != std::string::npos);
  }
}
