#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "choquard/potential.hpp"

namespace chq {

enum class Command { groundstate, psi1, spectrum, evolve, instability, stability, limits };
const char* to_string(Command c);
Command parse_command(const std::string& s);

// Parsed run description. Defaults are the values below.
struct ExperimentConfig {
  Command command = Command::groundstate;

  int grid_n = 64;
  double box_l = 8.0;

  double mu = 1.0;
  double p = 2.5;
  double omega = 1.0;

  // potential = zero | harmonic | polynomial | exponential
  std::string potential = "harmonic";
  double potential_a = 1.0;               // harmonic a|x|^2, exponential a e^(b r)
  double potential_b = 1.0;
  std::vector<double> potential_coeffs;   // polynomial sum_j c_j r^j
  std::string v2_table;                   // file of radial samples, one per line
  double v2_dr = 0.0;
  double v2_q = 2.0;

  double tol = 1e-8;
  int max_iter = 20000;

  double dt = 1e-3;
  double t_final = 1.0;
  int sample_stride = 1;
  int snapshot_stride = 0;

  double lambda = 1.2;
  double epsilon = 1e-2;
  unsigned seed = 1;
  int seeds = 10;
  std::vector<double> omegas = {10.0, 100.0, 1000.0};

  // spectrum
  std::string op = "L1";  // L1 | L2 | L1_omega | L2_omega
  int eigen_count = 4;
  bool radial_sector = false;

  // evolve: initial field file; empty means the ground state dilated by lambda.
  std::string initial;

  std::string out = "out";

  PotentialSpec potential_spec() const;
};

// Key/value source with locations for diagnostics ("file:line" or "--flag").
class ConfigBuilder {
 public:
  // Reads `key = value` lines; '#' starts a comment. A JSON report is also
  // accepted, in which case its "config" object is used. A key given twice in
  // one source is an error naming both locations.
  void load_file(const std::string& path);
  void load_text(const std::string& text, const std::string& origin);
  // Overrides any earlier value. Unknown keys throw.
  void set(const std::string& key, const std::string& value, const std::string& location);

  ExperimentConfig build() const;

  static const std::vector<std::string>& keys();

 private:
  struct Entry {
    std::string value;
    std::string location;
  };
  std::map<std::string, Entry> entries_;
};

ExperimentConfig parse_config_text(const std::string& text, const std::string& origin = "<text>");

// Canonical key = value form, every key, fixed order and round-trip precision.
std::string canonical_config(const ExperimentConfig& c);
// FNV-1a of the canonical form with `out` cleared, 16 hex digits.
std::string config_hash(const ExperimentConfig& c);

}  // namespace chq
