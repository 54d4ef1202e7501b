#include "choquard/config.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>

#include "choquard/error.hpp"
#include "json.hpp"

namespace chq {

namespace {

constexpr std::array<const char*, 7> command_names = {"groundstate", "psi1",      "spectrum", "evolve",
                                                      "instability", "stability", "limits"};

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string where(const std::string& key, const std::string& location) {
  return "'" + key + "' (" + location + ")";
}

double to_double(const std::string& v, const std::string& key, const std::string& loc) {
  double x = 0.0;
  const char* end = v.data() + v.size();
  auto [ptr, ec] = std::from_chars(v.data(), end, x);
  if (ec != std::errc() || ptr != end || !std::isfinite(x))
    fail(ErrorCode::invalid_argument, "key " + where(key, loc) + ": expected a number, got '" + v + "'");
  return x;
}

long to_long(const std::string& v, const std::string& key, const std::string& loc) {
  long x = 0;
  const char* end = v.data() + v.size();
  auto [ptr, ec] = std::from_chars(v.data(), end, x);
  if (ec != std::errc() || ptr != end)
    fail(ErrorCode::invalid_argument, "key " + where(key, loc) + ": expected an integer, got '" + v + "'");
  return x;
}

bool to_bool(const std::string& v, const std::string& key, const std::string& loc) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  fail(ErrorCode::invalid_argument, "key " + where(key, loc) + ": expected true or false, got '" + v + "'");
}

std::vector<double> to_list(const std::string& v, const std::string& key, const std::string& loc) {
  std::vector<double> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(to_double(trim(item), key, loc));
  return out;
}

void check_range(bool ok, const std::string& key, const std::string& loc, const std::string& value,
                 const std::string& constraint) {
  if (!ok)
    fail(ErrorCode::domain, "key " + where(key, loc) + " = " + value + " violates " + constraint);
}

std::string format_double(double x) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, ptr);
}

std::string format_list(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + format_double(v[i]);
  return s;
}

struct Key {
  const char* name;
  std::function<void(ExperimentConfig&, const std::string&, const std::string&)> parse;
  std::function<std::string(const ExperimentConfig&)> print;
};

// Range checks that involve one key run here; the p-mu coupling runs in build().
const std::vector<Key>& table() {
  using C = ExperimentConfig;
  using S = const std::string&;
  static const std::vector<Key> t = {
      {"command",
       [](C& c, S v, S l) {
         try {
           c.command = parse_command(v);
         } catch (const Error& e) {
           fail(e.code(), "key " + where("command", l) + ": " + e.what());
         }
       },
       [](const C& c) { return std::string(to_string(c.command)); }},
      {"grid_n",
       [](C& c, S v, S l) {
         const long n = to_long(v, "grid_n", l);
         check_range(n >= 8 && n <= 1024 && (n & (n - 1)) == 0, "grid_n", l, v, "power of two in [8, 1024]");
         c.grid_n = static_cast<int>(n);
       },
       [](const C& c) { return std::to_string(c.grid_n); }},
      {"box_l",
       [](C& c, S v, S l) {
         c.box_l = to_double(v, "box_l", l);
         check_range(c.box_l > 0.0, "box_l", l, v, "box_l>0");
       },
       [](const C& c) { return format_double(c.box_l); }},
      {"mu",
       [](C& c, S v, S l) {
         c.mu = to_double(v, "mu", l);
         check_range(c.mu > 0.0 && c.mu < 3.0, "mu", l, v, "0<mu<3");
       },
       [](const C& c) { return format_double(c.mu); }},
      {"p", [](C& c, S v, S l) { c.p = to_double(v, "p", l); }, [](const C& c) { return format_double(c.p); }},
      {"omega",
       [](C& c, S v, S l) {
         c.omega = to_double(v, "omega", l);
         check_range(c.omega > 0.0, "omega", l, v, "omega>0");
       },
       [](const C& c) { return format_double(c.omega); }},
      {"potential",
       [](C& c, S v, S l) {
         check_range(v == "zero" || v == "harmonic" || v == "polynomial" || v == "exponential", "potential", l, v,
                     "one of zero, harmonic, polynomial, exponential");
         c.potential = v;
       },
       [](const C& c) { return c.potential; }},
      {"potential_a", [](C& c, S v, S l) { c.potential_a = to_double(v, "potential_a", l); },
       [](const C& c) { return format_double(c.potential_a); }},
      {"potential_b", [](C& c, S v, S l) { c.potential_b = to_double(v, "potential_b", l); },
       [](const C& c) { return format_double(c.potential_b); }},
      {"potential_coeffs", [](C& c, S v, S l) { c.potential_coeffs = to_list(v, "potential_coeffs", l); },
       [](const C& c) { return format_list(c.potential_coeffs); }},
      {"v2_table", [](C& c, S v, S) { c.v2_table = v; }, [](const C& c) { return c.v2_table; }},
      {"v2_dr",
       [](C& c, S v, S l) {
         c.v2_dr = to_double(v, "v2_dr", l);
         check_range(c.v2_dr >= 0.0, "v2_dr", l, v, "v2_dr>=0");
       },
       [](const C& c) { return format_double(c.v2_dr); }},
      {"v2_q",
       [](C& c, S v, S l) {
         c.v2_q = to_double(v, "v2_q", l);
         check_range(c.v2_q > 1.5, "v2_q", l, v, "v2_q>3/2");
       },
       [](const C& c) { return format_double(c.v2_q); }},
      {"tol",
       [](C& c, S v, S l) {
         c.tol = to_double(v, "tol", l);
         check_range(c.tol > 0.0, "tol", l, v, "tol>0");
       },
       [](const C& c) { return format_double(c.tol); }},
      {"max_iter",
       [](C& c, S v, S l) {
         const long n = to_long(v, "max_iter", l);
         check_range(n >= 1 && n <= 100000000, "max_iter", l, v, "max_iter>=1");
         c.max_iter = static_cast<int>(n);
       },
       [](const C& c) { return std::to_string(c.max_iter); }},
      {"dt",
       [](C& c, S v, S l) {
         c.dt = to_double(v, "dt", l);
         check_range(c.dt > 0.0, "dt", l, v, "dt>0");
       },
       [](const C& c) { return format_double(c.dt); }},
      {"t_final",
       [](C& c, S v, S l) {
         c.t_final = to_double(v, "t_final", l);
         check_range(c.t_final > 0.0, "t_final", l, v, "t_final>0");
       },
       [](const C& c) { return format_double(c.t_final); }},
      {"sample_stride",
       [](C& c, S v, S l) {
         const long n = to_long(v, "sample_stride", l);
         check_range(n >= 1 && n <= 100000000, "sample_stride", l, v, "sample_stride>=1");
         c.sample_stride = static_cast<int>(n);
       },
       [](const C& c) { return std::to_string(c.sample_stride); }},
      {"snapshot_stride",
       [](C& c, S v, S l) {
         const long n = to_long(v, "snapshot_stride", l);
         check_range(n >= 0 && n <= 100000000, "snapshot_stride", l, v, "snapshot_stride>=0");
         c.snapshot_stride = static_cast<int>(n);
       },
       [](const C& c) { return std::to_string(c.snapshot_stride); }},
      {"lambda",
       [](C& c, S v, S l) {
         c.lambda = to_double(v, "lambda", l);
         check_range(c.lambda > 0.0, "lambda", l, v, "lambda>0");
       },
       [](const C& c) { return format_double(c.lambda); }},
      {"epsilon",
       [](C& c, S v, S l) {
         c.epsilon = to_double(v, "epsilon", l);
         check_range(c.epsilon >= 0.0, "epsilon", l, v, "epsilon>=0");
       },
       [](const C& c) { return format_double(c.epsilon); }},
      {"seed",
       [](C& c, S v, S l) {
         const long n = to_long(v, "seed", l);
         check_range(n >= 0 && n <= 4294967295L, "seed", l, v, "0<=seed<2^32");
         c.seed = static_cast<unsigned>(n);
       },
       [](const C& c) { return std::to_string(c.seed); }},
      {"seeds",
       [](C& c, S v, S l) {
         const long n = to_long(v, "seeds", l);
         check_range(n >= 1 && n <= 100000, "seeds", l, v, "seeds>=1");
         c.seeds = static_cast<int>(n);
       },
       [](const C& c) { return std::to_string(c.seeds); }},
      {"omegas",
       [](C& c, S v, S l) {
         c.omegas = to_list(v, "omegas", l);
         bool ok = !c.omegas.empty();
         for (std::size_t i = 0; i < c.omegas.size(); ++i)
           ok = ok && c.omegas[i] > 0.0 && (i == 0 || c.omegas[i] > c.omegas[i - 1]);
         check_range(ok, "omegas", l, v, "nonempty, positive, increasing");
       },
       [](const C& c) { return format_list(c.omegas); }},
      {"operator",
       [](C& c, S v, S l) {
         check_range(v == "L1" || v == "L2" || v == "L1_omega" || v == "L2_omega", "operator", l, v,
                     "one of L1, L2, L1_omega, L2_omega");
         c.op = v;
       },
       [](const C& c) { return c.op; }},
      {"eigen_count",
       [](C& c, S v, S l) {
         const long n = to_long(v, "eigen_count", l);
         check_range(n >= 1 && n <= 64, "eigen_count", l, v, "1<=eigen_count<=64");
         c.eigen_count = static_cast<int>(n);
       },
       [](const C& c) { return std::to_string(c.eigen_count); }},
      {"radial_sector", [](C& c, S v, S l) { c.radial_sector = to_bool(v, "radial_sector", l); },
       [](const C& c) { return std::string(c.radial_sector ? "true" : "false"); }},
      {"initial", [](C& c, S v, S) { c.initial = v; }, [](const C& c) { return c.initial; }},
      {"out",
       [](C& c, S v, S l) {
         check_range(!v.empty(), "out", l, v, "nonempty path");
         c.out = v;
       },
       [](const C& c) { return c.out; }},
  };
  return t;
}

const Key* find_key(const std::string& name) {
  for (const Key& k : table())
    if (name == k.name) return &k;
  return nullptr;
}

}  // namespace

const char* to_string(Command c) { return command_names[static_cast<int>(c)]; }

Command parse_command(const std::string& s) {
  for (std::size_t i = 0; i < command_names.size(); ++i)
    if (s == command_names[i]) return static_cast<Command>(i);
  fail(ErrorCode::invalid_argument,
       "unknown command '" + s + "' (groundstate, psi1, spectrum, evolve, instability, stability, limits)");
}

PotentialSpec ExperimentConfig::potential_spec() const {
  PotentialSpec s;
  if (potential == "harmonic")
    s = PotentialSpec::harmonic(potential_a);
  else if (potential == "polynomial")
    s = PotentialSpec::radial_polynomial(potential_coeffs);
  else if (potential == "exponential")
    s = PotentialSpec::exponential(potential_a, potential_b);
  if (!v2_table.empty()) {
    std::ifstream in(v2_table);
    require(static_cast<bool>(in), ErrorCode::io, "cannot open V2 table " + v2_table);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      line = trim(line.substr(0, line.find('#')));
      if (line.empty()) continue;
      s.v2_samples.push_back(to_double(line, "v2_table", v2_table + ":" + std::to_string(lineno)));
    }
    s.v2_kind = PotentialSpec::V2Kind::radial_table;
    s.v2_dr = v2_dr;
    s.q = v2_q;
  }
  return s;
}

const std::vector<std::string>& ConfigBuilder::keys() {
  static const std::vector<std::string> k = [] {
    std::vector<std::string> out;
    for (const Key& key : table()) out.emplace_back(key.name);
    return out;
  }();
  return k;
}

void ConfigBuilder::set(const std::string& key, const std::string& value, const std::string& location) {
  if (!find_key(key)) fail(ErrorCode::invalid_argument, "unknown key " + where(key, location));
  entries_[key] = Entry{value, location};
}

void ConfigBuilder::load_text(const std::string& text, const std::string& origin) {
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
      fail(ErrorCode::format, origin + ": " + e.what());
    }
    require(j.contains("config") && j["config"].is_object(), ErrorCode::format,
            origin + ": JSON source has no \"config\" object");
    for (const auto& [k, v] : j["config"].items()) {
      require(v.is_string(), ErrorCode::format, origin + ": config." + k + " is not a string");
      set(k, v.get<std::string>(), origin + ":config." + k);
    }
    return;
  }
  std::map<std::string, std::string> seen;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string loc = origin + ":" + std::to_string(lineno);
    line = trim(line.substr(0, line.find('#')));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    require(eq != std::string::npos, ErrorCode::format, loc + ": expected 'key = value', got '" + line + "'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    require(!key.empty(), ErrorCode::format, loc + ": missing key");
    if (auto it = seen.find(key); it != seen.end())
      fail(ErrorCode::invalid_argument, "duplicate key '" + key + "' at " + it->second + " and " + loc);
    seen[key] = loc;
    set(key, value, loc);
  }
}

void ConfigBuilder::load_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), ErrorCode::io, "cannot read config file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  load_text(ss.str(), path);
}

ExperimentConfig ConfigBuilder::build() const {
  ExperimentConfig c;
  for (const Key& k : table())
    if (auto it = entries_.find(k.name); it != entries_.end()) k.parse(c, it->second.value, it->second.location);

  auto loc = [this](const char* key) {
    auto it = entries_.find(key);
    return it == entries_.end() ? std::string("default") : it->second.location;
  };
  check_range(c.p > 2.0 - c.mu / 3.0, "p", loc("p"), format_double(c.p), "p>2-mu/3");
  if (c.potential == "polynomial")
    check_range(!c.potential_coeffs.empty(), "potential_coeffs", loc("potential_coeffs"), "", "nonempty for potential = polynomial");
  if (!c.v2_table.empty())
    check_range(c.v2_dr > 0.0, "v2_dr", loc("v2_dr"), format_double(c.v2_dr), "v2_dr>0 with v2_table");
  check_range(c.t_final >= c.dt, "t_final", loc("t_final"), format_double(c.t_final), "t_final>=dt");
  return c;
}

ExperimentConfig parse_config_text(const std::string& text, const std::string& origin) {
  ConfigBuilder b;
  b.load_text(text, origin);
  return b.build();
}

std::string canonical_config(const ExperimentConfig& c) {
  std::string s;
  for (const Key& k : table()) s += std::string(k.name) + " = " + k.print(c) + "\n";
  return s;
}

std::string config_hash(const ExperimentConfig& c) {
  ExperimentConfig physics = c;
  physics.out.clear();
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char ch : canonical_config(physics)) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace chq
