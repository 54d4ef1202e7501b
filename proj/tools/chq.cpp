// chq: command-line front end over the choquard C API.
#include <cstdio>
#include <iostream>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "choquard/choquard.h"

namespace {

constexpr int exit_error = 2;

int report(chq_status s) {
  std::cerr << "chq: error (" << chq_status_name(s) << "): " << chq_last_error() << '\n';
  return exit_error;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Choquard ground states, spectra and dynamics"};
  app.set_version_flag("--version", std::string(chq_version()));

  std::string config_path;
  app.add_option("config", config_path, "key = value config file, or a report.json to re-run");

  // Flags mirror config keys; they override the file.
  const std::vector<std::pair<std::string, std::string>> flags = {
      {"--command", "command"}, {"--mu", "mu"},         {"--p", "p"},
      {"--omega", "omega"},     {"--grid-n", "grid_n"}, {"--box-l", "box_l"},
      {"--dt", "dt"},           {"--t-final", "t_final"}, {"--lambda", "lambda"},
      {"--epsilon", "epsilon"}, {"--seed", "seed"},     {"--out", "out"},
  };
  std::vector<std::string> values(flags.size());
  for (std::size_t i = 0; i < flags.size(); ++i)
    app.add_option(flags[i].first, values[i], "config key " + flags[i].second);

  std::vector<std::string> sets;
  app.add_option("--set", sets, "any config key as key=value (repeatable)");
  bool print_config = false, list_keys = false;
  app.add_flag("--print-config", print_config, "print the resolved config and exit");
  app.add_flag("--list-keys", list_keys, "print the config keys and exit");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : exit_error;
  }

  if (list_keys) {
    for (std::size_t i = 0; i < chq_config_key_count(); ++i) std::cout << chq_config_key(i) << '\n';
    return 0;
  }

  chq_config* cfg = nullptr;
  if (chq_status s = chq_config_create(&cfg); s != CHQ_OK) return report(s);
  struct Guard {
    chq_config* c;
    ~Guard() { chq_config_destroy(c); }
  } guard{cfg};

  if (!config_path.empty())
    if (chq_status s = chq_config_load_file(cfg, config_path.c_str()); s != CHQ_OK) return report(s);
  for (const std::string& kv : sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) {
      std::cerr << "chq: error: --set expects key=value, got '" << kv << "'\n";
      return exit_error;
    }
    const std::string key = kv.substr(0, eq), loc = "--set " + kv.substr(0, eq);
    if (chq_status s = chq_config_set(cfg, key.c_str(), kv.substr(eq + 1).c_str(), loc.c_str()); s != CHQ_OK)
      return report(s);
  }
  for (std::size_t i = 0; i < flags.size(); ++i) {
    if (app.count(flags[i].first) == 0) continue;
    if (chq_status s = chq_config_set(cfg, flags[i].second.c_str(), values[i].c_str(), flags[i].first.c_str());
        s != CHQ_OK)
      return report(s);
  }
  if (chq_status s = chq_config_validate(cfg); s != CHQ_OK) return report(s);

  if (print_config) {
    std::size_t needed = 0;
    chq_config_canonical(cfg, nullptr, 0, &needed);
    std::string text(needed, '\0');
    chq_config_canonical(cfg, text.data(), text.size(), nullptr);
    text.resize(needed - 1);
    char hash[17];
    chq_config_hash(cfg, hash);
    std::cout << text << "# config_hash " << hash << '\n';
    return 0;
  }

  int code = exit_error;
  if (chq_status s = chq_run(cfg, &code); s != CHQ_OK) return report(s);
  return code;
}
