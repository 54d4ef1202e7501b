#pragma once

#include <iosfwd>
#include <string>

#include "choquard/config.hpp"
#include "choquard/dynamics.hpp"
#include "choquard/functionals.hpp"
#include "choquard/stability.hpp"
#include "json.hpp"

namespace chq {

const char* version_string();

// Report schema tag; bumped whenever a JSON key or CSV column changes.
inline constexpr const char* report_schema = "chq-report-1";

nlohmann::json to_json(const FunctionalReport& r);
nlohmann::json to_json(const ExperimentVerdict& v);
nlohmann::json to_json(const EvolutionTrace& t);  // summary, not the series

// Wraps results with schema, version, config (canonical strings), config hash
// and a UTC timestamp, then writes sorted-key JSON. Throws ErrorCode::io.
void write_report(const nlohmann::json& results, const ExperimentConfig& config, const std::string& path);

// Exit codes of run_command.
inline constexpr int exit_success = 0;
inline constexpr int exit_verdict_fail = 1;
inline constexpr int exit_runtime_error = 2;

// Runs the configured command, writing report.json, CSV traces and field files
// into config.out. Errors are reported on `diag` and mapped to exit codes.
int run_command(const ExperimentConfig& config, std::ostream& diag);

}  // namespace chq
