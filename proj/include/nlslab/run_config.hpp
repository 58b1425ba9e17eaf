/*
 * run_config.hpp — Batch front end: config parsing, experiment dispatch,
 * run records.
 *
 * Config format: line-oriented `key = value`, `#` comments, UTF-8.  Every
 * command has a fixed key schema; unknown keys are rejected (no silent
 * defaults for misspellings), missing required keys and type mismatches name
 * the offending key and line.  Duplicate keys: last wins, with a warning
 * recorded in the RunRecord.  Precedence for seed/workers/output_dir:
 * command-line flag > environment (NLSLAB_SEED, NLSLAB_WORKERS, NLSLAB_OUT)
 * > config file > default.
 *
 * dispatch() runs the named experiment and writes `record.json` (and any CSV
 * tables) to output_dir.  The record carries "schema": 1, the tool version,
 * the resolved config echo, warnings, wall time, a pass flag, the result
 * payload, and provenance (which oracle, which tolerances).  The payload is
 * a pure function of the resolved config: identical configs produce
 * byte-identical payloads for any worker count.  Exit status of the tool is
 * 0 iff every asserted tolerance passed.
 */
#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace nlslab {

enum class ParamType { Int, Real, String, IntList, RealList };

struct ParamSpec {
    ParamType type = ParamType::Real;
    bool required = false;
    std::string default_value;  // used when not required and absent
};

// command name → key → spec, for all nine commands
const std::map<std::string, std::map<std::string, ParamSpec>>& command_schemas();

struct RunConfig {
    std::string command;
    std::map<std::string, std::string> parameters;  // validated, defaults filled
    std::uint64_t seed = 0;
    int workers = 1;
    std::string output_dir = ".";
    std::vector<std::string> warnings;

    // typed access (parameters must have been validated)
    long long get_int(const std::string& key) const;
    double get_real(const std::string& key) const;
    std::string get_string(const std::string& key) const;
    std::vector<long long> get_int_list(const std::string& key) const;
    std::vector<double> get_real_list(const std::string& key) const;
};

// Parses the raw text (command may be given as a `command = ...` key);
// throws std::invalid_argument naming the offending line on malformed input.
RunConfig parse_config(const std::string& text);

// Checks the command, rejects unknown keys, fills defaults, type-checks
// every value.  Throws std::invalid_argument naming key and problem.
void validate_config(RunConfig& config);

// Canonical `key = value` text; parse_config ∘ serialize_config round-trips.
std::string serialize_config(const RunConfig& config);

struct RunRecord {
    bool pass = false;
    std::string payload_json;  // deterministic part (byte-identical on replay)
    std::string record_json;   // full record including wall time
    std::string record_path;   // file written by dispatch
};

// Runs the experiment, writes record.json (+ CSVs) into output_dir.
RunRecord dispatch(const RunConfig& config);

inline constexpr const char* kToolVersion = "nlslab 1.0.0";

}  // namespace nlslab
