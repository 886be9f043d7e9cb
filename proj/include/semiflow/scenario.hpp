#ifndef SEMIFLOW_SCENARIO_HPP
#define SEMIFLOW_SCENARIO_HPP

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

namespace semiflow {

// Configuration problems exit with status 2; numeric failures with 3.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ScenarioConfig {
    nlohmann::json raw;
    std::string kind;          // newton | vlasov | sticky | elasto
    std::string output_dir;    // may be overridden at run time
    std::string source_path;
};

// Parses and fully validates a scenario file. Unknown keys anywhere are
// rejected; referenced files must exist.
ScenarioConfig load_config(const std::string& path);
ScenarioConfig parse_config(const nlohmann::json& j, const std::string& source);

struct RunOutputs {
    std::vector<std::string> files;  // paths written, manifest last
};

// Executes the scenario and writes its artifacts (time-series CSV, events
// JSON for sticky runs, run manifest). Deterministic per (config, seed) for
// any thread count, manifest wall time aside.
RunOutputs run_scenario(const ScenarioConfig& cfg,
                        const std::string& output_dir_override = "");

struct LadderSpec {
    std::string parameter;  // dt | n | modes
    std::vector<double> values;
};

// Runs the scenario across the ladder and emits distances between
// consecutive resolutions as CSV.
void convergence_study(const ScenarioConfig& cfg, const LadderSpec& ladder,
                       std::ostream& out);

}  // namespace semiflow

#endif
