#ifndef SEMIFLOW_VERIFY_HPP
#define SEMIFLOW_VERIFY_HPP

#include <string>
#include <vector>

#include "semiflow/jeans_vlasov.hpp"
#include "semiflow/sticky.hpp"

namespace semiflow {

struct CheckResult {
    std::string name;
    double max_violation;
    double tolerance;
    bool pass;
};

struct SuiteReport {
    std::string suite;
    std::vector<CheckResult> checks;
    bool pass = true;
};

std::vector<std::string> suite_names();

// Canned seeded systems shared by the verify suites and the acceptance run.
PhaseMeasure seeded_phase_measure(std::uint64_t seed, std::size_t n, std::size_t d);
StickyInitialData seeded_sticky_data(std::uint64_t seed, std::size_t n, double kappa);
// First time >= want that is not within epsilon_event of a merge event.
double non_event_time(const FlowMap& fm, double want);

// Runs one of the canned invariant suites: entropy, qspp, moments, energy,
// averaging, oracle-match, galerkin-identities. Throws ConfigError on an
// unknown name.
SuiteReport run_suite(const std::string& name);

// Re-checks the artifacts of a finished run (given its manifest path)
// against the invariants that apply to its scenario kind.
SuiteReport verify_artifacts(const std::string& manifest_path);

std::string report_json(const SuiteReport& report);

}  // namespace semiflow

#endif
