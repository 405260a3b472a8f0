#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hodgex/cohomology.hpp"
#include "hodgex/meshgen.hpp"

namespace hodgex {

inline constexpr const char* kScenarioSchema = "hodgex-scenario/1";
inline constexpr const char* kReportSchema = "hodgex-report/1";

struct ToleranceProfile {
    std::string name = "default";
    KernelOptions kernel;
    double tau_field = 1e-5;
    SplitOptions split;

    static ToleranceProfile named(const std::string& name);
    HarmonicOptions harmonic(std::uint64_t seed, int expected = -1) const;
};

/// One end-to-end verification job: a symmetric mesh (generated or from a
/// file), the deformation scales to test, and which analyses to run.
struct Scenario {
    std::string name;
    std::string mesh_kind;  // disk | annulus | sphere | torus | file
    GenParams params;
    std::string mesh_file;
    std::vector<double> s_values{0.0, 1.0};
    int refine = 0;
    std::vector<std::string> analyses;  // empty = all applicable
    std::vector<double> angle_sweep_s;
    double require_min_empty_lambda = -1.0;
    int random_cochains = 20;
    std::uint64_t seed = 0x5eedULL;
    std::string tol_profile = "default";

    bool wants(const std::string& a) const;
};

Scenario scenario_from_json(const Json& j);
Json scenario_to_json(const Scenario& sc);

struct RunOverrides {
    std::optional<std::uint64_t> seed;
    std::optional<std::string> tol_profile;
    int jobs = 1;
};

struct ScenarioReport {
    Json doc;
    bool pass = false;
};

/// Execute the validate -> assemble -> solve -> analyze pipeline; the report
/// is complete even on partial failures and carries a machine-checkable
/// summary.
ScenarioReport run_scenario(const Scenario& sc, const RunOverrides& ov = {});

/// Canonical serialization with volatile fields (timing, timestamps) removed;
/// two runs with one seed must agree byte-for-byte on this.
std::string report_fingerprint(const Json& report);

/// CSV table of the duality-angle sweep (columns per the report schema).
std::string angle_sweep_csv(const Json& report);

struct VerifyAllResult {
    int exit_code = 0;  // 0 pass, 1 failures, 2 usage, 3 internal
    Json summary;
    std::vector<std::pair<std::string, ScenarioReport>> reports;
};
VerifyAllResult verify_all(const std::string& directory, const RunOverrides& ov = {});

}  // namespace hodgex
