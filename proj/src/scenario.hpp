#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "ensembles.hpp"
#include "widths.hpp"

namespace kw {

enum class ScenarioKind {
    orbit_set,
    gluskin,
    mixed_ball,
    matrix_polytope,
    independent,
    isotropic_check,
};

const char* scenario_kind_name(ScenarioKind k);

// Declarative scenario description parsed from a key = value config with
// [section] tables; one scenario per file.
struct ScenarioConfig {
    ScenarioKind kind = ScenarioKind::orbit_set;
    uint64_t seed = 0;

    std::vector<double> q_list;
    std::vector<int> n_list;  // possibly derived from an eps list

    int N = 0;
    Vec x;                                  // orbit_set / isotropic_check
    GroupKind group = GroupKind::cyclic_signs;
    std::vector<int> k_list;                // gluskin
    int s = 0, b = 0;                       // mixed_ball
    double p1 = 2.0, p2 = 2.0;
    int N1 = 0, N2 = 0, k1 = 0, k2 = 0;     // matrix_polytope
    std::vector<ScalarLaw> laws;            // independent

    bool exact = true;
    long long samples = 0;

    OptimizerOptions opt;
    bool with_upper = true;

    std::string out_path;
    std::string format = "csv";
    bool timings = false;

    static ScenarioConfig parse_text(const std::string& text);
    static ScenarioConfig parse_file(const std::string& path);
};

struct ResultRow {
    std::string scenario;
    double q = 0.0;
    int N = 0;
    int n = 0;
    double lower_bound = std::numeric_limits<double>::quiet_NaN();
    double sigma_upper = std::numeric_limits<double>::quiet_NaN();
    double upper_estimate = std::numeric_limits<double>::quiet_NaN();
    double ratio = std::numeric_limits<double>::quiet_NaN();
    uint64_t seed = 0;
    long long runtime_ms = 0;
    std::string error;
};

enum RunParts : int {
    run_certify = 1,
    run_estimate = 2,
    run_all = 3,
};

// One row per grid cell, in declared order, deterministically for a fixed
// config + seed; per-row pipeline errors are recorded without aborting.
std::vector<ResultRow> run_scenario(const ScenarioConfig& cfg, int parts, int threads);

std::string rows_to_csv(const std::vector<ResultRow>& rows);
std::string rows_to_json(const std::vector<ResultRow>& rows);
void emit_report(const std::vector<ResultRow>& rows, const std::string& path,
                 const std::string& format);

struct SelfcheckResult {
    int passed = 0;
    int failed = 0;
    std::string report;  // one pass/fail line per check
};

// Fast subset of the acceptance criteria (< 60 s), exit-style summary.
SelfcheckResult selfcheck();

} // namespace kw
