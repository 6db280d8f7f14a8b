#pragma once

#include "delamfem/bench.hpp"
#include "delamfem/solver.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace delamfem {

/// Validated run specification (a JSON document; schema shipped under
/// schemas/run_config.schema.json). Unknown keys are rejected.
struct RunConfig {
    BenchmarkName benchmark = BenchmarkName::dcb;
    std::string layup = "0/0";
    std::vector<Formulation> formulations = {Formulation::stabilized};
    std::vector<double> stiffness = {1.0e6};  ///< alpha_n0 = alpha_t0 sweep
    std::optional<double> alpha_n;            ///< explicit anisotropic override
    std::optional<double> alpha_t;
    std::optional<double> beta_explicit;  ///< empty = auto (coercivity estimate)
    LaminaProperties material;            ///< defaults to HTA/6376C
    CohesiveParams cohesive;              ///< stiffnesses filled per run
    InterfaceIntegration integration = InterfaceIntegration::gauss;

    std::optional<int> nx;
    std::optional<int> ny_per_arm;
    std::optional<double> perturb_fraction;
    std::optional<std::uint64_t> seed;

    std::optional<int> n_increments;
    std::optional<double> total_disp;
    int max_newton_iters = 100;
    double tol_force_rel = 1.0e-3;
    double tol_disp_rel = 1.0e-2;
    int max_cutbacks = 8;

    std::vector<int> snapshot_steps;  ///< empty = auto (peak + 3 post-peak)
    std::array<double, 3> strict_strain = {4.0e-4, -8.0e-4, 3.0e-4};
    std::string output_dir = "out";
};

/// Parses and validates the JSON text; throws ConfigError naming the
/// offending key and the expected type.
RunConfig parse_config(const std::string& json_text);

/// One scheduled run of a sweep (benchmark x formulation x stiffness).
struct RunItem {
    Formulation formulation = Formulation::stabilized;
    double alpha_n = 1.0e6;
    double alpha_t = 1.0e6;
    std::string run_id;  ///< content hash of the resolved config (output paths excluded)
};

std::vector<RunItem> plan_runs(const RunConfig& cfg);

/// Summary of one completed run (what lands in summary.json).
struct RunSummary {
    std::string run_id;
    double peak_load = 0.0;
    double disp_at_peak = 0.0;
    std::vector<int> snapshot_steps;
    std::vector<double> oi_t_n;  ///< per snapshot
    std::vector<double> oi_t_t;
    long iterations_total = 0;
    double beta_median = 0.0;
    bool aborted = false;
    double wall_time_s = 0.0;
};

/// Executes one run item: builds the problem, runs the solver, writes
/// curve.csv, profile_stepK.csv, summary.json and the SVG plots into
/// out_dir/run_id/. Returns the summary.
RunSummary execute_run(const RunConfig& cfg, const RunItem& item, const std::string& out_dir,
                       std::ostream* log);

/// Median auto stabilization parameter over the interface elements of the
/// problem implied by (cfg, item). Used for reporting.
double median_auto_beta(const RunConfig& cfg, const RunItem& item);

} // namespace delamfem
