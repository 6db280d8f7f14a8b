#pragma once

#include "delamfem/assembly.hpp"

#include <array>
#include <optional>
#include <string>
#include <vector>

namespace delamfem {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Interface traction/damage samples at integration points, sorted by x1.
struct TractionProfile {
    struct Sample {
        double x1 = 0.0;
        double t_n = 0.0;
        double t_t = 0.0;
        double d_s = 0.0;
    };
    std::vector<Sample> samples;
};

/// Load-displacement record; load is per unit out-of-plane width.
struct LoadDispCurve {
    struct Point {
        double disp = 0.0;
        double load = 0.0;
    };
    std::vector<Point> points;

    double peak_load() const;
    double disp_at_peak() const;
    /// Linear interpolation of the load at a given displacement.
    double load_at(double disp) const;
};

enum class ProfileField { t_n, t_t };

/// Normalized total second difference of a profile: 0 for linear data,
/// grows with the sample count for sign-alternating (sawtooth) data.
double oscillation_index(const TractionProfile& profile, ProfileField field);

/// Simple beam theory oracle for the DCB specimen (per unit width).
struct DcbBeamTheory {
    double E1 = 0.0;
    double arm_h = 0.0;  ///< one arm's thickness
    double b = 1.0;
    double a0 = 0.0;
    double G_Ic = 0.0;

    double inertia() const { return b * arm_h * arm_h * arm_h / 12.0; }
    double compliance(double a) const { return 2.0 * a * a * a / (3.0 * E1 * inertia()); }
    double critical_load() const;
    double critical_disp() const;
    /// Load at a given opening displacement: linear loading branch up to the
    /// critical point, then the propagation branch (crack length from the
    /// displacement).
    double load_at(double delta) const;
};

DcbBeamTheory dcb_beam_theory(double E1, double arm_h, double b, double a0, double G_Ic);

struct DirichletBC {
    int dof = -1;
    double final_value = 0.0;  ///< prescribed displacement at load factor 1
};

struct LoadRecoveryDof {
    int dof = -1;
    double sign = 1.0;
};

enum class BenchmarkName { patch_h, patch_h_perturbed, patch_inclined, patch_strict, dcb, enf, frmm };

const char* benchmark_name_str(BenchmarkName n);
BenchmarkName parse_benchmark_name(const std::string& s);

struct ProblemOptions {
    std::optional<int> nx;
    std::optional<int> ny_per_arm;
    std::optional<double> perturb_fraction;
    std::optional<std::uint64_t> seed;
    std::optional<double> beta_override;
    InterfaceIntegration integration = InterfaceIntegration::gauss;
    std::optional<double> total_disp;
    /// Uniform strain (e11, e22, e12) driving the strict patch.
    std::array<double, 3> strict_strain = {4.0e-4, -8.0e-4, 3.0e-4};
};

/// A benchmark ready to run: mesh with ply tags, boundary conditions as
/// final prescribed values (scaled by the load factor during the run),
/// load-recovery dofs, and the model options.
struct Problem {
    std::string name;
    std::string layup;  ///< "0/0" or "0/90"
    Mesh mesh;
    LaminaProperties material;
    CohesiveParams czm;
    ModelOptions model_options;
    std::vector<DirichletBC> dirichlet;
    std::vector<LoadRecoveryDof> load_dofs;
    double applied_magnitude = 0.0;  ///< |driven displacement| at load factor 1
    int default_increments = 1;
    std::vector<std::string> warnings;
};

/// Builds one of the paper-style benchmark problems with its exact boundary
/// conditions. Defaults follow the published geometries; overrides via
/// ProblemOptions.
Problem make_problem(BenchmarkName name, const std::string& layup, const LaminaProperties& mat,
                     const CohesiveParams& czm, const ProblemOptions& opts = {});

/// Traction/damage profile at the current solution, using the traction of
/// the active formulation (cohesive law for standard, weighted average for
/// stabilized), sorted by x1.
TractionProfile extract_profile(const DiscreteModel& model, const Eigen::VectorXd& u,
                                const std::vector<SeparationState>& states, Formulation form);

} // namespace delamfem
