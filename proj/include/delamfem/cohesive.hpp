#pragma once

#include "delamfem/material.hpp"

#include <string>
#include <vector>

namespace delamfem {

/// Anisotropic bilinear cohesive law parameters.
/// Units: stiffnesses N/mm^3, energies N/mm, strengths N/mm^2.
struct CohesiveParams {
    double alpha_n0 = 1.0e6;  ///< initial normal stiffness
    double alpha_t0 = 1.0e6;  ///< initial tangential stiffness
    double G_Ic = 0.26;       ///< mode I critical fracture energy
    double G_IIc = 1.002;     ///< mode II critical fracture energy
    double sigma_max = 30.0;  ///< pure mode I strength
    double tau_max = 60.0;    ///< pure mode II strength

    /// Throws std::invalid_argument for non-positive values. The pure-mode
    /// triangle consistency checks (delta_c < delta_u) are reported as
    /// warnings, not errors: the high-contrast sliding setups run with a
    /// tangential stiffness that deliberately violates them.
    std::vector<std::string> validate() const;
};

/// Per-integration-point separation state. kappa is the largest equivalent
/// separation ever attained (the history variable); d_s the damage in [0,1].
struct SeparationState {
    double delta_n = 0.0;
    double delta_t = 0.0;
    double kappa = 0.0;
    double d_s = 0.0;
    bool precracked = false;  ///< pinned at d_s = 1, never heals
};

/// Per-interface-element stabilization data (geometry-determined, fixed
/// through the run under the small-strain assumption).
struct StabilizationData {
    double beta_n = 0.0;
    double beta_t = 0.0;
    double gamma1 = 0.5;  ///< weight of the upper (subdomain 1) stress
    double gamma2 = 0.5;  ///< weight of the lower (subdomain 2) stress
};

/// 2x2 diagonal matrix in the local (tangential, normal) frame.
struct Diag2 {
    double tt = 0.0;
    double nn = 0.0;
};

/// Equivalent separation sqrt(<dn>^2 + dt^2); compression excluded by the
/// Macaulay bracket.
double equivalent_separation(double delta_n, double delta_t);

struct ModeSeparations {
    double delta_c = 0.0;  ///< onset (critical) equivalent separation
    double delta_u = 0.0;  ///< ultimate equivalent separation
};

/// Critical and ultimate equivalent separations for the current mode mix.
/// Direction cosines are cosI = <dn>/de, cosII = dt/de. Throws
/// std::domain_error when the equivalent separation vanishes (no direction).
ModeSeparations mode_separations(double delta_n, double delta_t, const CohesiveParams& p);

/// Scalar damage of the bilinear law, clamped to [0,1]:
///   0 for de <= dc, 1 for de >= du, du*(de-dc)/(de*(du-dc)) between.
double damage(double delta_e, double delta_c, double delta_u);

/// Irreversible history update: kappa <- max(kappa, de); damage recomputed
/// from kappa with the critical/ultimate separations evaluated at the
/// current direction cosines. Precracked points stay fully damaged.
SeparationState update_history(const SeparationState& state, double delta_n,
                               double delta_t, const CohesiveParams& p);

struct Traction2 {
    double t_t = 0.0;
    double t_n = 0.0;
};

/// Cohesive traction (tangential, normal), opening-positive:
///   t_t = (1-d) at0 dt,   t_n = (1 - d*<dn>/dn) an0 dn.
/// Compression transmits the full undamaged normal stiffness.
Traction2 cohesive_traction(const SeparationState& s, const CohesiveParams& p);

/// Secant stiffness diag((1-d) at0, (1 - d*<dn>/dn) an0). At dn = 0 the
/// tensile branch limit is used (<dn>/dn := 1).
Diag2 secant_stiffness(const SeparationState& s, const CohesiveParams& p);

/// Stabilization matrix S = diag(bt/(at_eff+bt), bn/(an_eff+bn)) with the
/// effective (damaged, compression-corrected) stiffnesses, so the contact
/// response of the stabilized form matches the standard form.
Diag2 stabilization_matrix(const SeparationState& s, const CohesiveParams& p,
                           const StabilizationData& stab);

/// Coercivity estimate for the stabilization parameter (same value for both
/// directions): 2*(|D1| g1^2/area1 + |D2| g2^2/area2)*edge_len.
double stabilization_parameters(const PlaneStressMatrix& D1, const PlaneStressMatrix& D2,
                                double area1, double area2, double gamma1, double gamma2,
                                double edge_len);

struct InterfaceWeights {
    double gamma1 = 0.5;
    double gamma2 = 0.5;
};

/// Stiffness-weighted interface weights: the stiffer side gets the smaller
/// weight. gamma1 + gamma2 = 1.
InterfaceWeights interface_weights(const PlaneStressMatrix& D1, const PlaneStressMatrix& D2,
                                   double area1, double area2);

/// 1D-laminate estimate of the cohesive stiffness needed to avoid
/// artificial compliance: alpha0 = E*M/t.
double stiffness_estimate(double E, double M, double t);

} // namespace delamfem
