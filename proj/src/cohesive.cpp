#include "delamfem/cohesive.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace delamfem {

namespace {
inline double macaulay(double x) { return x > 0.0 ? x : 0.0; }

// <dn>/dn with the tensile branch limit at dn = 0.
inline double tension_fraction(double delta_n) { return delta_n < 0.0 ? 0.0 : 1.0; }
} // namespace

std::vector<std::string> CohesiveParams::validate() const {
    const double vals[] = {alpha_n0, alpha_t0, G_Ic, G_IIc, sigma_max, tau_max};
    for (double v : vals) {
        if (!(v > 0.0))
            throw std::invalid_argument("cohesive parameters must be positive");
    }
    std::vector<std::string> warnings;
    if (sigma_max * sigma_max / (2.0 * alpha_n0) >= G_Ic)
        warnings.push_back("mode I triangle degenerate: sigma_max^2/(2*alpha_n0) >= G_Ic");
    if (tau_max * tau_max / (2.0 * alpha_t0) >= G_IIc)
        warnings.push_back("mode II triangle degenerate: tau_max^2/(2*alpha_t0) >= G_IIc");
    return warnings;
}

double equivalent_separation(double delta_n, double delta_t) {
    return std::hypot(macaulay(delta_n), delta_t);
}

ModeSeparations mode_separations(double delta_n, double delta_t, const CohesiveParams& p) {
    const double de = equivalent_separation(delta_n, delta_t);
    if (de <= 0.0)
        throw std::domain_error("mode_separations undefined at zero equivalent separation");
    const double cosI = macaulay(delta_n) / de;
    const double cosII = delta_t / de;

    const double an = p.alpha_n0 * cosI / p.sigma_max;
    const double at = p.alpha_t0 * cosII / p.tau_max;
    ModeSeparations ms;
    ms.delta_c = 1.0 / std::hypot(an, at);
    ms.delta_u = 1.0 / (p.alpha_n0 * ms.delta_c * cosI * cosI / (2.0 * p.G_Ic) +
                        p.alpha_t0 * ms.delta_c * cosII * cosII / (2.0 * p.G_IIc));
    return ms;
}

double damage(double delta_e, double delta_c, double delta_u) {
    if (delta_e <= delta_c) return 0.0;
    if (delta_e >= delta_u) return 1.0;
    const double d = delta_u * (delta_e - delta_c) / (delta_e * (delta_u - delta_c));
    return std::clamp(d, 0.0, 1.0);
}

SeparationState update_history(const SeparationState& state, double delta_n,
                               double delta_t, const CohesiveParams& p) {
    SeparationState out = state;
    out.delta_n = delta_n;
    out.delta_t = delta_t;
    if (out.precracked) {
        out.d_s = 1.0;
        return out;
    }
    const double de = equivalent_separation(delta_n, delta_t);
    out.kappa = std::max(state.kappa, de);
    if (de > 0.0) {
        const ModeSeparations ms = mode_separations(delta_n, delta_t, p);
        out.d_s = damage(out.kappa, ms.delta_c, ms.delta_u);
    } else {
        // No current direction: keep the previous damage (kappa unchanged).
        out.d_s = state.d_s;
    }
    // Damage never heals within a run even if the mode mix rotates.
    out.d_s = std::max(out.d_s, state.d_s);
    return out;
}

Traction2 cohesive_traction(const SeparationState& s, const CohesiveParams& p) {
    Traction2 t;
    t.t_t = (1.0 - s.d_s) * p.alpha_t0 * s.delta_t;
    t.t_n = (1.0 - s.d_s * tension_fraction(s.delta_n)) * p.alpha_n0 * s.delta_n;
    return t;
}

Diag2 secant_stiffness(const SeparationState& s, const CohesiveParams& p) {
    Diag2 k;
    k.tt = (1.0 - s.d_s) * p.alpha_t0;
    k.nn = (1.0 - s.d_s * tension_fraction(s.delta_n)) * p.alpha_n0;
    return k;
}

Diag2 stabilization_matrix(const SeparationState& s, const CohesiveParams& p,
                           const StabilizationData& stab) {
    const Diag2 alpha_eff = secant_stiffness(s, p);
    Diag2 S;
    S.tt = stab.beta_t / (alpha_eff.tt + stab.beta_t);
    S.nn = stab.beta_n / (alpha_eff.nn + stab.beta_n);
    return S;
}

double stabilization_parameters(const PlaneStressMatrix& D1, const PlaneStressMatrix& D2,
                                double area1, double area2, double gamma1, double gamma2,
                                double edge_len) {
    if (!(area1 > 0.0 && area2 > 0.0 && edge_len > 0.0))
        throw std::invalid_argument("stabilization_parameters: areas and edge length must be positive");
    return 2.0 * (spectral_norm(D1) * gamma1 * gamma1 / area1 +
                  spectral_norm(D2) * gamma2 * gamma2 / area2) * edge_len;
}

InterfaceWeights interface_weights(const PlaneStressMatrix& D1, const PlaneStressMatrix& D2,
                                   double area1, double area2) {
    if (!(area1 >= 0.0 && area2 >= 0.0 && area1 + area2 > 0.0))
        throw std::invalid_argument("interface_weights: areas must be non-negative, not both zero");
    const double r1 = area1 / spectral_norm(D1);
    const double r2 = area2 / spectral_norm(D2);
    InterfaceWeights w;
    w.gamma1 = r1 / (r1 + r2);
    w.gamma2 = 1.0 - w.gamma1;
    return w;
}

double stiffness_estimate(double E, double M, double t) {
    if (!(E > 0.0 && M > 0.0 && t > 0.0))
        throw std::invalid_argument("stiffness_estimate: all inputs must be positive");
    return E * M / t;
}

} // namespace delamfem
