#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "delamfem/cohesive.hpp"
#include "delamfem/material.hpp"

#include <cmath>
#include <random>

using namespace delamfem;

namespace {

CohesiveParams table_params(double alpha = 1.0e6) {
    CohesiveParams p;
    p.alpha_n0 = alpha;
    p.alpha_t0 = alpha;
    p.G_Ic = 0.26;
    p.G_IIc = 1.002;
    p.sigma_max = 30.0;
    p.tau_max = 60.0;
    return p;
}

// Damage-frozen interface potential; the traction must be its gradient.
double psi(double dt, double dn, double d_s, const CohesiveParams& p) {
    const double hn = dn > 0.0 ? 1.0 : 0.0;
    return 0.5 * ((1.0 - d_s) * p.alpha_t0 * dt * dt + (1.0 - d_s * hn) * p.alpha_n0 * dn * dn);
}

// Quadrature of the normal (or tangential) traction along a monotonic
// proportional path with mode angle theta, with the damage-onset point
// inserted as a breakpoint so the trapezoid rule is exact on the
// piecewise-linear law.
void dissipation_split(double theta, const CohesiveParams& p, double& G_I, double& G_II) {
    const double cn = std::cos(theta), ct = std::sin(theta);
    const ModeSeparations ms = mode_separations(cn, ct, p);
    auto traction_at = [&](double de) {
        SeparationState s;
        s.delta_n = de * cn;
        s.delta_t = de * ct;
        s = update_history(SeparationState{}, s.delta_n, s.delta_t, p);
        return cohesive_traction(s, p);
    };
    G_I = G_II = 0.0;
    auto integrate = [&](double lo, double hi, int n) {
        double prev_n = traction_at(lo).t_n, prev_t = traction_at(lo).t_t;
        for (int i = 1; i <= n; ++i) {
            const double de = lo + (hi - lo) * i / n;
            const Traction2 t = traction_at(de);
            const double dde = (hi - lo) / n;
            G_I += 0.5 * (prev_n + t.t_n) * dde * cn;
            G_II += 0.5 * (prev_t + t.t_t) * dde * ct;
            prev_n = t.t_n;
            prev_t = t.t_t;
        }
    };
    integrate(0.0, ms.delta_c, 200);
    integrate(ms.delta_c, ms.delta_u, 4000);
}

} // namespace

TEST_CASE("equivalent separation with Macaulay bracket") {
    CHECK(equivalent_separation(0.0, 0.0) == 0.0);
    CHECK(equivalent_separation(-5e-3, 4e-3) == doctest::Approx(4e-3));
    CHECK(equivalent_separation(3e-3, 4e-3) == doctest::Approx(5e-3));
}

TEST_CASE("critical and ultimate separations") {
    const CohesiveParams p = table_params(1.0e6);

    SUBCASE("pure mode I") {
        const ModeSeparations ms = mode_separations(1e-3, 0.0, p);
        CHECK(ms.delta_c == doctest::Approx(3.0e-5).epsilon(1e-12));
        CHECK(ms.delta_u == doctest::Approx(1.7333e-2).epsilon(1e-4));
        // triangle area = G_Ic
        CHECK(0.5 * p.sigma_max * ms.delta_u == doctest::Approx(0.26).epsilon(1e-4));
    }
    SUBCASE("pure mode II") {
        const ModeSeparations ms = mode_separations(0.0, 1e-3, p);
        CHECK(ms.delta_c == doctest::Approx(6.0e-5).epsilon(1e-12));
        CHECK(ms.delta_u == doctest::Approx(3.34e-2).epsilon(1e-3));
    }
    SUBCASE("45 degree proportional path") {
        const ModeSeparations ms = mode_separations(1e-3, 1e-3, p);
        CHECK(ms.delta_c == doctest::Approx(3.7948e-5).epsilon(1e-4));
        CHECK(ms.delta_u == doctest::Approx(2.1759e-2).epsilon(1e-4));
    }
    SUBCASE("zero separation has no direction") {
        CHECK_THROWS_AS(mode_separations(0.0, 0.0, p), std::domain_error);
    }
}

TEST_CASE("bilinear damage function") {
    const double dc = 3e-5, du = 1.73333e-2;
    CHECK(damage(dc / 2.0, dc, du) == 0.0);
    CHECK(damage(du, dc, du) == 1.0);
    CHECK(damage(du * 2.0, dc, du) == 1.0);

    // midpoint of the softening branch halves the traction
    const double de = (dc + du) / 2.0;
    const double d = damage(de, dc, du);
    CHECK(d == doctest::Approx(0.99827).epsilon(1e-4));
    CHECK((1.0 - d) * 1.0e6 * de == doctest::Approx(15.0).epsilon(1e-9));

    // continuity at the breakpoints, monotone in between
    CHECK(damage(dc * (1 + 1e-12), dc, du) == doctest::Approx(0.0).epsilon(1e-6));
    CHECK(damage(du * (1 - 1e-12), dc, du) == doctest::Approx(1.0).epsilon(1e-6));
    double prev = -1.0;
    for (int i = 0; i <= 200; ++i) {
        const double x = dc / 2 + (du * 1.2 - dc / 2) * i / 200.0;
        const double v = damage(x, dc, du);
        CHECK(v >= prev);
        prev = v;
    }
}

TEST_CASE("history update irreversibility") {
    const CohesiveParams p = table_params();
    SeparationState s;

    SUBCASE("monotone growth traverses damage 0 to 1") {
        const ModeSeparations ms = mode_separations(1.0, 0.0, p);
        double prev_d = 0.0;
        for (int i = 1; i <= 100; ++i) {
            const double dn = ms.delta_u * i / 100.0;
            s = update_history(s, dn, 0.0, p);
            CHECK(s.d_s >= prev_d);
            prev_d = s.d_s;
        }
        CHECK(prev_d == doctest::Approx(1.0));
    }
    SUBCASE("no healing after unload/reload") {
        const double x = 5e-3;
        s = update_history(s, x, 0.0, p);
        const double d1 = s.d_s;
        CHECK(d1 > 0.0);
        s = update_history(s, 0.0, 0.0, p);
        CHECK(s.d_s == d1);
        s = update_history(s, x, 0.0, p);
        CHECK(s.d_s == doctest::Approx(d1).epsilon(1e-14));
    }
    SUBCASE("compressive excursions leave history untouched") {
        s = update_history(s, -1e-2, 0.0, p);
        CHECK(s.kappa == 0.0);
        CHECK(s.d_s == 0.0);
    }
    SUBCASE("precracked points stay failed") {
        s.precracked = true;
        s.d_s = 1.0;
        s = update_history(s, 1e-9, 0.0, p);
        CHECK(s.d_s == 1.0);
    }
}

TEST_CASE("cohesive traction") {
    const CohesiveParams p = table_params(1.0e6);
    SeparationState s;

    SUBCASE("zero separation") {
        const Traction2 t = cohesive_traction(s, p);
        CHECK(t.t_t == 0.0);
        CHECK(t.t_n == 0.0);
    }
    SUBCASE("full compressive stiffness despite full damage") {
        s.delta_n = -1e-4;
        s.d_s = 1.0;
        CHECK(cohesive_traction(s, p).t_n == doctest::Approx(-100.0));
    }
    SUBCASE("peak of the bilinear law") {
        s.delta_n = 3e-5;  // = delta_c for pure mode I
        s.d_s = 0.0;
        CHECK(cohesive_traction(s, p).t_n == doctest::Approx(30.0));
    }
}

TEST_CASE("secant stiffness") {
    const CohesiveParams p = table_params(1.0e6);
    SeparationState s;

    s.d_s = 0.0;
    s.delta_n = 1e-5;
    Diag2 k = secant_stiffness(s, p);
    CHECK(k.tt == doctest::Approx(1e6));
    CHECK(k.nn == doctest::Approx(1e6));

    s.d_s = 1.0;
    k = secant_stiffness(s, p);
    CHECK(k.tt == 0.0);
    CHECK(k.nn == 0.0);

    s.delta_n = -1e-5;
    k = secant_stiffness(s, p);
    CHECK(k.tt == 0.0);
    CHECK(k.nn == doctest::Approx(1e6));
}

TEST_CASE("stabilization matrix") {
    CohesiveParams p = table_params(1.0e8);
    StabilizationData stab;
    SeparationState s;
    s.delta_n = 1e-6;

    SUBCASE("huge beta recovers the standard form (S = I)") {
        stab.beta_n = stab.beta_t = 1e30;
        const Diag2 S = stabilization_matrix(s, p, stab);
        CHECK(std::abs(S.tt - 1.0) < 1e-15);
        CHECK(std::abs(S.nn - 1.0) < 1e-15);
    }
    SUBCASE("fully damaged opening point gives S = I exactly") {
        stab.beta_n = stab.beta_t = 3e6;
        s.d_s = 1.0;
        const Diag2 S = stabilization_matrix(s, p, stab);
        CHECK(S.tt == 1.0);
        CHECK(S.nn == 1.0);
    }
    SUBCASE("alpha = beta halves") {
        stab.beta_n = stab.beta_t = 1e8;
        const Diag2 S = stabilization_matrix(s, p, stab);
        CHECK(S.tt == doctest::Approx(0.5));
        CHECK(S.nn == doctest::Approx(0.5));
    }
    SUBCASE("entries in (0,1], monotone in beta and damage") {
        std::mt19937 gen(3);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        for (int i = 0; i < 200; ++i) {
            const double d = u(gen);
            const double beta = std::pow(10.0, 3.0 + 6.0 * u(gen));
            s.d_s = d;
            stab.beta_n = stab.beta_t = beta;
            const Diag2 S = stabilization_matrix(s, p, stab);
            CHECK(S.tt > 0.0);
            CHECK(S.tt <= 1.0);
            CHECK(S.nn > 0.0);
            CHECK(S.nn <= 1.0);

            stab.beta_n = stab.beta_t = beta * 2.0;
            const Diag2 S2 = stabilization_matrix(s, p, stab);
            CHECK(S2.tt >= S.tt);
            s.d_s = std::min(1.0, d + 0.3);
            stab.beta_n = stab.beta_t = beta;
            const Diag2 S3 = stabilization_matrix(s, p, stab);
            CHECK(S3.tt >= S.tt);
            s.d_s = d;
        }
    }
}

TEST_CASE("stabilization parameter estimate") {
    const PlaneStressMatrix D0 = reduced_stiffness(hta6376c(), PlyAngle::deg0);

    SUBCASE("[0/0] patch value, same order as the published runs") {
        // 0.1 x 0.1 mm elements, equal weights
        const double beta = stabilization_parameters(D0, D0, 0.01, 0.01, 0.5, 0.5, 0.1);
        CHECK(beta == doctest::Approx(1.21e6).epsilon(2e-3));
        CHECK(beta < 3e6);
        CHECK(3e6 / beta < 5.0);
    }
    SUBCASE("equal isotropic square elements reduce to |D|/h") {
        PlaneStressMatrix D;
        D.d = Eigen::Matrix3d::Identity() * 42.0;
        const double h = 0.25;
        const double beta = stabilization_parameters(D, D, h * h, h * h, 0.5, 0.5, h);
        CHECK(beta == doctest::Approx(42.0 / h).epsilon(1e-12));
    }
    SUBCASE("doubling both areas halves beta") {
        const double b1 = stabilization_parameters(D0, D0, 0.01, 0.01, 0.5, 0.5, 0.1);
        const double b2 = stabilization_parameters(D0, D0, 0.02, 0.02, 0.5, 0.5, 0.1);
        CHECK(b2 == doctest::Approx(b1 / 2.0).epsilon(1e-12));
    }
}

TEST_CASE("interface weights") {
    const PlaneStressMatrix D0 = reduced_stiffness(hta6376c(), PlyAngle::deg0);
    const PlaneStressMatrix D90 = reduced_stiffness(hta6376c(), PlyAngle::deg90);

    SUBCASE("identical materials, equal areas") {
        const InterfaceWeights w = interface_weights(D0, D0, 0.01, 0.01);
        CHECK(w.gamma1 == doctest::Approx(0.5));
        CHECK(w.gamma2 == doctest::Approx(0.5));
    }
    SUBCASE("stiffer side weighted less for [0/90]") {
        const InterfaceWeights w = interface_weights(D0, D90, 0.01, 0.01);
        CHECK(w.gamma1 == doctest::Approx(0.150).epsilon(5e-3));
        CHECK(w.gamma2 == doctest::Approx(0.850).epsilon(1e-3));
        CHECK(w.gamma1 + w.gamma2 == doctest::Approx(1.0).epsilon(1e-15));
    }
    SUBCASE("vanishing area limit") {
        const InterfaceWeights w = interface_weights(D0, D0, 0.0, 0.01);
        CHECK(w.gamma1 == doctest::Approx(0.0));
    }
}

TEST_CASE("cohesive stiffness estimate") {
    CHECK(stiffness_estimate(1.05e4, 100.0, 1.55) == doctest::Approx(6.774e5).epsilon(1e-3));
    CHECK(stiffness_estimate(1.0, 1.0, 1.0) == 1.0);
    CHECK(stiffness_estimate(1.05e4, 100.0, 0.1) == doctest::Approx(1.05e7));
}

TEST_CASE("parameter validation") {
    CohesiveParams p = table_params();
    CHECK(p.validate().empty());

    p.alpha_t0 = -1.0;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);

    // The high-contrast sliding setup: degenerate mode II triangle is a
    // warning, not an error.
    p = table_params();
    p.alpha_n0 = 1e8;
    p.alpha_t0 = 10.0;
    const auto warnings = p.validate();
    CHECK(warnings.size() == 1);
}

TEST_CASE("traction is the gradient of the damage-frozen potential") {
    const CohesiveParams p = table_params(1.0e6);
    std::mt19937 gen(11);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const double h = 1e-9;
    int checked = 0;
    for (int i = 0; i < 100; ++i) {
        SeparationState s;
        s.delta_t = 2e-2 * u(gen);
        s.delta_n = 2e-2 * u(gen);
        s.d_s = 0.5 + 0.5 * u(gen) * 0.99;
        if (std::abs(s.delta_n) < 10 * h) continue;  // gradient jump at dn = 0
        const Traction2 t = cohesive_traction(s, p);
        const double dpsi_dt =
            (psi(s.delta_t + h, s.delta_n, s.d_s, p) - psi(s.delta_t - h, s.delta_n, s.d_s, p)) /
            (2 * h);
        const double dpsi_dn =
            (psi(s.delta_t, s.delta_n + h, s.d_s, p) - psi(s.delta_t, s.delta_n - h, s.d_s, p)) /
            (2 * h);
        CHECK(t.t_t == doctest::Approx(dpsi_dt).epsilon(1e-6));
        CHECK(t.t_n == doctest::Approx(dpsi_dn).epsilon(1e-6));
        ++checked;
    }
    CHECK(checked > 80);
}

TEST_CASE("pure-mode dissipation reproduces the critical energies") {
    const CohesiveParams p = table_params(1.0e6);
    double G_I, G_II;
    dissipation_split(0.0, p, G_I, G_II);  // pure mode I
    CHECK(G_I == doctest::Approx(0.26).epsilon(1e-6));
    dissipation_split(M_PI / 2.0, p, G_I, G_II);  // pure mode II
    CHECK(G_II == doctest::Approx(1.002).epsilon(1e-6));
}

TEST_CASE("mixed-mode failure criterion holds on proportional paths") {
    const CohesiveParams p = table_params(1.0e6);
    std::mt19937 gen(5);
    std::uniform_real_distribution<double> u(0.05, 0.95);
    for (int i = 0; i < 10; ++i) {
        const double theta = u(gen) * M_PI / 2.0;
        double G_I, G_II;
        dissipation_split(theta, p, G_I, G_II);
        CHECK(G_I / p.G_Ic + G_II / p.G_IIc == doctest::Approx(1.0).epsilon(1e-6));
    }
}

TEST_CASE("traction at onset lies on the peak surface") {
    const CohesiveParams p = table_params(1.0e6);
    std::mt19937 gen(9);
    std::uniform_real_distribution<double> u(0.0, M_PI / 2.0);
    for (int i = 0; i < 20; ++i) {
        const double theta = u(gen);
        const double cn = std::cos(theta), ct = std::sin(theta);
        const ModeSeparations ms = mode_separations(cn, ct, p);
        SeparationState s;
        s.delta_n = ms.delta_c * cn;
        s.delta_t = ms.delta_c * ct;
        s.d_s = 0.0;
        const Traction2 t = cohesive_traction(s, p);
        const double r = std::pow(t.t_n / p.sigma_max, 2) + std::pow(t.t_t / p.tau_max, 2);
        CHECK(r == doctest::Approx(1.0).epsilon(1e-10));
    }
}
