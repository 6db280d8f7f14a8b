#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "delamfem/bench.hpp"
#include "delamfem/solver.hpp"

#include <cmath>

using namespace delamfem;

namespace {
TractionProfile profile_from(const std::vector<double>& tn) {
    TractionProfile p;
    for (size_t i = 0; i < tn.size(); ++i) p.samples.push_back({double(i), tn[i], 0.0, 0.0});
    return p;
}
} // namespace

TEST_CASE("oscillation index") {
    SUBCASE("linear profiles have zero index") {
        std::vector<double> v;
        for (int i = 0; i < 20; ++i) v.push_back(3.0 - 0.25 * i);
        CHECK(oscillation_index(profile_from(v), ProfileField::t_n) ==
              doctest::Approx(0.0).epsilon(1e-12));
    }
    SUBCASE("alternating sawtooth grows linearly with the sample count") {
        for (int n : {9, 17, 33}) {
            std::vector<double> v;
            for (int i = 0; i < n; ++i) v.push_back(i % 2 ? 1.0 : -1.0);
            // second differences are -+4 at each interior point, range is 2
            CHECK(oscillation_index(profile_from(v), ProfileField::t_n) ==
                  doctest::Approx(2.0 * (n - 2)).epsilon(1e-9));
        }
    }
    SUBCASE("smooth parabola stays bounded, amplitude cancels") {
        for (double amp : {1.0, 1e6}) {
            std::vector<double> v;
            const int n = 50;
            for (int i = 0; i < n; ++i) {
                const double x = double(i) / (n - 1);
                v.push_back(amp * x * x);
            }
            const double oi = oscillation_index(profile_from(v), ProfileField::t_n);
            CHECK(oi < 0.1);  // ~2/n, independent of amplitude
        }
    }
    SUBCASE("too few samples") {
        CHECK_THROWS_AS(oscillation_index(profile_from({1, 2, 3, 4}), ProfileField::t_n),
                        std::invalid_argument);
    }
}

TEST_CASE("DCB simple beam theory oracle") {
    const DcbBeamTheory bt = dcb_beam_theory(1.2e5, 1.55, 1.0, 35.0, 0.26);
    CHECK(bt.critical_load() == doctest::Approx(2.81).epsilon(1e-3));
    CHECK(bt.critical_disp() == doctest::Approx(2.16).epsilon(2e-3));

    // loading branch is linear through the critical point
    CHECK(bt.load_at(bt.critical_disp() / 2) ==
          doctest::Approx(bt.critical_load() / 2).epsilon(1e-9));
    // propagation branch decays
    CHECK(bt.load_at(4.0) < bt.critical_load());
    CHECK(bt.load_at(6.0) < bt.load_at(4.0));

    // scalings
    CHECK(dcb_beam_theory(1.2e5, 1.55, 1.0, 35.0, 1e-12).critical_load() ==
          doctest::Approx(0.0).epsilon(1e-5));
    CHECK(dcb_beam_theory(1.2e5, 1.55, 1.0, 70.0, 0.26).critical_load() ==
          doctest::Approx(bt.critical_load() / 2).epsilon(1e-9));
}

TEST_CASE("benchmark problem construction") {
    const LaminaProperties mat = hta6376c();
    CohesiveParams czm;

    SUBCASE("high-contrast patch setup") {
        czm.alpha_n0 = 1e8;
        czm.alpha_t0 = 10.0;
        const Problem p = make_problem(BenchmarkName::patch_h, "0/0", mat, czm);
        CHECK(p.czm.alpha_n0 == 1e8);
        CHECK(p.applied_magnitude == doctest::Approx(0.1));
        // bottom edge fully fixed: 11 nodes x 2 dofs; top edge 11 driven dofs
        int fixed = 0, driven = 0;
        for (const auto& bc : p.dirichlet) (bc.final_value == 0.0 ? fixed : driven)++;
        CHECK(fixed == 22);
        CHECK(driven == 11);
        CHECK(!p.warnings.empty());  // degenerate mode II triangle warning
    }
    SUBCASE("dcb geometry") {
        const Problem p = make_problem(BenchmarkName::dcb, "0/0", mat, czm);
        double xmax = 0, ymax = 0;
        for (const auto& n : p.mesh.nodes) {
            xmax = std::max(xmax, n[0]);
            ymax = std::max(ymax, n[1]);
        }
        CHECK(xmax == doctest::Approx(150.0));
        CHECK(ymax == doctest::Approx(3.1));
        int precracked = 0;
        for (const auto& f : p.mesh.interface_elements) precracked += f.precracked;
        CHECK(precracked * 150.0 / p.mesh.interface_elements.size() == doctest::Approx(35.0));
        CHECK(p.load_dofs.size() == 1);
    }
    SUBCASE("frmm loads the upper corner node only") {
        const Problem p = make_problem(BenchmarkName::frmm, "0/0", mat, czm);
        int driven = 0;
        for (const auto& bc : p.dirichlet)
            if (bc.final_value != 0.0) ++driven;
        CHECK(driven == 1);
        const int dof = p.load_dofs[0].dof;
        const auto& node = p.mesh.nodes[dof / 2];
        CHECK(node[0] == 0.0);
        CHECK(node[1] == doctest::Approx(3.1));
    }
    SUBCASE("layup tags: 0/90 puts the isotropic ply below") {
        const Problem p = make_problem(BenchmarkName::dcb, "0/90", mat, czm);
        for (const auto& e : p.mesh.q4_elements) {
            if (e.subdomain == 1) CHECK(e.ply == PlyAngle::deg0);
            else CHECK(e.ply == PlyAngle::deg90);
        }
        CHECK_THROWS_AS(make_problem(BenchmarkName::dcb, "45/45", mat, czm), ConfigError);
    }
}

TEST_CASE("strict patch: uniform stress and exact interface jump") {
    const LaminaProperties mat = hta6376c();
    const PlaneStressMatrix D = reduced_stiffness(mat, PlyAngle::deg0);

    for (double alpha : {1e4, 1e8, 1e12}) {
        CAPTURE(alpha);
        CohesiveParams czm;
        czm.alpha_n0 = czm.alpha_t0 = alpha;
        const Problem p = make_problem(BenchmarkName::patch_strict, "0/0", mat, czm);
        SolverConfig cfg;
        cfg.n_increments = 1;
        cfg.formulation = Formulation::stabilized;
        const RunResults r = run_simulation(p, cfg);
        REQUIRE(!r.aborted);

        const ProblemOptions defaults;
        const Eigen::Vector3d eps(defaults.strict_strain[0], defaults.strict_strain[1],
                                  2.0 * defaults.strict_strain[2]);
        const Eigen::Vector3d sig = D.d * eps;

        // bulk stress uniform
        const DiscreteModel model = build_model(p.mesh, p.material, p.czm, p.model_options);
        const auto stresses = bulk_gauss_stresses(model, r.final_state.u);
        const double sig_scale = sig.cwiseAbs().maxCoeff();
        for (const auto& elem : stresses)
            for (const auto& s : elem)
                CHECK((s - sig).cwiseAbs().maxCoeff() <= 1e-8 * sig_scale);

        // interface jump = (sigma.n)/alpha componentwise
        const auto states = r.final_state.states;
        for (size_t f = 0; f < model.iface.size(); ++f) {
            for (int g = 0; g < 2; ++g) {
                const auto& s = states[2 * f + g];
                CHECK(s.delta_t == doctest::Approx(sig(2) / alpha).epsilon(1e-8));
                CHECK(s.delta_n == doctest::Approx(sig(1) / alpha).epsilon(1e-8));
            }
        }

        // recovered profile is constant at the exact traction
        const TractionProfile prof = r.profiles.back();
        for (const auto& smp : prof.samples) {
            CHECK(smp.t_n == doctest::Approx(sig(1)).epsilon(1e-8));
            CHECK(smp.t_t == doctest::Approx(sig(2)).epsilon(1e-8));
        }
    }
}

TEST_CASE("ENF pre-crack region stays in frictionless contact") {
    ProblemOptions opts;
    opts.nx = 50;
    opts.ny_per_arm = 2;
    opts.total_disp = 2.0;
    CohesiveParams czm;
    const Problem p = make_problem(BenchmarkName::enf, "0/0", hta6376c(), czm, opts);
    SolverConfig cfg;
    cfg.n_increments = 10;
    cfg.formulation = Formulation::stabilized;
    const RunResults r = run_simulation(p, cfg);
    REQUIRE(!r.aborted);

    // the pre-crack covers x < 35: normal traction there is compressive
    // (or zero where faces separate), never tensile
    for (const auto& s : r.profiles.back().samples)
        if (s.x1 < 35.0) CHECK(s.t_n <= 1e-9);
    CHECK(r.curve.peak_load() > 0.0);
}
