#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "delamfem/assembly.hpp"

#include <Eigen/Eigenvalues>
#include <random>

using namespace delamfem;

namespace {

std::array<std::array<double, 2>, 4> unit_square() {
    return {{{0.0, 0.0}, {1.0, 0.0}, {1.0, 1.0}, {0.0, 1.0}}};
}

PlaneStressMatrix isotropic(double E, double nu) {
    PlaneStressMatrix D;
    const double f = E / (1.0 - nu * nu);
    D.d << f, nu * f, 0, nu * f, f, 0, 0, 0, E / (2 * (1 + nu));
    return D;
}

CohesiveParams table_params(double an, double at) {
    CohesiveParams p;
    p.alpha_n0 = an;
    p.alpha_t0 = at;
    return p;
}

Mesh small_patch(int nx, int ny) {
    GeometrySpec s;
    s.kind = MeshKind::patch_horizontal;
    s.L = s.H = 1.0;
    s.nx = nx;
    s.ny_per_arm = ny;
    return build_patch(s);
}

// Independent dense FD check of the assembled stiffness: dR/du = -K.
double max_fd_error(const DiscreteModel& model, const Eigen::VectorXd& u0,
                    const std::vector<SeparationState>& states, Formulation form) {
    const GlobalSystem sys = assemble(model, u0, states, form);
    const Eigen::MatrixXd K = Eigen::MatrixXd(sys.K);
    const double h = 1e-7;
    double max_err = 0.0;
    const double scale = K.cwiseAbs().maxCoeff();
    for (int j = 0; j < model.n_dofs; ++j) {
        Eigen::VectorXd up = u0, um = u0;
        up(j) += h;
        um(j) -= h;
        const Eigen::VectorXd fp = assemble(model, up, states, form).f_int;
        const Eigen::VectorXd fm = assemble(model, um, states, form).f_int;
        const Eigen::VectorXd col = (fp - fm) / (2 * h);
        max_err = std::max(max_err, (col - K.col(j)).cwiseAbs().maxCoeff() / scale);
    }
    return max_err;
}

} // namespace

TEST_CASE("q4 element basics") {
    const auto coords = unit_square();
    const PlaneStressMatrix D = isotropic(1.0, 0.3);

    SUBCASE("zero displacement, symmetric PSD stiffness with 3 rigid modes") {
        const ElementMatrices em = q4_element(coords, D, Eigen::Matrix<double, 8, 1>::Zero());
        CHECK(em.f_int.norm() == 0.0);
        CHECK((em.k - em.k.transpose()).cwiseAbs().maxCoeff() <=
              1e-12 * em.k.cwiseAbs().maxCoeff());
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(em.k);
        int zero_modes = 0;
        for (int i = 0; i < 8; ++i)
            if (std::abs(eig.eigenvalues()(i)) < 1e-12) ++zero_modes;
        CHECK(zero_modes == 3);
        CHECK(eig.eigenvalues().minCoeff() > -1e-12);
    }

    SUBCASE("affine displacement produces constant stress at all Gauss points") {
        std::mt19937 gen(17);
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        for (int trial = 0; trial < 10; ++trial) {
            Eigen::Matrix2d A;
            A << u(gen), u(gen), u(gen), u(gen);
            Eigen::Matrix<double, 8, 1> ue;
            for (int a = 0; a < 4; ++a) {
                ue(2 * a) = A(0, 0) * coords[a][0] + A(0, 1) * coords[a][1];
                ue(2 * a + 1) = A(1, 0) * coords[a][0] + A(1, 1) * coords[a][1];
            }
            const double g = 1.0 / std::sqrt(3.0);
            const Eigen::Vector3d s0 = q4_stress(coords, D, ue, -g, -g);
            for (const auto& p :
                 {std::pair<double, double>{g, -g}, {g, g}, {-g, g}}) {
                const Eigen::Vector3d s = q4_stress(coords, D, ue, p.first, p.second);
                CHECK((s - s0).cwiseAbs().maxCoeff() <= 1e-12 * s0.cwiseAbs().maxCoeff());
            }
        }
    }

    SUBCASE("stiffness matches finite differences of the internal force") {
        std::mt19937 gen(23);
        std::uniform_real_distribution<double> ur(-0.1, 0.1);
        Eigen::Matrix<double, 8, 1> ue;
        for (int i = 0; i < 8; ++i) ue(i) = ur(gen);
        const ElementMatrices em = q4_element(coords, D, ue);
        const double h = 1e-6;
        for (int j = 0; j < 8; ++j) {
            Eigen::Matrix<double, 8, 1> up = ue, um = ue;
            up(j) += h;
            um(j) -= h;
            const Eigen::VectorXd fd =
                (q4_element(coords, D, up).f_int - q4_element(coords, D, um).f_int) / (2 * h);
            CHECK((fd - em.k.col(j)).cwiseAbs().maxCoeff() <=
                  1e-6 * em.k.cwiseAbs().maxCoeff());
        }
    }

    SUBCASE("degenerate geometry is rejected") {
        auto bad = coords;
        bad[2] = {0.0, 0.0};  // collapses the element
        CHECK_THROWS_AS(q4_element(bad, D, Eigen::Matrix<double, 8, 1>::Zero()), AssemblyError);
    }
}

TEST_CASE("standard interface element") {
    const Mesh mesh = small_patch(1, 1);
    const CohesiveParams czm = table_params(1e6, 1e6);
    const DiscreteModel model = build_model(mesh, hta6376c(), czm);
    const InterfaceKinematics& kin = model.iface[0];

    SUBCASE("zero jump gives zero residual; rigid offset integrates exactly") {
        const std::array<SeparationState, 2> st{};
        const Eigen::Matrix<double, 8, 1> u = Eigen::Matrix<double, 8, 1>::Zero();
        const ElementMatrices em = interface_element_standard(kin, st, u, czm);
        CHECK(em.f_int.norm() == 0.0);

        // Rigid tangential offset of the top face: total force = alpha*len*dt
        Eigen::Matrix<double, 8, 1> ut = Eigen::Matrix<double, 8, 1>::Zero();
        const double dt = 1e-4;
        ut(4) = dt;  // top pair x-dofs
        ut(6) = dt;
        const ElementMatrices em2 = interface_element_standard(kin, st, ut, czm);
        const double fx_top = em2.f_int(4) + em2.f_int(6);
        CHECK(fx_top == doctest::Approx(czm.alpha_t0 * dt * kin.length).epsilon(1e-12));
        CHECK(em2.f_int(0) + em2.f_int(2) == doctest::Approx(-fx_top).epsilon(1e-12));
    }

    SUBCASE("fully damaged opening point is traction-free") {
        std::array<SeparationState, 2> st{};
        st[0].d_s = st[1].d_s = 1.0;
        Eigen::Matrix<double, 8, 1> u = Eigen::Matrix<double, 8, 1>::Zero();
        u(5) = u(7) = 1e-3;  // top face lifted
        const ElementMatrices em = interface_element_standard(kin, st, u, czm);
        CHECK(em.f_int.norm() == 0.0);
        CHECK(em.k.norm() == 0.0);
    }
}

TEST_CASE("stabilized interface element") {
    const Mesh mesh = small_patch(2, 1);
    const CohesiveParams czm = table_params(1e8, 1e8);

    SUBCASE("huge beta reproduces the standard element") {
        ModelOptions opts;
        opts.beta_override = 1e30;
        const DiscreteModel model = build_model(mesh, hta6376c(), czm, opts);
        std::mt19937 gen(31);
        std::uniform_real_distribution<double> ur(-1e-4, 1e-4);
        Eigen::VectorXd u(model.n_dofs);
        for (int i = 0; i < model.n_dofs; ++i) u(i) = ur(gen);

        for (size_t f = 0; f < model.iface.size(); ++f) {
            const InterfaceKinematics& kin = model.iface[f];
            std::array<SeparationState, 2> st{};
            st[0].d_s = 0.3;
            st[1].d_s = 0.7;
            Eigen::Matrix<double, 8, 1> ue, uu, ul;
            for (int i = 0; i < 8; ++i) {
                ue(i) = u(kin.dofs[i]);
                uu(i) = u(kin.dofs_upper[i]);
                ul(i) = u(kin.dofs_lower[i]);
            }
            const ElementMatrices std_em = interface_element_standard(kin, st, ue, czm);
            const ElementMatrices stab_em =
                interface_element_stabilized(kin, st, ue, uu, ul, czm);
            const double scale = std_em.k.cwiseAbs().maxCoeff();
            CHECK((stab_em.k.block<8, 8>(0, 0) - std_em.k).cwiseAbs().maxCoeff() <=
                  1e-12 * scale);
            CHECK(stab_em.k.block<8, 16>(0, 8).cwiseAbs().maxCoeff() <= 1e-12 * scale);
            CHECK((stab_em.f_int - std_em.f_int).cwiseAbs().maxCoeff() <=
                  1e-12 * std::max(1.0, std_em.f_int.cwiseAbs().maxCoeff()));
        }
    }

    SUBCASE("fully damaged opening point is traction-free") {
        const DiscreteModel model = build_model(mesh, hta6376c(), czm);
        const InterfaceKinematics& kin = model.iface[0];
        std::array<SeparationState, 2> st{};
        st[0].d_s = st[1].d_s = 1.0;
        Eigen::Matrix<double, 8, 1> ue = Eigen::Matrix<double, 8, 1>::Zero();
        ue(5) = ue(7) = 1e-3;  // opening
        const Eigen::Matrix<double, 8, 1> uu = Eigen::Matrix<double, 8, 1>::Zero();
        const ElementMatrices em = interface_element_stabilized(kin, st, ue, uu, uu, czm);
        // S = I at d = 1 under opening: the consistency weight (I-S)
        // vanishes and the stability term carries zero secant stiffness.
        CHECK(em.f_int.norm() == 0.0);
        CHECK(em.k.norm() == 0.0);
    }
}

TEST_CASE("global stiffness matches finite differences with frozen damage") {
    const CohesiveParams czm = table_params(1e6, 1e6);
    std::mt19937 gen(41);
    std::uniform_real_distribution<double> ur(-1e-3, 1e-3);

    for (int nx : {1, 2}) {  // 2-element and 8-element meshes
        const Mesh mesh = small_patch(nx, 1);
        const DiscreteModel model = build_model(mesh, hta6376c(), czm);
        Eigen::VectorXd u(model.n_dofs);
        for (int i = 0; i < model.n_dofs; ++i) u(i) = ur(gen);

        std::vector<SeparationState> states(model.states_per_model());
        for (size_t i = 0; i < states.size(); ++i) states[i].d_s = 0.1 * (i % 7);

        CHECK(max_fd_error(model, u, states, Formulation::standard) < 1e-6);
        CHECK(max_fd_error(model, u, states, Formulation::stabilized) < 1e-6);
    }
}

TEST_CASE("assembled operator properties") {
    const CohesiveParams czm = table_params(1e6, 1e6);
    const Mesh mesh = small_patch(2, 1);
    const DiscreteModel model = build_model(mesh, hta6376c(), czm);
    const Eigen::VectorXd u0 = Eigen::VectorXd::Zero(model.n_dofs);
    const auto states = initial_states(model);

    SUBCASE("free-floating patch has exactly 3 rigid modes") {
        const GlobalSystem sys = assemble(model, u0, states, Formulation::standard);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(Eigen::MatrixXd(sys.K));
        const double scale = eig.eigenvalues().cwiseAbs().maxCoeff();
        int zero_modes = 0;
        for (int i = 0; i < model.n_dofs; ++i)
            if (std::abs(eig.eigenvalues()(i)) < 1e-12 * scale) ++zero_modes;
        CHECK(zero_modes == 3);
    }

    SUBCASE("standard vs stabilized agree entrywise for huge beta") {
        ModelOptions opts;
        opts.beta_override = 1e30;
        const DiscreteModel model_b = build_model(mesh, hta6376c(), czm, opts);
        std::mt19937 gen(43);
        std::uniform_real_distribution<double> ur(-1e-4, 1e-4);
        Eigen::VectorXd u(model.n_dofs);
        for (int i = 0; i < model.n_dofs; ++i) u(i) = ur(gen);
        const auto trial = update_states(model, u, states);

        const Eigen::MatrixXd Ks =
            Eigen::MatrixXd(assemble(model, u, trial, Formulation::standard).K);
        const Eigen::MatrixXd Kb =
            Eigen::MatrixXd(assemble(model_b, u, trial, Formulation::stabilized).K);
        CHECK((Ks - Kb).cwiseAbs().maxCoeff() <= 1e-10 * Ks.cwiseAbs().maxCoeff());
    }

    SUBCASE("continuum block symmetric, asymmetry confined to interface rows") {
        std::mt19937 gen(47);
        std::uniform_real_distribution<double> ur(-1e-4, 1e-4);
        Eigen::VectorXd u(model.n_dofs);
        for (int i = 0; i < model.n_dofs; ++i) u(i) = ur(gen);
        const auto trial = update_states(model, u, states);
        const Eigen::MatrixXd K =
            Eigen::MatrixXd(assemble(model, u, trial, Formulation::stabilized).K);

        std::vector<bool> iface_dof(model.n_dofs, false);
        for (const auto& kin : model.iface)
            for (int d : kin.dofs) iface_dof[d] = true;

        const double tol = 1e-12 * K.cwiseAbs().maxCoeff();
        int asym = 0;
        for (int i = 0; i < model.n_dofs; ++i)
            for (int j = i + 1; j < model.n_dofs; ++j)
                if (std::abs(K(i, j) - K(j, i)) > tol) {
                    ++asym;
                    CHECK((iface_dof[i] || iface_dof[j]));
                }
        CHECK(asym > 0);  // the stabilized form is genuinely unsymmetric
    }

    SUBCASE("dimension mismatch is fatal") {
        Eigen::VectorXd bad = Eigen::VectorXd::Zero(model.n_dofs + 2);
        CHECK_THROWS_AS(assemble(model, bad, states, Formulation::standard), AssemblyError);
    }
}

TEST_CASE("assembly is bitwise reproducible across worker counts") {
    const CohesiveParams czm = table_params(1e6, 1e6);
    const Mesh mesh = small_patch(6, 3);
    const DiscreteModel model = build_model(mesh, hta6376c(), czm);
    std::mt19937 gen(53);
    std::uniform_real_distribution<double> ur(-1e-3, 1e-3);
    Eigen::VectorXd u(model.n_dofs);
    for (int i = 0; i < model.n_dofs; ++i) u(i) = ur(gen);
    const auto states = update_states(model, u, initial_states(model));

    setenv("DELAM_FEM_THREADS", "1", 1);
    const GlobalSystem s1 = assemble(model, u, states, Formulation::stabilized);
    setenv("DELAM_FEM_THREADS", "4", 1);
    const GlobalSystem s4 = assemble(model, u, states, Formulation::stabilized);
    unsetenv("DELAM_FEM_THREADS");

    CHECK(s1.f_int == s4.f_int);
    const Eigen::MatrixXd K1 = Eigen::MatrixXd(s1.K);
    const Eigen::MatrixXd K4 = Eigen::MatrixXd(s4.K);
    CHECK(K1 == K4);
}
