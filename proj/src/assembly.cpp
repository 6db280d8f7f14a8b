#include "delamfem/assembly.hpp"

#include <cmath>
#include <cstdlib>
#include <thread>

namespace delamfem {

namespace {

struct ShapeQ4 {
    Eigen::Matrix<double, 4, 1> N;
    Eigen::Matrix<double, 4, 2> dN;  ///< derivatives wrt (xi, eta)
};

ShapeQ4 shape_q4(double xi, double eta) {
    ShapeQ4 s;
    s.N << (1 - xi) * (1 - eta) / 4, (1 + xi) * (1 - eta) / 4, (1 + xi) * (1 + eta) / 4,
        (1 - xi) * (1 + eta) / 4;
    s.dN << -(1 - eta) / 4, -(1 - xi) / 4,
            (1 - eta) / 4, -(1 + xi) / 4,
            (1 + eta) / 4, (1 + xi) / 4,
            -(1 + eta) / 4, (1 - xi) / 4;
    return s;
}

/// B matrix (3x8) and Jacobian determinant at a parametric point.
double b_matrix(const std::array<std::array<double, 2>, 4>& coords, double xi, double eta,
                Eigen::Matrix<double, 3, 8>& B) {
    const ShapeQ4 s = shape_q4(xi, eta);
    Eigen::Matrix2d J = Eigen::Matrix2d::Zero();
    for (int a = 0; a < 4; ++a) {
        J(0, 0) += s.dN(a, 0) * coords[a][0];
        J(0, 1) += s.dN(a, 0) * coords[a][1];
        J(1, 0) += s.dN(a, 1) * coords[a][0];
        J(1, 1) += s.dN(a, 1) * coords[a][1];
    }
    const double det = J.determinant();
    if (det <= 0.0)
        throw AssemblyError("singular or inverted Q4 Jacobian");
    const Eigen::Matrix2d Jinv = J.inverse();
    B.setZero();
    for (int a = 0; a < 4; ++a) {
        const double dNdx = Jinv(0, 0) * s.dN(a, 0) + Jinv(0, 1) * s.dN(a, 1);
        const double dNdy = Jinv(1, 0) * s.dN(a, 0) + Jinv(1, 1) * s.dN(a, 1);
        B(0, 2 * a) = dNdx;
        B(1, 2 * a + 1) = dNdy;
        B(2, 2 * a) = dNdy;
        B(2, 2 * a + 1) = dNdx;
    }
    return det;
}

std::array<std::array<double, 2>, 4> elem_coords(const Mesh& mesh, const Q4Element& e) {
    std::array<std::array<double, 2>, 4> c;
    for (int a = 0; a < 4; ++a) c[a] = mesh.nodes[e.nodes[a]];
    return c;
}

/// Parametric coordinates of a physical point inside a bilinear quad
/// (Newton on the isoparametric map).
Eigen::Vector2d inverse_bilinear(const std::array<std::array<double, 2>, 4>& coords, double x,
                                 double y) {
    Eigen::Vector2d xi(0.0, 0.0);
    for (int it = 0; it < 50; ++it) {
        const ShapeQ4 s = shape_q4(xi(0), xi(1));
        Eigen::Vector2d r(-x, -y);
        Eigen::Matrix2d J = Eigen::Matrix2d::Zero();
        for (int a = 0; a < 4; ++a) {
            r(0) += s.N(a) * coords[a][0];
            r(1) += s.N(a) * coords[a][1];
            J(0, 0) += s.dN(a, 0) * coords[a][0];
            J(0, 1) += s.dN(a, 1) * coords[a][0];
            J(1, 0) += s.dN(a, 0) * coords[a][1];
            J(1, 1) += s.dN(a, 1) * coords[a][1];
        }
        const Eigen::Vector2d step = J.partialPivLu().solve(r);
        xi -= step;
        if (step.cwiseAbs().maxCoeff() < 1e-14) break;
    }
    return xi;
}

int worker_count(std::size_t n_items) {
    int n = 0;
    if (const char* env = std::getenv("DELAM_FEM_THREADS")) n = std::atoi(env);
    if (n <= 0) n = static_cast<int>(std::thread::hardware_concurrency());
    if (n < 1) n = 1;
    return static_cast<int>(std::min<std::size_t>(n, std::max<std::size_t>(n_items, 1)));
}

template <typename F>
void parallel_for(std::size_t n, F&& body) {
    const int workers = worker_count(n);
    if (workers == 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::vector<std::thread> pool;
    const std::size_t chunk = (n + workers - 1) / workers;
    for (int w = 0; w < workers; ++w) {
        const std::size_t lo = w * chunk, hi = std::min(n, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([lo, hi, &body] {
            for (std::size_t i = lo; i < hi; ++i) body(i);
        });
    }
    for (auto& t : pool) t.join();
}

Eigen::Matrix<double, 8, 1> gather(const Eigen::VectorXd& u, const std::array<int, 8>& dofs) {
    Eigen::Matrix<double, 8, 1> v;
    for (int i = 0; i < 8; ++i) v(i) = u(dofs[i]);
    return v;
}

/// Local separation at an interface integration point, from displacement.
void local_jump(const InterfaceKinematics& kin, const InterfaceGaussPoint& g,
                const Eigen::Matrix<double, 8, 1>& u_elem, double& delta_t, double& delta_n) {
    const Eigen::Vector2d jump_loc = kin.rot * (g.jump * u_elem);
    delta_t = jump_loc(0);
    delta_n = jump_loc(1);
}

SeparationState eval_state(const InterfaceKinematics& kin, const InterfaceGaussPoint& g,
                           const Eigen::Matrix<double, 8, 1>& u_elem, const SeparationState& s) {
    SeparationState e = s;
    local_jump(kin, g, u_elem, e.delta_t, e.delta_n);
    return e;
}

/// Weighted average bulk stress (Voigt) at an interface integration point.
Eigen::Vector3d weighted_stress(const InterfaceKinematics& kin, const InterfaceGaussPoint& gp,
                                const Eigen::Matrix<double, 8, 1>& u_upper,
                                const Eigen::Matrix<double, 8, 1>& u_lower) {
    return kin.stab.gamma1 * (kin.D_upper * (gp.B_upper * u_upper)) +
           kin.stab.gamma2 * (kin.D_lower * (gp.B_lower * u_lower));
}

/// Branch-resolved point data for the stabilized form.
struct StabPointEval {
    Diag2 k_sec;   ///< secant stiffness with the resolved normal branch
    Diag2 S;       ///< stabilization matrix consistent with k_sec
    Traction2 t;   ///< law traction with the resolved normal branch
};

/// The tensile/contact branch is selected by the sign of the augmented
/// normal traction (1-Sc)*sigma_n + Sc*alpha_n*delta_n rather than the bare
/// separation sign: this keeps the stabilized residual continuous across
/// the transition (the weighted bulk stress does not vanish at delta_n = 0
/// on damaged points) and reduces to the Macaulay-bracket branch as
/// beta -> infinity.
StabPointEval stabilized_point(const SeparationState& s, const CohesiveParams& czm,
                               const StabilizationData& stab, double sigma_n_loc) {
    const double S_c = stab.beta_n / (czm.alpha_n0 + stab.beta_n);
    const double t_aug = (1.0 - S_c) * sigma_n_loc + S_c * czm.alpha_n0 * s.delta_n;
    const bool contact = t_aug < 0.0;

    StabPointEval e;
    e.k_sec.tt = (1.0 - s.d_s) * czm.alpha_t0;
    e.k_sec.nn = contact ? czm.alpha_n0 : (1.0 - s.d_s) * czm.alpha_n0;
    e.S.tt = stab.beta_t / (e.k_sec.tt + stab.beta_t);
    e.S.nn = stab.beta_n / (e.k_sec.nn + stab.beta_n);
    e.t.t_t = e.k_sec.tt * s.delta_t;
    e.t.t_n = e.k_sec.nn * s.delta_n;
    return e;
}

} // namespace

ElementMatrices q4_element(const std::array<std::array<double, 2>, 4>& coords,
                           const PlaneStressMatrix& D, const Eigen::Matrix<double, 8, 1>& u_elem) {
    ElementMatrices out;
    out.k = Eigen::MatrixXd::Zero(8, 8);
    const double g = 1.0 / std::sqrt(3.0);
    const double pts[4][2] = {{-g, -g}, {g, -g}, {g, g}, {-g, g}};
    Eigen::Matrix<double, 3, 8> B;
    for (const auto& p : pts) {
        const double det = b_matrix(coords, p[0], p[1], B);
        out.k += det * B.transpose() * D.d * B;
    }
    out.f_int = out.k * u_elem;
    return out;
}

Eigen::Vector3d q4_stress(const std::array<std::array<double, 2>, 4>& coords,
                          const PlaneStressMatrix& D, const Eigen::Matrix<double, 8, 1>& u_elem,
                          double xi, double eta) {
    Eigen::Matrix<double, 3, 8> B;
    b_matrix(coords, xi, eta, B);
    return D.d * (B * u_elem);
}

std::vector<std::array<Eigen::Vector3d, 4>> bulk_gauss_stresses(const DiscreteModel& model,
                                                                const Eigen::VectorXd& u) {
    const double g = 1.0 / std::sqrt(3.0);
    const double pts[4][2] = {{-g, -g}, {g, -g}, {g, g}, {-g, g}};
    std::vector<std::array<Eigen::Vector3d, 4>> out(model.mesh->q4_elements.size());
    for (size_t e = 0; e < out.size(); ++e) {
        const auto& q = model.mesh->q4_elements[e];
        const auto coords = elem_coords(*model.mesh, q);
        const auto ue = gather(u, model.q4_dofs[e]);
        for (int k = 0; k < 4; ++k)
            out[e][k] = q4_stress(coords, model.ply_matrix(q.ply), ue, pts[k][0], pts[k][1]);
    }
    return out;
}

DiscreteModel build_model(const Mesh& mesh, const LaminaProperties& mat, const CohesiveParams& czm,
                          const ModelOptions& opts) {
    DiscreteModel m;
    m.mesh = &mesh;
    m.D_of_ply[0] = reduced_stiffness(mat, PlyAngle::deg0);
    m.D_of_ply[1] = reduced_stiffness(mat, PlyAngle::deg90);
    m.czm = czm;
    m.integration = opts.integration;
    m.n_dofs = 2 * mesh.node_count();

    m.q4_stiffness.resize(mesh.q4_elements.size());
    m.q4_dofs.resize(mesh.q4_elements.size());
    for (size_t e = 0; e < mesh.q4_elements.size(); ++e) {
        const auto& q = mesh.q4_elements[e];
        const Eigen::Matrix<double, 8, 1> zero = Eigen::Matrix<double, 8, 1>::Zero();
        m.q4_stiffness[e] = q4_element(elem_coords(mesh, q), m.ply_matrix(q.ply), zero).k;
        for (int a = 0; a < 4; ++a) {
            m.q4_dofs[e][2 * a] = 2 * q.nodes[a];
            m.q4_dofs[e][2 * a + 1] = 2 * q.nodes[a] + 1;
        }
    }

    m.iface.resize(mesh.interface_elements.size());
    for (size_t f = 0; f < mesh.interface_elements.size(); ++f) {
        const auto& fe = mesh.interface_elements[f];
        InterfaceKinematics& kin = m.iface[f];
        kin.precracked = fe.precracked;

        const auto& p1 = mesh.nodes[fe.nodes[0]];
        const auto& p2 = mesh.nodes[fe.nodes[1]];
        kin.length = std::hypot(p2[0] - p1[0], p2[1] - p1[1]);
        if (!(kin.length > 0.0))
            throw AssemblyError("degenerate interface element " + std::to_string(f));
        const double tx = (p2[0] - p1[0]) / kin.length;
        const double ty = (p2[1] - p1[1]) / kin.length;
        // normal = tangent rotated +90 deg; must point into the upper subdomain
        const double nx = -ty, ny = tx;
        kin.rot << tx, ty, nx, ny;

        if (fe.neighbor_upper < 0 || fe.neighbor_lower < 0)
            throw AssemblyError("interface element " + std::to_string(f) + " missing neighbor link");
        const auto& up = mesh.q4_elements[fe.neighbor_upper];
        const auto& lo = mesh.q4_elements[fe.neighbor_lower];
        const auto up_coords = elem_coords(mesh, up);
        const auto lo_coords = elem_coords(mesh, lo);
        {
            double cx = 0, cy = 0;
            for (const auto& c : up_coords) cx += c[0] / 4, cy += c[1] / 4;
            const double mx = (p1[0] + p2[0]) / 2, my = (p1[1] + p2[1]) / 2;
            if ((cx - mx) * nx + (cy - my) * ny <= 0.0)
                throw AssemblyError("interface normal does not point into the upper subdomain");
        }

        for (int a = 0; a < 4; ++a) {
            kin.dofs[2 * a] = 2 * fe.nodes[a];
            kin.dofs[2 * a + 1] = 2 * fe.nodes[a] + 1;
            kin.dofs_upper[2 * a] = 2 * up.nodes[a];
            kin.dofs_upper[2 * a + 1] = 2 * up.nodes[a] + 1;
            kin.dofs_lower[2 * a] = 2 * lo.nodes[a];
            kin.dofs_lower[2 * a + 1] = 2 * lo.nodes[a] + 1;
        }
        kin.D_upper = m.ply_matrix(up.ply).d;
        kin.D_lower = m.ply_matrix(lo.ply).d;

        const double xi_g =
            (opts.integration == InterfaceIntegration::gauss) ? 1.0 / std::sqrt(3.0) : 1.0;
        for (int g = 0; g < 2; ++g) {
            InterfaceGaussPoint& gp = kin.gp[g];
            const double xi = (g == 0) ? -xi_g : xi_g;
            const double N1 = (1.0 - xi) / 2.0, N2 = (1.0 + xi) / 2.0;
            gp.x1 = N1 * p1[0] + N2 * p2[0];
            gp.x2 = N1 * p1[1] + N2 * p2[1];
            gp.weight_len = kin.length / 2.0;

            gp.jump.setZero();
            gp.jump(0, 0) = -N1;
            gp.jump(1, 1) = -N1;
            gp.jump(0, 2) = -N2;
            gp.jump(1, 3) = -N2;
            gp.jump(0, 4) = N1;
            gp.jump(1, 5) = N1;
            gp.jump(0, 6) = N2;
            gp.jump(1, 7) = N2;

            // The interface point maps onto an edge of each neighbor where
            // bilinear stresses are polluted by parasitic shear under
            // bending; the neighbor stress entering the weighted average is
            // sampled at the mapped position on the element mid line
            // (toward the optimal stress point of the Q4).
            auto pull_to_mid = [](Eigen::Vector2d q) {
                if (std::abs(q(1)) > 0.999) q(1) = 0.0;
                else if (std::abs(q(0)) > 0.999) q(0) = 0.0;
                return q;
            };
            const Eigen::Vector2d pu = pull_to_mid(inverse_bilinear(up_coords, gp.x1, gp.x2));
            const Eigen::Vector2d pl = pull_to_mid(inverse_bilinear(lo_coords, gp.x1, gp.x2));
            b_matrix(up_coords, pu(0), pu(1), gp.B_upper);
            b_matrix(lo_coords, pl(0), pl(1), gp.B_lower);

            gp.stress_to_traction << nx, 0.0, ny,
                                     0.0, ny, nx;
        }

        const double area_up = mesh.q4_area(fe.neighbor_upper);
        const double area_lo = mesh.q4_area(fe.neighbor_lower);
        const PlaneStressMatrix& D_up = m.ply_matrix(up.ply);
        const PlaneStressMatrix& D_lo = m.ply_matrix(lo.ply);
        const InterfaceWeights w = interface_weights(D_up, D_lo, area_up, area_lo);
        kin.stab.gamma1 = w.gamma1;
        kin.stab.gamma2 = w.gamma2;
        const double beta = opts.beta_override ? *opts.beta_override
                                               : stabilization_parameters(D_up, D_lo, area_up,
                                                                          area_lo, w.gamma1,
                                                                          w.gamma2, kin.length);
        kin.stab.beta_n = kin.stab.beta_t = beta;
    }
    return m;
}

std::vector<SeparationState> initial_states(const DiscreteModel& model) {
    std::vector<SeparationState> states(model.states_per_model());
    for (size_t f = 0; f < model.iface.size(); ++f) {
        if (model.iface[f].precracked) {
            for (int g = 0; g < 2; ++g) {
                states[2 * f + g].precracked = true;
                states[2 * f + g].d_s = 1.0;
            }
        }
    }
    return states;
}

std::vector<SeparationState> update_states(const DiscreteModel& model, const Eigen::VectorXd& u,
                                           const std::vector<SeparationState>& committed) {
    std::vector<SeparationState> out(committed.size());
    for (size_t f = 0; f < model.iface.size(); ++f) {
        const InterfaceKinematics& kin = model.iface[f];
        const auto u_elem = gather(u, kin.dofs);
        for (int g = 0; g < 2; ++g) {
            double dt, dn;
            local_jump(kin, kin.gp[g], u_elem, dt, dn);
            out[2 * f + g] = update_history(committed[2 * f + g], dn, dt, model.czm);
        }
    }
    return out;
}

ElementMatrices interface_element_standard(const InterfaceKinematics& kin,
                                           const std::array<SeparationState, 2>& states,
                                           const Eigen::Matrix<double, 8, 1>& u_elem,
                                           const CohesiveParams& czm) {
    ElementMatrices out;
    out.k = Eigen::MatrixXd::Zero(8, 8);
    out.f_int = Eigen::VectorXd::Zero(8);
    out.row_dofs.assign(kin.dofs.begin(), kin.dofs.end());
    out.col_dofs = out.row_dofs;

    for (int g = 0; g < 2; ++g) {
        const InterfaceGaussPoint& gp = kin.gp[g];
        const SeparationState s = eval_state(kin, gp, u_elem, states[g]);
        const Diag2 ks = secant_stiffness(s, czm);
        const Traction2 t = cohesive_traction(s, czm);

        const Eigen::Matrix<double, 2, 8> jl = kin.rot * gp.jump;  // dofs -> local jump
        const double w = gp.weight_len;
        out.k += w * jl.transpose() * Eigen::DiagonalMatrix<double, 2>(ks.tt, ks.nn) * jl;
        out.f_int += w * jl.transpose() * Eigen::Vector2d(t.t_t, t.t_n);
    }
    return out;
}

ElementMatrices interface_element_stabilized(const InterfaceKinematics& kin,
                                             const std::array<SeparationState, 2>& states,
                                             const Eigen::Matrix<double, 8, 1>& u_elem,
                                             const Eigen::Matrix<double, 8, 1>& u_upper,
                                             const Eigen::Matrix<double, 8, 1>& u_lower,
                                             const CohesiveParams& czm) {
    ElementMatrices out;
    out.k = Eigen::MatrixXd::Zero(8, 24);
    out.f_int = Eigen::VectorXd::Zero(8);
    out.row_dofs.assign(kin.dofs.begin(), kin.dofs.end());
    out.col_dofs.resize(24);
    for (int i = 0; i < 8; ++i) {
        out.col_dofs[i] = kin.dofs[i];
        out.col_dofs[8 + i] = kin.dofs_upper[i];
        out.col_dofs[16 + i] = kin.dofs_lower[i];
    }

    for (int g = 0; g < 2; ++g) {
        const InterfaceGaussPoint& gp = kin.gp[g];
        const SeparationState s = eval_state(kin, gp, u_elem, states[g]);

        const Eigen::Vector3d sig_avg = weighted_stress(kin, gp, u_upper, u_lower);
        const Eigen::Vector2d sig_n_loc = kin.rot * (gp.stress_to_traction * sig_avg);
        const StabPointEval pe = stabilized_point(s, czm, kin.stab, sig_n_loc(1));

        const Eigen::Matrix<double, 2, 8> jl = kin.rot * gp.jump;
        const double w = gp.weight_len;

        // Stability term S*alpha*delta, secant-linearized.
        out.k.block<8, 8>(0, 0) +=
            w * jl.transpose() *
            Eigen::DiagonalMatrix<double, 2>(pe.S.tt * pe.k_sec.tt, pe.S.nn * pe.k_sec.nn) * jl;
        out.f_int += w * jl.transpose() * Eigen::Vector2d(pe.S.tt * pe.t.t_t, pe.S.nn * pe.t.t_n);

        // Consistency term (I-S)<sigma>_gamma.n: residual from the current
        // neighbor stresses, stiffness from their linearization. The test
        // side is the jump alone, which makes the block unsymmetric.
        const Eigen::DiagonalMatrix<double, 2> ImS(1.0 - pe.S.tt, 1.0 - pe.S.nn);
        const Eigen::Matrix<double, 8, 2> cons_op = w * jl.transpose() * ImS;  // local input

        out.f_int += cons_op * sig_n_loc;

        out.k.block<8, 8>(0, 8) += cons_op * kin.rot *
            (kin.stab.gamma1 * gp.stress_to_traction * kin.D_upper * gp.B_upper);
        out.k.block<8, 8>(0, 16) += cons_op * kin.rot *
            (kin.stab.gamma2 * gp.stress_to_traction * kin.D_lower * gp.B_lower);
    }
    return out;
}

namespace {

struct ElementBlocks {
    std::vector<Eigen::Matrix<double, 8, 1>> q4_f;
    std::vector<ElementMatrices> iface;
};

// Per-element blocks computed in parallel into fixed slots, merged in
// element order: bitwise identical results for any worker count.
ElementBlocks compute_blocks(const DiscreteModel& model, const Eigen::VectorXd& u,
                             const std::vector<SeparationState>& states, Formulation form) {
    if (u.size() != model.n_dofs)
        throw AssemblyError("displacement vector size does not match dof count");
    if (states.size() != static_cast<size_t>(model.states_per_model()))
        throw AssemblyError("state vector size does not match integration point count");

    ElementBlocks blocks;
    blocks.q4_f.resize(model.q4_stiffness.size());
    parallel_for(blocks.q4_f.size(), [&](size_t e) {
        blocks.q4_f[e] = model.q4_stiffness[e] * gather(u, model.q4_dofs[e]);
    });

    blocks.iface.resize(model.iface.size());
    parallel_for(blocks.iface.size(), [&](size_t f) {
        const InterfaceKinematics& kin = model.iface[f];
        const std::array<SeparationState, 2> st{states[2 * f], states[2 * f + 1]};
        const auto u_elem = gather(u, kin.dofs);
        if (form == Formulation::standard) {
            blocks.iface[f] = interface_element_standard(kin, st, u_elem, model.czm);
        } else {
            blocks.iface[f] = interface_element_stabilized(kin, st, u_elem,
                                                           gather(u, kin.dofs_upper),
                                                           gather(u, kin.dofs_lower), model.czm);
        }
    });
    return blocks;
}

Eigen::VectorXd scatter_force(const DiscreteModel& model, const ElementBlocks& blocks) {
    Eigen::VectorXd f = Eigen::VectorXd::Zero(model.n_dofs);
    for (size_t e = 0; e < blocks.q4_f.size(); ++e) {
        const auto& dofs = model.q4_dofs[e];
        for (int i = 0; i < 8; ++i) f(dofs[i]) += blocks.q4_f[e](i);
    }
    for (const auto& blk : blocks.iface)
        for (size_t i = 0; i < blk.row_dofs.size(); ++i)
            f(blk.row_dofs[i]) += blk.f_int(static_cast<int>(i));
    return f;
}

} // namespace

GlobalSystem assemble(const DiscreteModel& model, const Eigen::VectorXd& u,
                      const std::vector<SeparationState>& states, Formulation form) {
    const ElementBlocks blocks = compute_blocks(model, u, states, form);

    GlobalSystem sys;
    sys.f_int = scatter_force(model, blocks);
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(blocks.q4_f.size() * 64 +
                  blocks.iface.size() * (form == Formulation::standard ? 64 : 192));

    for (size_t e = 0; e < blocks.q4_f.size(); ++e) {
        const auto& dofs = model.q4_dofs[e];
        const auto& k = model.q4_stiffness[e];
        for (int i = 0; i < 8; ++i)
            for (int j = 0; j < 8; ++j) trips.emplace_back(dofs[i], dofs[j], k(i, j));
    }
    for (const auto& blk : blocks.iface) {
        for (size_t i = 0; i < blk.row_dofs.size(); ++i)
            for (size_t j = 0; j < blk.col_dofs.size(); ++j)
                trips.emplace_back(blk.row_dofs[i], blk.col_dofs[j],
                                   blk.k(static_cast<int>(i), static_cast<int>(j)));
    }
    sys.K.resize(model.n_dofs, model.n_dofs);
    sys.K.setFromTriplets(trips.begin(), trips.end());
    return sys;
}

Eigen::VectorXd assemble_force(const DiscreteModel& model, const Eigen::VectorXd& u,
                               const std::vector<SeparationState>& states, Formulation form) {
    return scatter_force(model, compute_blocks(model, u, states, form));
}

Traction2 interface_traction(const DiscreteModel& model, const Eigen::VectorXd& u,
                             const SeparationState& state, int elem, int gp, Formulation form) {
    const InterfaceKinematics& kin = model.iface[elem];
    const InterfaceGaussPoint& g = kin.gp[gp];
    const SeparationState s = eval_state(kin, g, gather(u, kin.dofs), state);
    if (form == Formulation::standard) return cohesive_traction(s, model.czm);

    const Eigen::Vector3d sig_avg =
        weighted_stress(kin, g, gather(u, kin.dofs_upper), gather(u, kin.dofs_lower));
    const Eigen::Vector2d bulk_loc = kin.rot * (g.stress_to_traction * sig_avg);
    const StabPointEval pe = stabilized_point(s, model.czm, kin.stab, bulk_loc(1));
    Traction2 t;
    t.t_t = (1.0 - pe.S.tt) * bulk_loc(0) + pe.S.tt * pe.t.t_t;
    t.t_n = (1.0 - pe.S.nn) * bulk_loc(1) + pe.S.nn * pe.t.t_n;
    return t;
}

} // namespace delamfem
