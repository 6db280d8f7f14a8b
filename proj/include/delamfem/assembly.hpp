#pragma once

#include "delamfem/cohesive.hpp"
#include "delamfem/material.hpp"
#include "delamfem/mesh.hpp"

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <array>
#include <optional>
#include <stdexcept>
#include <vector>

namespace delamfem {

class AssemblyError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class Formulation { standard, stabilized };

/// 2-point quadrature along interface elements: Gauss (default) or
/// Newton-Cotes (nodal) sampling.
enum class InterfaceIntegration { gauss, newton_cotes };

/// Element stiffness + internal force with the global dof scatter maps.
/// Stabilized interface elements have rectangular k: rows are the jump
/// (test) dofs, columns extend over the neighbor continuum elements.
struct ElementMatrices {
    Eigen::MatrixXd k;
    Eigen::VectorXd f_int;
    std::vector<int> row_dofs;
    std::vector<int> col_dofs;
};

/// Fixed (reference-geometry) data for one interface integration point.
struct InterfaceGaussPoint {
    double x1 = 0.0, x2 = 0.0;              ///< physical location
    double weight_len = 0.0;                ///< quadrature weight * |J|
    Eigen::Matrix<double, 2, 8> jump;       ///< element dofs -> global jump (top-bottom)
    Eigen::Matrix<double, 3, 8> B_upper;    ///< neighbor strain-displacement at this point
    Eigen::Matrix<double, 3, 8> B_lower;
    Eigen::Matrix<double, 2, 3> stress_to_traction;  ///< Voigt stress -> sigma.n (global)
};

/// Per-interface-element kinematics and stabilization data, computed once
/// at setup (small strain, fixed geometry).
struct InterfaceKinematics {
    double length = 0.0;
    Eigen::Matrix2d rot;  ///< rows (tangent, normal): local = rot * global
    std::array<InterfaceGaussPoint, 2> gp;
    std::array<int, 8> dofs{};        ///< the 4 interface nodes' dofs
    std::array<int, 8> dofs_upper{};  ///< upper neighbor element dofs
    std::array<int, 8> dofs_lower{};
    Eigen::Matrix3d D_upper;  ///< neighbor ply constitutive matrices
    Eigen::Matrix3d D_lower;
    StabilizationData stab;
    bool precracked = false;
};

/// Discretized problem: cached continuum element stiffnesses, interface
/// kinematics, ply constitutive matrices, and cohesive parameters.
struct DiscreteModel {
    const Mesh* mesh = nullptr;
    PlaneStressMatrix D_of_ply[2];  ///< indexed by PlyAngle
    CohesiveParams czm;
    InterfaceIntegration integration = InterfaceIntegration::gauss;
    std::vector<Eigen::Matrix<double, 8, 8>> q4_stiffness;  ///< cached, geometry-fixed
    std::vector<std::array<int, 8>> q4_dofs;
    std::vector<InterfaceKinematics> iface;
    int n_dofs = 0;

    const PlaneStressMatrix& ply_matrix(PlyAngle a) const {
        return D_of_ply[a == PlyAngle::deg0 ? 0 : 1];
    }
    int states_per_model() const { return static_cast<int>(iface.size()) * 2; }
};

struct ModelOptions {
    std::optional<double> beta_override;  ///< explicit beta_n = beta_t for every element
    InterfaceIntegration integration = InterfaceIntegration::gauss;
};

/// Precomputes everything geometry-dependent: Q4 stiffnesses, interface
/// rotation/jump operators, neighbor B-matrices at the interface
/// integration points (inverse bilinear map), interface weights (Eq-21
/// style stiffness weighting) and the coercivity stabilization parameter
/// (or the explicit override).
DiscreteModel build_model(const Mesh& mesh, const LaminaProperties& mat,
                          const CohesiveParams& czm, const ModelOptions& opts = {});

/// Fresh per-integration-point states; precracked elements pinned at d_s=1.
std::vector<SeparationState> initial_states(const DiscreteModel& model);

/// Trial history update for the current displacement: jump evaluated per
/// integration point, irreversible update against the committed states.
std::vector<SeparationState> update_states(const DiscreteModel& model, const Eigen::VectorXd& u,
                                           const std::vector<SeparationState>& committed);

/// Single Q4 plane-stress element (bilinear, 2x2 Gauss): stiffness and
/// internal force for the given nodal displacements.
ElementMatrices q4_element(const std::array<std::array<double, 2>, 4>& coords,
                           const PlaneStressMatrix& D, const Eigen::Matrix<double, 8, 1>& u_elem);

/// Voigt stress (s11, s22, s12) of a Q4 element at a parametric point.
Eigen::Vector3d q4_stress(const std::array<std::array<double, 2>, 4>& coords,
                          const PlaneStressMatrix& D, const Eigen::Matrix<double, 8, 1>& u_elem,
                          double xi, double eta);

/// Stresses at the four Gauss points of every continuum element.
std::vector<std::array<Eigen::Vector3d, 4>> bulk_gauss_stresses(const DiscreteModel& model,
                                                                const Eigen::VectorXd& u);

/// Cohesive interface element under the standard weak form: secant
/// stiffness and internal force of the traction-separation term.
ElementMatrices interface_element_standard(const InterfaceKinematics& kin,
                                           const std::array<SeparationState, 2>& states,
                                           const Eigen::Matrix<double, 8, 1>& u_elem,
                                           const CohesiveParams& czm);

/// Stabilized weak form: stability term (secant-linearized) plus the
/// weighted-average-stress consistency term, linearized with respect to
/// the neighbor element displacements. The resulting block is unsymmetric.
ElementMatrices interface_element_stabilized(const InterfaceKinematics& kin,
                                             const std::array<SeparationState, 2>& states,
                                             const Eigen::Matrix<double, 8, 1>& u_elem,
                                             const Eigen::Matrix<double, 8, 1>& u_upper,
                                             const Eigen::Matrix<double, 8, 1>& u_lower,
                                             const CohesiveParams& czm);

struct GlobalSystem {
    Eigen::SparseMatrix<double> K;
    Eigen::VectorXd f_int;
};

/// Scatter-add of all element contributions. Element blocks are computed in
/// parallel (DELAM_FEM_THREADS workers, 0/unset = auto) into per-element
/// slots and merged in element order, so the result is bitwise reproducible
/// at any worker count.
GlobalSystem assemble(const DiscreteModel& model, const Eigen::VectorXd& u,
                      const std::vector<SeparationState>& states, Formulation form);

/// Internal force only (no stiffness scatter); same element order and
/// summation as assemble, bitwise identical to assemble(...).f_int.
Eigen::VectorXd assemble_force(const DiscreteModel& model, const Eigen::VectorXd& u,
                               const std::vector<SeparationState>& states, Formulation form);

/// Traction at an interface integration point as used by the active
/// formulation's residual: cohesive law value for the standard form, the
/// weighted-average expression for the stabilized form. Local components
/// (tangential, normal), opening/tension positive.
Traction2 interface_traction(const DiscreteModel& model, const Eigen::VectorXd& u,
                             const SeparationState& state, int elem, int gp, Formulation form);

} // namespace delamfem
