#pragma once

#include <Eigen/Dense>
#include <stdexcept>

namespace delamfem {

/// Thrown when elastic constants fail their admissibility checks or the
/// derived plane-stress matrix is not positive definite.
class InvalidMaterialError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// In-plane fiber orientation of a ply. Only the two layups used by the
/// benchmarks are supported: fibers along X1 (0 deg) or along the
/// out-of-plane X3 axis (90 deg), which is isotropic in the X1-X2 plane.
enum class PlyAngle { deg0, deg90 };

/// Transversely isotropic lamina constants. Units: N/mm^2 for moduli,
/// Poisson ratios dimensionless. The 2-3 plane is the isotropy plane
/// (E22 = E33, G12 = G13, nu12 = nu13).
struct LaminaProperties {
    double E11 = 0.0;
    double E22 = 0.0;
    double E33 = 0.0;
    double G12 = 0.0;
    double G13 = 0.0;
    double G23 = 0.0;
    double nu12 = 0.0;
    double nu13 = 0.0;
    double nu23 = 0.0;

    /// Throws InvalidMaterialError unless all moduli are positive,
    /// 0 < nu12*nu21 < 1, and the transverse-isotropy ties hold.
    void validate() const;
};

/// HTA/6376C carbon/epoxy defaults (the built-in material).
LaminaProperties hta6376c();

/// Reduced plane-stress stiffness in Voigt order (s11, s22, s12) vs
/// (e11, e22, 2*e12). Symmetric positive definite by construction.
struct PlaneStressMatrix {
    Eigen::Matrix3d d = Eigen::Matrix3d::Zero();
};

/// Plane-stress reduction of the lamina constants for a given ply angle.
/// 0 deg uses (E11, E22, nu12, G12); 90 deg is isotropic in-plane with
/// (E22, nu23, G23). Throws InvalidMaterialError if the result is not SPD.
PlaneStressMatrix reduced_stiffness(const LaminaProperties& props, PlyAngle angle);

/// Largest eigenvalue magnitude of the (symmetric) Voigt matrix.
double spectral_norm(const PlaneStressMatrix& D);

} // namespace delamfem
