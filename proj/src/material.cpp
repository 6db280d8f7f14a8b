#include "delamfem/material.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

namespace delamfem {

void LaminaProperties::validate() const {
    const double moduli[] = {E11, E22, E33, G12, G13, G23};
    for (double m : moduli) {
        if (!(m > 0.0))
            throw InvalidMaterialError("lamina moduli must be positive");
    }
    const double nu21 = nu12 * E22 / E11;
    const double p = nu12 * nu21;
    if (!(p >= 0.0 && p < 1.0))
        throw InvalidMaterialError("nu12*nu21 outside [0,1)");

    auto close = [](double a, double b) { return std::abs(a - b) <= 1e-9 * std::max(std::abs(a), std::abs(b)); };
    if (!close(E22, E33) || !close(G12, G13) || !close(nu12, nu13))
        throw InvalidMaterialError("transverse isotropy requires E22=E33, G12=G13, nu12=nu13");
}

LaminaProperties hta6376c() {
    LaminaProperties p;
    p.E11 = 1.2e5;
    p.E22 = 1.05e4;
    p.E33 = 1.05e4;
    p.G12 = 5.52e3;
    p.G13 = 5.52e3;
    p.G23 = 3.48e3;
    p.nu12 = 0.3;
    p.nu13 = 0.3;
    p.nu23 = 0.51;
    return p;
}

PlaneStressMatrix reduced_stiffness(const LaminaProperties& props, PlyAngle angle) {
    props.validate();
    PlaneStressMatrix out;
    if (angle == PlyAngle::deg0) {
        // Fibers along X1: orthotropic plane stress with the 1-2 constants.
        const double nu21 = props.nu12 * props.E22 / props.E11;
        const double den = 1.0 - props.nu12 * nu21;
        out.d(0, 0) = props.E11 / den;
        out.d(1, 1) = props.E22 / den;
        out.d(0, 1) = out.d(1, 0) = props.nu12 * props.E22 / den;
        out.d(2, 2) = props.G12;
    } else {
        // Fibers along X3: the X1-X2 plane is the isotropy plane.
        const double E = props.E22;
        const double nu = props.nu23;
        const double den = 1.0 - nu * nu;
        out.d(0, 0) = out.d(1, 1) = E / den;
        out.d(0, 1) = out.d(1, 0) = nu * E / den;
        out.d(2, 2) = props.G23;
    }

    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(out.d);
    if (eig.eigenvalues().minCoeff() <= 0.0)
        throw InvalidMaterialError("reduced stiffness is not positive definite");
    return out;
}

double spectral_norm(const PlaneStressMatrix& D) {
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(D.d);
    return eig.eigenvalues().cwiseAbs().maxCoeff();
}

} // namespace delamfem
