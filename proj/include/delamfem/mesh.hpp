#pragma once

#include "delamfem/cohesive.hpp"
#include "delamfem/material.hpp"

#include <array>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace delamfem {

class GeometryError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Bilinear quadrilateral continuum element: counter-clockwise connectivity,
/// ply orientation and subdomain tag (1 = upper, 2 = lower).
struct Q4Element {
    std::array<int, 4> nodes{};
    PlyAngle ply = PlyAngle::deg0;
    int subdomain = 1;
};

/// Zero-thickness 4-node interface element. Bottom pair (n1,n2) lies on the
/// lower (subdomain 2) face, top pair (n3,n4) on the upper face; n3 is
/// paired with n1 and n4 with n2 (identical reference coordinates). The
/// local tangent runs n1 -> n2; the normal points from the lower side to
/// the upper side.
struct InterfaceElement {
    std::array<int, 4> nodes{};  ///< n1, n2 bottom; n3, n4 top
    int neighbor_upper = -1;     ///< Q4 element index on the subdomain-1 side
    int neighbor_lower = -1;     ///< Q4 element index on the subdomain-2 side
    bool precracked = false;
};

enum class MeshKind { patch_horizontal, patch_inclined, dcb, enf, frmm };

/// Input for the deterministic mesh builders. Lengths in mm.
struct GeometrySpec {
    MeshKind kind = MeshKind::patch_horizontal;
    double L = 1.0;
    double H = 1.0;
    double a0 = 0.0;               ///< pre-crack length (beams only)
    int nx = 10;                   ///< element columns
    int ny_per_arm = 5;            ///< element rows per arm / subdomain
    double perturb_fraction = 0.0; ///< vertical interface perturbation, fraction of element length
    std::uint64_t rng_seed = 0;
};

struct Mesh {
    std::vector<std::array<double, 2>> nodes;
    std::vector<Q4Element> q4_elements;
    std::vector<InterfaceElement> interface_elements;
    std::map<std::string, std::vector<int>> boundary_sets;
    std::vector<std::string> warnings;

    int node_count() const { return static_cast<int>(nodes.size()); }

    /// Area of a Q4 element (shoelace over corners).
    double q4_area(int elem) const;

    /// Reference length of an interface element (distance between the end
    /// node pairs).
    double interface_length(int elem) const;

    /// Throws GeometryError if any invariant is violated: paired interface
    /// nodes not coincident, non-positive Q4 Jacobians, missing neighbor
    /// links, or neighbors on the same subdomain side.
    void validate() const;
};

/// Square patch meshes (horizontal or 140.4 deg inclined interface).
/// Horizontal: nx columns, ny_per_arm rows per half, interface at
/// mid-height. Inclined: the interface is the chord through the plate
/// center at 140.4 deg to X1; rows blend linearly between the interface
/// and the straight outer edges.
Mesh build_patch(const GeometrySpec& spec);

/// Displaces interior interface node pairs vertically by seeded uniform
/// random offsets within +/- fraction*element_length; end pairs fixed.
/// Zero-thickness pairing is preserved; throws GeometryError if an element
/// Jacobian becomes non-positive.
Mesh perturb_interface(const Mesh& mesh, double fraction, std::uint64_t seed);

/// Layered beam meshes (DCB/ENF/FRMM): two arms of H/2 each, interface
/// along the full length, elements with X1 < a0 flagged precracked, plus
/// the per-test boundary sets.
Mesh build_beam(const GeometrySpec& spec);

/// Plain-text mesh listing (one record per line) for external
/// visualization; format documented in the README.
std::string dump_mesh(const Mesh& mesh);

/// Cohesive process-zone length estimates and the element-size rule
/// ("at least three interface elements within the process zone"); returns
/// warning strings when the rule is violated.
std::vector<std::string> process_zone_warnings(const Mesh& mesh,
                                               const LaminaProperties& mat,
                                               const CohesiveParams& czm);

} // namespace delamfem
