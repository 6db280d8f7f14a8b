#include "delamfem/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>
#include <set>
#include <sstream>

namespace delamfem {

namespace {

constexpr double kInclinedAngleDeg = 140.4;

double q4_jacobian(const Mesh& mesh, const Q4Element& e, double xi, double eta) {
    // dN/dxi, dN/deta of the bilinear quad at (xi, eta)
    const double dxi[4] = {-(1 - eta) / 4, (1 - eta) / 4, (1 + eta) / 4, -(1 + eta) / 4};
    const double det_[4] = {-(1 - xi) / 4, -(1 + xi) / 4, (1 + xi) / 4, (1 - xi) / 4};
    double j11 = 0, j12 = 0, j21 = 0, j22 = 0;
    for (int a = 0; a < 4; ++a) {
        const auto& p = mesh.nodes[e.nodes[a]];
        j11 += dxi[a] * p[0];
        j12 += dxi[a] * p[1];
        j21 += det_[a] * p[0];
        j22 += det_[a] * p[1];
    }
    return j11 * j22 - j12 * j21;
}

void check_jacobians(const Mesh& mesh) {
    const double g = 1.0 / std::sqrt(3.0);
    const double pts[4][2] = {{-g, -g}, {g, -g}, {g, g}, {-g, g}};
    for (size_t i = 0; i < mesh.q4_elements.size(); ++i) {
        for (const auto& p : pts) {
            if (q4_jacobian(mesh, mesh.q4_elements[i], p[0], p[1]) <= 0.0)
                throw GeometryError("non-positive Jacobian in Q4 element " + std::to_string(i));
        }
    }
}

// Two-block structured grid: nx columns, ny1 rows below the interface curve
// y_int(x), ny2 rows above, interface node row duplicated. Shared by the
// patch and beam builders.
template <typename F>
Mesh build_two_block(double L, double H, int nx, int ny1, int ny2, F y_int) {
    if (nx < 1 || ny1 < 1 || ny2 < 1)
        throw GeometryError("element counts must be >= 1");

    Mesh mesh;
    const int ncol = nx + 1;
    const int n_lower = ncol * (ny1 + 1);
    auto lower_id = [&](int i, int j) { return j * ncol + i; };
    auto upper_id = [&](int i, int j) { return n_lower + j * ncol + i; };

    // Blend rows between the straight outer edges and the interface curve;
    // the end rows are pinned exactly so duplicated interface nodes match
    // bitwise.
    for (int j = 0; j <= ny1; ++j)
        for (int i = 0; i <= ncol - 1; ++i) {
            const double x = L * i / nx;
            const double yi = y_int(x);
            mesh.nodes.push_back({x, j == ny1 ? yi : yi * j / ny1});
        }
    for (int j = 0; j <= ny2; ++j)
        for (int i = 0; i <= ncol - 1; ++i) {
            const double x = L * i / nx;
            const double yi = y_int(x);
            mesh.nodes.push_back({x, j == ny2 ? H : yi + (H - yi) * j / ny2});
        }

    for (int j = 0; j < ny1; ++j)
        for (int i = 0; i < nx; ++i) {
            Q4Element e;
            e.nodes = {lower_id(i, j), lower_id(i + 1, j), lower_id(i + 1, j + 1), lower_id(i, j + 1)};
            e.subdomain = 2;
            mesh.q4_elements.push_back(e);
        }
    const int upper_elem_base = static_cast<int>(mesh.q4_elements.size());
    for (int j = 0; j < ny2; ++j)
        for (int i = 0; i < nx; ++i) {
            Q4Element e;
            e.nodes = {upper_id(i, j), upper_id(i + 1, j), upper_id(i + 1, j + 1), upper_id(i, j + 1)};
            e.subdomain = 1;
            mesh.q4_elements.push_back(e);
        }

    for (int i = 0; i < nx; ++i) {
        InterfaceElement f;
        f.nodes = {lower_id(i, ny1), lower_id(i + 1, ny1), upper_id(i, 0), upper_id(i + 1, 0)};
        f.neighbor_lower = (ny1 - 1) * nx + i;
        f.neighbor_upper = upper_elem_base + i;
        mesh.interface_elements.push_back(f);
    }

    auto& sets = mesh.boundary_sets;
    for (int i = 0; i <= nx; ++i) {
        sets["bottom"].push_back(lower_id(i, 0));
        sets["top"].push_back(upper_id(i, ny2));
    }
    for (int j = 0; j <= ny1; ++j) {
        sets["left"].push_back(lower_id(0, j));
        sets["right"].push_back(lower_id(nx, j));
        sets["boundary_lower"].push_back(lower_id(0, j));
        sets["boundary_lower"].push_back(lower_id(nx, j));
    }
    for (int j = 0; j <= ny2; ++j) {
        sets["left"].push_back(upper_id(0, j));
        sets["right"].push_back(upper_id(nx, j));
        sets["boundary_upper"].push_back(upper_id(0, j));
        sets["boundary_upper"].push_back(upper_id(nx, j));
    }
    for (int i = 1; i < nx; ++i) {
        sets["boundary_lower"].push_back(lower_id(i, 0));
        sets["boundary_upper"].push_back(upper_id(i, ny2));
    }
    return mesh;
}

} // namespace

double Mesh::q4_area(int elem) const {
    const auto& e = q4_elements[elem];
    double a = 0.0;
    for (int k = 0; k < 4; ++k) {
        const auto& p = nodes[e.nodes[k]];
        const auto& q = nodes[e.nodes[(k + 1) % 4]];
        a += p[0] * q[1] - q[0] * p[1];
    }
    return 0.5 * a;
}

double Mesh::interface_length(int elem) const {
    const auto& f = interface_elements[elem];
    const auto& p = nodes[f.nodes[0]];
    const auto& q = nodes[f.nodes[1]];
    return std::hypot(q[0] - p[0], q[1] - p[1]);
}

void Mesh::validate() const {
    for (size_t i = 0; i < interface_elements.size(); ++i) {
        const auto& f = interface_elements[i];
        const auto& b1 = nodes[f.nodes[0]];
        const auto& t1 = nodes[f.nodes[2]];
        const auto& b2 = nodes[f.nodes[1]];
        const auto& t2 = nodes[f.nodes[3]];
        if (b1 != t1 || b2 != t2)
            throw GeometryError("interface element " + std::to_string(i) + " is not zero-thickness");
        if (f.neighbor_upper < 0 || f.neighbor_lower < 0)
            throw GeometryError("interface element " + std::to_string(i) + " missing neighbor link");
        if (q4_elements[f.neighbor_upper].subdomain != 1 || q4_elements[f.neighbor_lower].subdomain != 2)
            throw GeometryError("interface element " + std::to_string(i) + " neighbors on wrong subdomains");
    }
    check_jacobians(*this);
}

Mesh build_patch(const GeometrySpec& spec) {
    const double L = spec.L, H = spec.H;
    Mesh mesh;
    if (spec.kind == MeshKind::patch_horizontal) {
        mesh = build_two_block(L, H, spec.nx, spec.ny_per_arm, spec.ny_per_arm,
                               [H](double) { return H / 2.0; });
    } else if (spec.kind == MeshKind::patch_inclined) {
        const double slope = std::tan(kInclinedAngleDeg * std::numbers::pi / 180.0);
        auto y_int = [=](double x) { return H / 2.0 + slope * (x - L / 2.0); };
        if (y_int(0.0) <= 0.0 || y_int(0.0) >= H || y_int(L) <= 0.0 || y_int(L) >= H)
            throw GeometryError("inclined interface exits the plate");
        mesh = build_two_block(L, H, spec.nx, spec.ny_per_arm, spec.ny_per_arm, y_int);
    } else {
        throw GeometryError("build_patch requires a patch kind");
    }
    mesh.validate();
    return mesh;
}

Mesh perturb_interface(const Mesh& mesh, double fraction, std::uint64_t seed) {
    if (fraction == 0.0) return mesh;
    if (!(fraction > 0.0 && fraction < 0.5))
        throw GeometryError("perturbation fraction must lie in [0, 0.5)");

    // Collect the interface node pairs ordered by x; require a horizontal
    // interface (single shared y).
    std::set<std::pair<int, int>> pair_set;
    double y_ref = mesh.nodes[mesh.interface_elements.at(0).nodes[0]][1];
    double h_min = std::numeric_limits<double>::max();
    for (size_t i = 0; i < mesh.interface_elements.size(); ++i) {
        const auto& f = mesh.interface_elements[i];
        pair_set.insert({f.nodes[0], f.nodes[2]});
        pair_set.insert({f.nodes[1], f.nodes[3]});
        for (int k : {0, 1})
            if (mesh.nodes[f.nodes[k]][1] != y_ref)
                throw GeometryError("perturb_interface requires a horizontal interface");
        h_min = std::min(h_min, mesh.interface_length(static_cast<int>(i)));
    }
    std::vector<std::pair<int, int>> pairs(pair_set.begin(), pair_set.end());
    std::sort(pairs.begin(), pairs.end(), [&](const auto& a, const auto& b) {
        return mesh.nodes[a.first][0] < mesh.nodes[b.first][0];
    });

    Mesh out = mesh;
    std::mt19937_64 gen(seed);
    // Hand-rolled uniform in [0,1): identical bits on every platform.
    auto unit = [&gen]() { return static_cast<double>(gen() >> 11) * 0x1.0p-53; };
    for (size_t k = 0; k < pairs.size(); ++k) {
        const double dy = (2.0 * unit() - 1.0) * fraction * h_min;
        if (k == 0 || k + 1 == pairs.size()) continue; // end pairs stay put
        out.nodes[pairs[k].first][1] += dy;
        out.nodes[pairs[k].second][1] += dy;
    }
    out.validate();
    return out;
}

Mesh build_beam(const GeometrySpec& spec) {
    if (spec.kind != MeshKind::dcb && spec.kind != MeshKind::enf && spec.kind != MeshKind::frmm)
        throw GeometryError("build_beam requires a beam kind");
    if (!(spec.a0 > 0.0 && spec.a0 < spec.L))
        throw GeometryError("pre-crack length must satisfy 0 < a0 < L");

    const double H = spec.H;
    Mesh mesh = build_two_block(spec.L, H, spec.nx, spec.ny_per_arm, spec.ny_per_arm,
                                [H](double) { return H / 2.0; });

    const double dx = spec.L / spec.nx;
    int crack_cols = static_cast<int>(std::llround(spec.a0 / dx));
    crack_cols = std::clamp(crack_cols, 0, spec.nx);
    if (std::abs(crack_cols * dx - spec.a0) > 1e-9 * spec.L) {
        char buf[160];
        std::snprintf(buf, sizeof(buf), "pre-crack a0=%g snapped to node column at x=%g", spec.a0,
                      crack_cols * dx);
        mesh.warnings.push_back(buf);
    }
    for (int i = 0; i < crack_cols; ++i)
        mesh.interface_elements[i].precracked = true;

    const int ncol = spec.nx + 1;
    const int n_lower = ncol * (spec.ny_per_arm + 1);
    auto lower_id = [&](int i, int j) { return j * ncol + i; };
    auto upper_id = [&](int i, int j) { return n_lower + j * ncol + i; };

    auto& sets = mesh.boundary_sets;
    for (int j = 0; j <= spec.ny_per_arm; ++j) {
        sets["right_edge"].push_back(lower_id(spec.nx, j));
        sets["right_edge"].push_back(upper_id(spec.nx, j));
    }
    sets["left_upper_corner"] = {upper_id(0, spec.ny_per_arm)};
    sets["left_lower_corner"] = {lower_id(0, 0)};
    if (spec.kind == MeshKind::enf) {
        sets["support_left"] = {lower_id(0, 0)};
        sets["support_right"] = {lower_id(spec.nx, 0)};
        int mid = spec.nx / 2;
        if (spec.nx % 2 != 0)
            mesh.warnings.push_back("midspan load snapped to nearest node column (nx is odd)");
        sets["load_mid_top"] = {upper_id(mid, spec.ny_per_arm)};
    }
    mesh.validate();
    return mesh;
}

std::string dump_mesh(const Mesh& mesh) {
    std::ostringstream os;
    char buf[256];
    os << "# delamfem mesh dump\n";
    for (size_t i = 0; i < mesh.nodes.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "node %zu %.17g %.17g\n", i, mesh.nodes[i][0], mesh.nodes[i][1]);
        os << buf;
    }
    for (size_t i = 0; i < mesh.q4_elements.size(); ++i) {
        const auto& e = mesh.q4_elements[i];
        std::snprintf(buf, sizeof(buf), "q4 %zu %d %d %d %d %d %d\n", i, e.nodes[0], e.nodes[1],
                      e.nodes[2], e.nodes[3], e.ply == PlyAngle::deg0 ? 0 : 90, e.subdomain);
        os << buf;
    }
    for (size_t i = 0; i < mesh.interface_elements.size(); ++i) {
        const auto& f = mesh.interface_elements[i];
        std::snprintf(buf, sizeof(buf), "iface %zu %d %d %d %d %d %d %d\n", i, f.nodes[0], f.nodes[1],
                      f.nodes[2], f.nodes[3], f.neighbor_lower, f.neighbor_upper, f.precracked ? 1 : 0);
        os << buf;
    }
    for (const auto& [name, ids] : mesh.boundary_sets) {
        os << "set " << name;
        for (int id : ids) os << ' ' << id;
        os << '\n';
    }
    return os.str();
}

std::vector<std::string> process_zone_warnings(const Mesh& mesh, const LaminaProperties& mat,
                                               const CohesiveParams& czm) {
    std::vector<std::string> w;
    if (mesh.interface_elements.empty()) return w;
    double len_max = 0.0;
    for (size_t i = 0; i < mesh.interface_elements.size(); ++i)
        len_max = std::max(len_max, mesh.interface_length(static_cast<int>(i)));
    const double lcz_I = mat.E22 * czm.G_Ic / (czm.sigma_max * czm.sigma_max);
    const double lcz_II = mat.E22 * czm.G_IIc / (czm.tau_max * czm.tau_max);
    const double limit = std::min(lcz_I, lcz_II) / 3.0;
    if (len_max > limit) {
        char buf[200];
        std::snprintf(buf, sizeof(buf),
                      "interface element length %.4g exceeds process-zone limit %.4g "
                      "(l_cz mode I %.4g, mode II %.4g)",
                      len_max, limit, lcz_I, lcz_II);
        w.push_back(buf);
    }
    return w;
}

} // namespace delamfem
