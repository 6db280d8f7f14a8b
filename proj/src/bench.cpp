#include "delamfem/bench.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace delamfem {

double LoadDispCurve::peak_load() const {
    double p = 0.0;
    for (const auto& pt : points) p = std::max(p, pt.load);
    return p;
}

double LoadDispCurve::disp_at_peak() const {
    double p = 0.0, d = 0.0;
    for (const auto& pt : points)
        if (pt.load > p) {
            p = pt.load;
            d = pt.disp;
        }
    return d;
}

double LoadDispCurve::load_at(double disp) const {
    if (points.empty()) return 0.0;
    if (disp <= points.front().disp) return points.front().load;
    for (size_t i = 1; i < points.size(); ++i) {
        if (disp <= points[i].disp) {
            const auto& a = points[i - 1];
            const auto& b = points[i];
            const double t = (disp - a.disp) / (b.disp - a.disp);
            return a.load + t * (b.load - a.load);
        }
    }
    return points.back().load;
}

double oscillation_index(const TractionProfile& profile, ProfileField field) {
    const auto& s = profile.samples;
    if (s.size() < 5)
        throw std::invalid_argument("oscillation_index needs at least 5 samples");
    auto val = [&](size_t i) { return field == ProfileField::t_n ? s[i].t_n : s[i].t_t; };
    double total = 0.0, lo = val(0), hi = val(0);
    for (size_t i = 0; i < s.size(); ++i) {
        lo = std::min(lo, val(i));
        hi = std::max(hi, val(i));
        if (i > 0 && i + 1 < s.size()) total += std::abs(val(i - 1) - 2.0 * val(i) + val(i + 1));
    }
    return total / (hi - lo + 1e-12);
}

double DcbBeamTheory::critical_load() const {
    return std::sqrt(G_Ic * b * E1 * inertia()) / a0;
}

double DcbBeamTheory::critical_disp() const { return compliance(a0) * critical_load(); }

double DcbBeamTheory::load_at(double delta) const {
    const double dc = critical_disp();
    if (delta <= dc) return delta / compliance(a0);
    // Propagation branch: G = G_Ic fixes P(a); invert delta(a) = C(a) P(a).
    const double q = std::sqrt(G_Ic * b / (E1 * inertia()));
    const double a = std::sqrt(3.0 * delta / (2.0 * q));
    return std::sqrt(G_Ic * b * E1 * inertia()) / a;
}

DcbBeamTheory dcb_beam_theory(double E1, double arm_h, double b, double a0, double G_Ic) {
    if (!(E1 > 0 && arm_h > 0 && b > 0 && a0 > 0 && G_Ic >= 0))
        throw std::invalid_argument("dcb_beam_theory: inputs must be positive");
    return DcbBeamTheory{E1, arm_h, b, a0, G_Ic};
}

const char* benchmark_name_str(BenchmarkName n) {
    switch (n) {
        case BenchmarkName::patch_h: return "patch_h";
        case BenchmarkName::patch_h_perturbed: return "patch_h_perturbed";
        case BenchmarkName::patch_inclined: return "patch_inclined";
        case BenchmarkName::patch_strict: return "patch_strict";
        case BenchmarkName::dcb: return "dcb";
        case BenchmarkName::enf: return "enf";
        case BenchmarkName::frmm: return "frmm";
    }
    return "?";
}

BenchmarkName parse_benchmark_name(const std::string& s) {
    static const std::map<std::string, BenchmarkName> names = {
        {"patch_h", BenchmarkName::patch_h},
        {"patch_h_perturbed", BenchmarkName::patch_h_perturbed},
        {"patch_inclined", BenchmarkName::patch_inclined},
        {"patch_strict", BenchmarkName::patch_strict},
        {"dcb", BenchmarkName::dcb},
        {"enf", BenchmarkName::enf},
        {"frmm", BenchmarkName::frmm},
    };
    auto it = names.find(s);
    if (it == names.end()) throw ConfigError("unknown benchmark name: " + s);
    return it->second;
}

namespace {

void assign_layup(Mesh& mesh, const std::string& layup) {
    if (layup != "0/0" && layup != "0/90")
        throw ConfigError("layup must be \"0/0\" or \"0/90\"");
    const PlyAngle lower = layup == "0/90" ? PlyAngle::deg90 : PlyAngle::deg0;
    for (auto& e : mesh.q4_elements)
        e.ply = e.subdomain == 1 ? PlyAngle::deg0 : lower;
}

void fix_node(Problem& p, int node) {
    p.dirichlet.push_back({2 * node, 0.0});
    p.dirichlet.push_back({2 * node + 1, 0.0});
}

} // namespace

Problem make_problem(BenchmarkName name, const std::string& layup, const LaminaProperties& mat,
                     const CohesiveParams& czm, const ProblemOptions& opts) {
    Problem p;
    p.name = benchmark_name_str(name);
    p.layup = layup;
    p.material = mat;
    p.czm = czm;
    for (const auto& w : czm.validate()) p.warnings.push_back(w);
    if (opts.beta_override) p.model_options.beta_override = opts.beta_override;
    p.model_options.integration = opts.integration;

    GeometrySpec spec;
    const bool is_patch = name == BenchmarkName::patch_h || name == BenchmarkName::patch_h_perturbed ||
                          name == BenchmarkName::patch_inclined || name == BenchmarkName::patch_strict;
    if (is_patch) {
        spec.kind = name == BenchmarkName::patch_inclined ? MeshKind::patch_inclined
                                                          : MeshKind::patch_horizontal;
        spec.L = spec.H = 1.0;
        spec.nx = opts.nx.value_or(name == BenchmarkName::patch_inclined ? 13 : 10);
        spec.ny_per_arm = opts.ny_per_arm.value_or(name == BenchmarkName::patch_inclined ? 9 : spec.nx / 2);
        p.mesh = build_patch(spec);
        if (name == BenchmarkName::patch_h_perturbed) {
            p.mesh = perturb_interface(p.mesh, opts.perturb_fraction.value_or(0.03),
                                       opts.seed.value_or(42));
        }
        p.default_increments = 1;
    } else {
        switch (name) {
            case BenchmarkName::dcb:
                spec.kind = MeshKind::dcb;
                spec.L = 150.0;
                spec.nx = opts.nx.value_or(300);
                break;
            case BenchmarkName::enf:
                spec.kind = MeshKind::enf;
                spec.L = 100.0;
                spec.nx = opts.nx.value_or(200);
                break;
            default:
                spec.kind = MeshKind::frmm;
                spec.L = 50.0;
                spec.nx = opts.nx.value_or(100);
                break;
        }
        spec.H = 3.1;
        spec.a0 = 35.0;
        spec.ny_per_arm = opts.ny_per_arm.value_or(4);
        p.mesh = build_beam(spec);
        if (opts.perturb_fraction && *opts.perturb_fraction > 0.0)
            p.mesh = perturb_interface(p.mesh, *opts.perturb_fraction, opts.seed.value_or(42));
        p.default_increments = name == BenchmarkName::dcb ? 300 : 160;
    }
    assign_layup(p.mesh, layup);
    for (const auto& w : p.mesh.warnings) p.warnings.push_back(w);
    for (const auto& w : process_zone_warnings(p.mesh, mat, czm)) p.warnings.push_back(w);

    const auto& sets = p.mesh.boundary_sets;
    auto set_of = [&](const char* key) -> const std::vector<int>& {
        auto it = sets.find(key);
        if (it == sets.end()) throw ConfigError(std::string("missing boundary set ") + key);
        return it->second;
    };

    switch (name) {
        case BenchmarkName::patch_h:
        case BenchmarkName::patch_h_perturbed:
        case BenchmarkName::patch_inclined: {
            const double delta = -std::abs(opts.total_disp.value_or(0.1));
            for (int n : set_of("bottom")) fix_node(p, n);
            for (int n : set_of("top")) {
                p.dirichlet.push_back({2 * n + 1, delta});
                p.load_dofs.push_back({2 * n + 1, -1.0});
            }
            p.applied_magnitude = std::abs(delta);
            break;
        }
        case BenchmarkName::patch_strict: {
            // Exact piecewise-affine data: u = eps.x below the interface,
            // u = eps.x + g above, with g the interface jump of the exact
            // solution (sigma.n split by the undamaged cohesive stiffness).
            const double exx = opts.strict_strain[0], eyy = opts.strict_strain[1],
                         exy = opts.strict_strain[2];
            const PlaneStressMatrix D = reduced_stiffness(mat, PlyAngle::deg0);
            const Eigen::Vector3d sig = D.d * Eigen::Vector3d(exx, eyy, 2.0 * exy);
            const double gx = sig(2) / czm.alpha_t0;  // tangential jump (tau = e1)
            const double gy = sig(1) / czm.alpha_n0;  // normal jump (n = e2)
            auto affine = [&](int node, double ox, double oy) {
                const auto& X = p.mesh.nodes[node];
                p.dirichlet.push_back({2 * node, exx * X[0] + exy * X[1] + ox});
                p.dirichlet.push_back({2 * node + 1, exy * X[0] + eyy * X[1] + oy});
            };
            for (int n : set_of("boundary_lower")) affine(n, 0.0, 0.0);
            for (int n : set_of("boundary_upper")) affine(n, gx, gy);
            for (int n : set_of("top")) p.load_dofs.push_back({2 * n + 1, -1.0});
            p.applied_magnitude = 1.0;
            p.default_increments = 1;
            break;
        }
        case BenchmarkName::dcb: {
            const double delta = opts.total_disp.value_or(3.0);
            for (int n : set_of("right_edge")) fix_node(p, n);
            const int up = set_of("left_upper_corner")[0];
            const int lo = set_of("left_lower_corner")[0];
            p.dirichlet.push_back({2 * up + 1, delta});
            p.dirichlet.push_back({2 * lo + 1, -delta});
            p.load_dofs.push_back({2 * up + 1, 1.0});
            // curve abscissa is the relative opening at the load points
            p.applied_magnitude = 2.0 * delta;
            break;
        }
        case BenchmarkName::enf: {
            const double delta = opts.total_disp.value_or(6.0);
            const int sl = set_of("support_left")[0];
            const int sr = set_of("support_right")[0];
            p.dirichlet.push_back({2 * sl + 1, 0.0});
            p.dirichlet.push_back({2 * sr, 0.0});
            p.dirichlet.push_back({2 * sr + 1, 0.0});
            const int mid = set_of("load_mid_top")[0];
            p.dirichlet.push_back({2 * mid + 1, -delta});
            p.load_dofs.push_back({2 * mid + 1, -1.0});
            p.applied_magnitude = delta;
            break;
        }
        case BenchmarkName::frmm: {
            const double delta = opts.total_disp.value_or(8.0);
            for (int n : set_of("right_edge")) fix_node(p, n);
            const int up = set_of("left_upper_corner")[0];
            p.dirichlet.push_back({2 * up + 1, delta});
            p.load_dofs.push_back({2 * up + 1, 1.0});
            p.applied_magnitude = delta;
            break;
        }
    }
    return p;
}

TractionProfile extract_profile(const DiscreteModel& model, const Eigen::VectorXd& u,
                                const std::vector<SeparationState>& states, Formulation form) {
    TractionProfile profile;
    profile.samples.reserve(model.iface.size() * 2);
    for (size_t f = 0; f < model.iface.size(); ++f) {
        for (int g = 0; g < 2; ++g) {
            const SeparationState& s = states[2 * f + g];
            const Traction2 t = interface_traction(model, u, s, static_cast<int>(f), g, form);
            TractionProfile::Sample smp;
            smp.x1 = model.iface[f].gp[g].x1;
            smp.t_n = t.t_n;
            smp.t_t = t.t_t;
            smp.d_s = s.d_s;
            profile.samples.push_back(smp);
        }
    }
    std::sort(profile.samples.begin(), profile.samples.end(),
              [](const auto& a, const auto& b) { return a.x1 < b.x1; });
    return profile;
}

} // namespace delamfem
