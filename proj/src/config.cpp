#include "delamfem/config.hpp"

#include "delamfem/runio.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <set>

namespace delamfem {

namespace {

using nlohmann::json;

[[noreturn]] void bad_key(const std::string& path, const std::string& expected) {
    throw ConfigError("config key \"" + path + "\": expected " + expected);
}

void reject_unknown(const json& obj, const std::string& path, const std::set<std::string>& known) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        if (!known.count(it.key()))
            throw ConfigError("unknown config key \"" + (path.empty() ? it.key() : path + "." + it.key()) + "\"");
    }
}

double get_number(const json& obj, const std::string& path, const std::string& key, double def,
                  bool positive = false) {
    if (!obj.contains(key)) return def;
    const auto& v = obj.at(key);
    if (!v.is_number()) bad_key(path + key, "number");
    const double x = v.get<double>();
    if (positive && !(x > 0.0)) bad_key(path + key, "positive number");
    return x;
}

int get_int(const json& obj, const std::string& path, const std::string& key, int def,
            bool positive = false) {
    if (!obj.contains(key)) return def;
    const auto& v = obj.at(key);
    if (!v.is_number_integer()) bad_key(path + key, "integer");
    const int x = v.get<int>();
    if (positive && x <= 0) bad_key(path + key, "positive integer");
    return x;
}

Formulation parse_formulation(const std::string& s) {
    if (s == "standard") return Formulation::standard;
    if (s == "stabilized") return Formulation::stabilized;
    throw ConfigError("config key \"formulations\": expected \"standard\" or \"stabilized\", got \"" + s + "\"");
}

// FNV-1a over the canonical resolved-run string.
std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::string canonical_run_string(const RunConfig& cfg, const RunItem& item) {
    // Everything that affects the numbers, nothing that affects file paths.
    char buf[1024];
    const auto& m = cfg.material;
    const auto& c = cfg.cohesive;
    std::snprintf(
        buf, sizeof(buf),
        "bench=%s layup=%s form=%s an=%.17g at=%.17g beta=%.17g GIc=%.17g GIIc=%.17g "
        "smax=%.17g tmax=%.17g E11=%.17g E22=%.17g E33=%.17g G12=%.17g G13=%.17g G23=%.17g "
        "nu12=%.17g nu13=%.17g nu23=%.17g integ=%d nx=%d ny=%d pf=%.17g seed=%llu ninc=%d "
        "disp=%.17g iters=%d tf=%.17g td=%.17g cut=%d strain=%.17g,%.17g,%.17g",
        benchmark_name_str(cfg.benchmark), cfg.layup.c_str(),
        item.formulation == Formulation::standard ? "standard" : "stabilized", item.alpha_n,
        item.alpha_t, cfg.beta_explicit.value_or(-1.0), c.G_Ic, c.G_IIc, c.sigma_max, c.tau_max,
        m.E11, m.E22, m.E33, m.G12, m.G13, m.G23, m.nu12, m.nu13, m.nu23,
        cfg.integration == InterfaceIntegration::gauss ? 0 : 1, cfg.nx.value_or(-1),
        cfg.ny_per_arm.value_or(-1), cfg.perturb_fraction.value_or(-1.0),
        static_cast<unsigned long long>(cfg.seed.value_or(0)), cfg.n_increments.value_or(-1),
        cfg.total_disp.value_or(-1.0), cfg.max_newton_iters, cfg.tol_force_rel, cfg.tol_disp_rel,
        cfg.max_cutbacks, cfg.strict_strain[0], cfg.strict_strain[1], cfg.strict_strain[2]);
    std::string s = buf;
    s += " snaps=";
    for (int st : cfg.snapshot_steps) s += std::to_string(st) + ",";
    return s;
}

ProblemOptions problem_options(const RunConfig& cfg) {
    ProblemOptions opts;
    opts.nx = cfg.nx;
    opts.ny_per_arm = cfg.ny_per_arm;
    opts.perturb_fraction = cfg.perturb_fraction;
    opts.seed = cfg.seed;
    if (cfg.beta_explicit) opts.beta_override = cfg.beta_explicit;
    opts.integration = cfg.integration;
    opts.total_disp = cfg.total_disp;
    opts.strict_strain = cfg.strict_strain;
    return opts;
}

Problem problem_for(const RunConfig& cfg, const RunItem& item) {
    CohesiveParams czm = cfg.cohesive;
    czm.alpha_n0 = item.alpha_n;
    czm.alpha_t0 = item.alpha_t;
    return make_problem(cfg.benchmark, cfg.layup, cfg.material, czm, problem_options(cfg));
}

} // namespace

RunConfig parse_config(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw ConfigError("config root: expected object");
    reject_unknown(j, "", {"benchmark", "layup", "formulations", "stiffness", "alpha_n", "alpha_t",
                           "beta", "material", "cohesive", "integration", "mesh", "solver",
                           "snapshot_steps", "strict_strain", "output_dir"});

    RunConfig cfg;
    cfg.material = hta6376c();

    if (!j.contains("benchmark") || !j.at("benchmark").is_string())
        bad_key("benchmark", "string (one of the benchmark names)");
    cfg.benchmark = parse_benchmark_name(j.at("benchmark").get<std::string>());

    if (j.contains("layup")) {
        if (!j.at("layup").is_string()) bad_key("layup", "string \"0/0\" or \"0/90\"");
        cfg.layup = j.at("layup").get<std::string>();
    }
    if (cfg.layup != "0/0" && cfg.layup != "0/90") bad_key("layup", "\"0/0\" or \"0/90\"");

    if (j.contains("formulations")) {
        const auto& f = j.at("formulations");
        if (!f.is_array() || f.empty()) bad_key("formulations", "non-empty array of strings");
        cfg.formulations.clear();
        for (const auto& e : f) {
            if (!e.is_string()) bad_key("formulations", "array of strings");
            cfg.formulations.push_back(parse_formulation(e.get<std::string>()));
        }
    }

    const bool has_explicit_alpha = j.contains("alpha_n") || j.contains("alpha_t");
    if (j.contains("stiffness")) {
        if (has_explicit_alpha)
            throw ConfigError("config: \"stiffness\" and \"alpha_n\"/\"alpha_t\" are mutually exclusive");
        const auto& s = j.at("stiffness");
        if (!s.is_array() || s.empty()) bad_key("stiffness", "non-empty array of positive numbers");
        cfg.stiffness.clear();
        for (const auto& e : s) {
            if (!e.is_number() || !(e.get<double>() > 0.0))
                bad_key("stiffness", "array of positive numbers");
            cfg.stiffness.push_back(e.get<double>());
        }
    }
    if (j.contains("alpha_n")) {
        if (!j.at("alpha_n").is_number() || !(j.at("alpha_n").get<double>() > 0.0))
            bad_key("alpha_n", "positive number");
        cfg.alpha_n = j.at("alpha_n").get<double>();
    }
    if (j.contains("alpha_t")) {
        if (!j.at("alpha_t").is_number() || !(j.at("alpha_t").get<double>() > 0.0))
            bad_key("alpha_t", "positive number");
        cfg.alpha_t = j.at("alpha_t").get<double>();
    }

    if (j.contains("beta")) {
        const auto& b = j.at("beta");
        if (!b.is_object()) bad_key("beta", "object {\"mode\": \"auto\"|\"explicit\", ...}");
        reject_unknown(b, "beta", {"mode", "value"});
        const std::string mode = b.value("mode", "auto");
        if (mode == "explicit") {
            if (!b.contains("value") || !b.at("value").is_number() || !(b.at("value").get<double>() > 0.0))
                bad_key("beta.value", "positive number");
            cfg.beta_explicit = b.at("value").get<double>();
        } else if (mode != "auto") {
            bad_key("beta.mode", "\"auto\" or \"explicit\"");
        }
    }

    if (j.contains("material")) {
        const auto& m = j.at("material");
        if (!m.is_object()) bad_key("material", "object");
        reject_unknown(m, "material", {"E11", "E22", "E33", "G12", "G13", "G23", "nu12", "nu13", "nu23"});
        cfg.material.E11 = get_number(m, "material.", "E11", cfg.material.E11, true);
        cfg.material.E22 = get_number(m, "material.", "E22", cfg.material.E22, true);
        cfg.material.E33 = get_number(m, "material.", "E33", cfg.material.E33, true);
        cfg.material.G12 = get_number(m, "material.", "G12", cfg.material.G12, true);
        cfg.material.G13 = get_number(m, "material.", "G13", cfg.material.G13, true);
        cfg.material.G23 = get_number(m, "material.", "G23", cfg.material.G23, true);
        cfg.material.nu12 = get_number(m, "material.", "nu12", cfg.material.nu12);
        cfg.material.nu13 = get_number(m, "material.", "nu13", cfg.material.nu13);
        cfg.material.nu23 = get_number(m, "material.", "nu23", cfg.material.nu23);
    }
    cfg.material.validate();

    if (j.contains("cohesive")) {
        const auto& c = j.at("cohesive");
        if (!c.is_object()) bad_key("cohesive", "object");
        reject_unknown(c, "cohesive", {"G_Ic", "G_IIc", "sigma_max", "tau_max"});
        cfg.cohesive.G_Ic = get_number(c, "cohesive.", "G_Ic", cfg.cohesive.G_Ic, true);
        cfg.cohesive.G_IIc = get_number(c, "cohesive.", "G_IIc", cfg.cohesive.G_IIc, true);
        cfg.cohesive.sigma_max = get_number(c, "cohesive.", "sigma_max", cfg.cohesive.sigma_max, true);
        cfg.cohesive.tau_max = get_number(c, "cohesive.", "tau_max", cfg.cohesive.tau_max, true);
    }

    if (j.contains("integration")) {
        const auto& v = j.at("integration");
        if (!v.is_string()) bad_key("integration", "\"gauss\" or \"newton_cotes\"");
        const std::string s = v.get<std::string>();
        if (s == "gauss") cfg.integration = InterfaceIntegration::gauss;
        else if (s == "newton_cotes") cfg.integration = InterfaceIntegration::newton_cotes;
        else bad_key("integration", "\"gauss\" or \"newton_cotes\"");
    }

    if (j.contains("mesh")) {
        const auto& m = j.at("mesh");
        if (!m.is_object()) bad_key("mesh", "object");
        reject_unknown(m, "mesh", {"nx", "ny_per_arm", "perturb_fraction", "seed"});
        if (m.contains("nx")) cfg.nx = get_int(m, "mesh.", "nx", 0, true);
        if (m.contains("ny_per_arm")) cfg.ny_per_arm = get_int(m, "mesh.", "ny_per_arm", 0, true);
        if (m.contains("perturb_fraction")) {
            const double f = get_number(m, "mesh.", "perturb_fraction", 0.0);
            if (f < 0.0 || f >= 0.5) bad_key("mesh.perturb_fraction", "number in [0, 0.5)");
            cfg.perturb_fraction = f;
        }
        if (m.contains("seed")) {
            if (!m.at("seed").is_number_integer()) bad_key("mesh.seed", "integer");
            cfg.seed = m.at("seed").get<std::uint64_t>();
        }
    }

    if (j.contains("solver")) {
        const auto& s = j.at("solver");
        if (!s.is_object()) bad_key("solver", "object");
        reject_unknown(s, "solver", {"n_increments", "total_disp", "max_newton_iters",
                                     "tol_force_rel", "tol_disp_rel", "max_cutbacks"});
        if (s.contains("n_increments")) cfg.n_increments = get_int(s, "solver.", "n_increments", 0, true);
        if (s.contains("total_disp")) cfg.total_disp = get_number(s, "solver.", "total_disp", 0.0, true);
        cfg.max_newton_iters = get_int(s, "solver.", "max_newton_iters", cfg.max_newton_iters, true);
        cfg.tol_force_rel = get_number(s, "solver.", "tol_force_rel", cfg.tol_force_rel, true);
        cfg.tol_disp_rel = get_number(s, "solver.", "tol_disp_rel", cfg.tol_disp_rel, true);
        cfg.max_cutbacks = get_int(s, "solver.", "max_cutbacks", cfg.max_cutbacks, true);
    }

    if (j.contains("snapshot_steps")) {
        const auto& s = j.at("snapshot_steps");
        if (!s.is_array()) bad_key("snapshot_steps", "array of positive integers");
        for (const auto& e : s) {
            if (!e.is_number_integer() || e.get<int>() <= 0)
                bad_key("snapshot_steps", "array of positive integers");
            cfg.snapshot_steps.push_back(e.get<int>());
        }
    }

    if (j.contains("strict_strain")) {
        const auto& s = j.at("strict_strain");
        if (!s.is_array() || s.size() != 3) bad_key("strict_strain", "array of 3 numbers [e11, e22, e12]");
        for (int i = 0; i < 3; ++i) {
            if (!s[i].is_number()) bad_key("strict_strain", "array of 3 numbers");
            cfg.strict_strain[i] = s[i].get<double>();
        }
    }

    if (j.contains("output_dir")) {
        if (!j.at("output_dir").is_string()) bad_key("output_dir", "string");
        cfg.output_dir = j.at("output_dir").get<std::string>();
    }
    return cfg;
}

std::vector<RunItem> plan_runs(const RunConfig& cfg) {
    std::vector<RunItem> items;
    std::vector<std::pair<double, double>> alphas;
    if (cfg.alpha_n || cfg.alpha_t) {
        alphas.emplace_back(cfg.alpha_n.value_or(1.0e6), cfg.alpha_t.value_or(1.0e6));
    } else {
        for (double a : cfg.stiffness) alphas.emplace_back(a, a);
    }
    for (Formulation f : cfg.formulations) {
        for (const auto& [an, at] : alphas) {
            RunItem item;
            item.formulation = f;
            item.alpha_n = an;
            item.alpha_t = at;
            char buf[64];
            std::snprintf(buf, sizeof(buf), "%016llx",
                          static_cast<unsigned long long>(fnv1a(canonical_run_string(cfg, item))));
            item.run_id = std::string(benchmark_name_str(cfg.benchmark)) + "-" +
                          (f == Formulation::standard ? "std" : "stab") + "-" + buf;
            items.push_back(item);
        }
    }
    return items;
}

double median_auto_beta(const RunConfig& cfg, const RunItem& item) {
    const Problem p = problem_for(cfg, item);
    ModelOptions mo = p.model_options;
    mo.beta_override.reset();  // report the coercivity estimate even when overridden
    const DiscreteModel model = build_model(p.mesh, p.material, p.czm, mo);
    std::vector<double> betas;
    betas.reserve(model.iface.size());
    for (const auto& kin : model.iface) betas.push_back(kin.stab.beta_n);
    if (betas.empty()) return 0.0;
    std::sort(betas.begin(), betas.end());
    return betas[betas.size() / 2];
}

RunSummary execute_run(const RunConfig& cfg, const RunItem& item, const std::string& out_dir,
                       std::ostream* log) {
    namespace fs = std::filesystem;
    const auto t0 = std::chrono::steady_clock::now();

    const Problem problem = problem_for(cfg, item);
    SolverConfig scfg;
    scfg.formulation = item.formulation;
    scfg.n_increments = cfg.n_increments.value_or(problem.default_increments);
    scfg.max_newton_iters = cfg.max_newton_iters;
    scfg.tol_force_rel = cfg.tol_force_rel;
    scfg.tol_disp_rel = cfg.tol_disp_rel;
    scfg.max_cutbacks = cfg.max_cutbacks;
    scfg.log = log;

    const RunResults results = run_simulation(problem, scfg);

    RunSummary summary;
    summary.run_id = item.run_id;
    summary.peak_load = results.curve.peak_load();
    summary.disp_at_peak = results.curve.disp_at_peak();
    summary.iterations_total = 0;
    for (const auto& rec : results.log) summary.iterations_total += rec.iterations;
    summary.aborted = results.aborted;
    summary.beta_median = cfg.beta_explicit.value_or(median_auto_beta(cfg, item));

    // Snapshot selection: explicit steps, or the peak-load increment plus
    // three post-peak snapshots.
    std::vector<int> snaps = cfg.snapshot_steps;
    const int n_steps = static_cast<int>(results.profiles.size());
    if (snaps.empty() && n_steps > 0) {
        int peak_step = 1;
        double peak = -1.0;
        for (const auto& rec : results.log)
            if (rec.reaction > peak) {
                peak = rec.reaction;
                peak_step = rec.step;
            }
        snaps.push_back(peak_step);
        for (int k = 1; k <= 3; ++k) {
            const int s = peak_step + k * std::max(1, (n_steps - peak_step) / 4);
            if (s <= n_steps && s > peak_step) snaps.push_back(s);
        }
    }
    std::sort(snaps.begin(), snaps.end());
    snaps.erase(std::unique(snaps.begin(), snaps.end()), snaps.end());

    const fs::path dir = fs::path(out_dir) / item.run_id;
    fs::create_directories(dir);
    write_text_file(dir / "curve.csv", curve_csv(results.curve));
    write_text_file(dir / "curve.svg", curve_svg(results.curve, problem.name + " " + item.run_id));

    for (int s : snaps) {
        if (s < 1 || s > n_steps) continue;
        const TractionProfile& prof = results.profiles[s - 1];
        summary.snapshot_steps.push_back(s);
        summary.oi_t_n.push_back(prof.samples.size() >= 5 ? oscillation_index(prof, ProfileField::t_n) : 0.0);
        summary.oi_t_t.push_back(prof.samples.size() >= 5 ? oscillation_index(prof, ProfileField::t_t) : 0.0);
        const std::string tag = "profile_step" + std::to_string(s);
        write_text_file(dir / (tag + ".csv"), profile_csv(prof));
        write_text_file(dir / (tag + "_tn.svg"),
                        profile_svg(prof, ProfileField::t_n, problem.name + " t_n step " + std::to_string(s)));
        write_text_file(dir / (tag + "_tt.svg"),
                        profile_svg(prof, ProfileField::t_t, problem.name + " t_t step " + std::to_string(s)));
    }

    if (results.aborted) {
        std::string dump = "aborted: " + results.abort_reason + "\n";
        dump += "last_good_step: " + std::to_string(results.final_state.step) + "\n";
        dump += "load_factor: " + format_full(results.final_state.load_factor) + "\n";
        write_text_file(dir / "abort_state.txt", dump);
    }

    summary.wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    nlohmann::json js;
    js["run_id"] = summary.run_id;
    js["benchmark"] = benchmark_name_str(cfg.benchmark);
    js["layup"] = cfg.layup;
    js["formulation"] = item.formulation == Formulation::standard ? "standard" : "stabilized";
    js["alpha_n"] = item.alpha_n;
    js["alpha_t"] = item.alpha_t;
    js["beta_mode"] = cfg.beta_explicit ? "explicit" : "auto";
    js["beta"] = summary.beta_median;
    js["peak_load"] = summary.peak_load;
    js["disp_at_peak"] = summary.disp_at_peak;
    js["iterations_total"] = summary.iterations_total;
    js["increments"] = scfg.n_increments;
    js["aborted"] = summary.aborted;
    js["wall_time_s"] = summary.wall_time_s;
    js["warnings"] = problem.warnings;
    js["snapshots"] = nlohmann::json::array();
    for (size_t i = 0; i < summary.snapshot_steps.size(); ++i) {
        js["snapshots"].push_back({{"step", summary.snapshot_steps[i]},
                                   {"oi_t_n", summary.oi_t_n[i]},
                                   {"oi_t_t", summary.oi_t_t[i]}});
    }
    write_text_file(dir / "summary.json", js.dump(2) + "\n");

    if (results.aborted) throw SolveError(results.abort_reason);
    return summary;
}

} // namespace delamfem
