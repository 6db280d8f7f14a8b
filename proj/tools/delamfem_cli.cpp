#include "delamfem/config.hpp"
#include "delamfem/runio.hpp"

#include <CLI11.hpp>

#include <iostream>

using namespace delamfem;

int main(int argc, char** argv) {
    CLI::App app{"delamfem - 2D cohesive-element delamination benchmarks "
                 "(standard and stabilized interface formulations)"};

    std::string config_path;
    std::string out_dir;
    bool list_benchmarks = false;
    bool quiet = false;
    long long seed = -1;

    app.add_option("--config", config_path, "run configuration (JSON)");
    app.add_option("--out", out_dir, "output directory (overrides config output_dir)");
    app.add_flag("--list-benchmarks", list_benchmarks, "print the available benchmark names");
    app.add_option("--seed", seed, "mesh perturbation seed override");
    app.add_flag("--quiet", quiet, "suppress progress output");

    CLI11_PARSE(app, argc, argv);

    if (list_benchmarks) {
        for (auto n : {BenchmarkName::patch_h, BenchmarkName::patch_h_perturbed,
                       BenchmarkName::patch_inclined, BenchmarkName::patch_strict,
                       BenchmarkName::dcb, BenchmarkName::enf, BenchmarkName::frmm})
            std::cout << benchmark_name_str(n) << "\n";
        return 0;
    }

    if (config_path.empty()) {
        std::cerr << "error: --config is required (or use --list-benchmarks)\n";
        return 1;
    }

    RunConfig cfg;
    try {
        cfg = parse_config(read_text_file(config_path));
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const IOError& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return 3;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    }
    if (seed >= 0) cfg.seed = static_cast<std::uint64_t>(seed);
    if (!out_dir.empty()) cfg.output_dir = out_dir;

    try {
        const auto items = plan_runs(cfg);
        for (const auto& item : items) {
            if (!quiet)
                std::cout << "run " << item.run_id << " (alpha_n=" << item.alpha_n
                          << ", alpha_t=" << item.alpha_t << ")\n";
            const RunSummary s = execute_run(cfg, item, cfg.output_dir, quiet ? nullptr : &std::cout);
            if (!quiet)
                std::cout << "  peak_load=" << s.peak_load << " at disp=" << s.disp_at_peak
                          << " (" << s.wall_time_s << " s)\n";
        }
    } catch (const SolveError& e) {
        std::cerr << "solver abort: " << e.what() << "\n";
        return 2;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const IOError& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
