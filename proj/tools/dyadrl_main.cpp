// dyadrl command line: calibrate testbeds, run learning-curve experiments,
// ablations, and collaboration analyses; emit reproducible CSV artifacts.

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "dyadrl/config.hpp"
#include "dyadrl/io.hpp"
#include "dyadrl/version.hpp"

namespace fs = std::filesystem;
using namespace dyadrl;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitUsage = 2;
constexpr int kExitConfig = 3;
constexpr int kExitCalibration = 4;
constexpr int kExitManifestExists = 5;

struct ManifestExists : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct CommonArgs {
    std::string config_path;
    std::string out_dir;
    std::string populations_dir;
    std::uint64_t seed = 1;
    int runs_override = 0;
    int jobs = 0;
    bool force = false;
};

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("config: cannot read " + path);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

/// Load and hash the config before touching the output directory: a missing
/// config must not leave partial outputs behind.
void prepare(const CommonArgs& args, EngineConfig& cfg, Manifest& manifest,
             const std::string& command) {
    const std::string text = slurp(args.config_path);
    std::istringstream is(text);
    cfg = parse_config(is);
    manifest.command = command;
    manifest.config_hash = to_hex(fnv1a(text));
    manifest.master_seed = args.seed;
    fs::create_directories(args.out_dir);
    const fs::path mpath = fs::path(args.out_dir) / "manifest.txt";
    if (fs::exists(mpath) && !args.force)
        throw ManifestExists("refusing to overwrite " + mpath.string() + " (use --force)");
}

void finish(const CommonArgs& args, const Manifest& manifest) {
    write_text_file(fs::path(args.out_dir) / "manifest.txt", manifest_to_text(manifest));
}

std::string ste_label(double target) { return format_double(target); }

fs::path population_path(const std::string& dir, double target) {
    return fs::path(dir) / ("population_ste" + ste_label(target) + ".txt");
}

Population load_population(const CommonArgs& args, double target) {
    const fs::path p = population_path(
        args.populations_dir.empty() ? args.out_dir : args.populations_dir, target);
    return read_population_file(p);
}

int run_calibrate(const CommonArgs& args) {
    EngineConfig cfg;
    Manifest manifest;
    prepare(args, cfg, manifest, "calibrate");
    manifest.entries["reference_c_treat"] = "0.2,0.3,0.5 (external tuning on the source cohort)";

    const auto base = build_base_population(cfg.testbed, args.seed);
    for (double target : cfg.ste_targets) {
        Population pop;
        pop.env = cfg.testbed.env;
        pop.seed = args.seed;
        pop.ste_target = target;
        TabularPolicy opt;
        const CalibrationResult cal =
            calibrate_ctreat(base, cfg.testbed, target, args.seed, args.jobs, &pop.dyads, &opt);
        pop.c_treat = cal.c_treat;
        pop.achieved_ste = cal.achieved_ste;
        write_population_file(population_path(args.out_dir, target), pop);
        const std::string label = ste_label(target);
        manifest.entries["c_treat_ste" + label] = format_double(cal.c_treat);
        manifest.entries["achieved_ste" + label] = format_double(cal.achieved_ste);
        manifest.entries["evaluations_ste" + label] = std::to_string(cal.evaluations);
        std::cout << "calibrated ste " << label << ": c_treat = " << format_double(cal.c_treat)
                  << ", achieved = " << format_double(cal.achieved_ste) << "\n";
    }
    finish(args, manifest);
    return kExitOk;
}

void write_cell(const fs::path& out_dir, const CellResult& cell) {
    const std::string stem = std::string(algorithm_name(cell.algorithm)) + "_ste" +
                             ste_label(cell.ste_target) + "_" + TestbedVariant::name(cell.variant);
    write_text_file(out_dir / ("curve_" + stem + ".csv"), curve_to_csv(cell.curve));
    write_text_file(out_dir / ("curve_" + stem + "_perdyad.csv"),
                    curve_to_csv(cell.curve_per_dyad));
}

std::string summary_header() {
    return "algorithm,ste_target,variant,end_mean_improvement,end_sd,"
           "end_mean_improvement_per_dyad,relative_improvement,n_runs\n";
}

std::string summary_row(const CellResult& cell) {
    std::ostringstream os;
    os << algorithm_name(cell.algorithm) << ',' << ste_label(cell.ste_target) << ','
       << TestbedVariant::name(cell.variant) << ',' << format_double(cell.curve.mean.back()) << ','
       << format_double(cell.curve.sd.back()) << ','
       << format_double(cell.curve_per_dyad.mean.back()) << ','
       << format_double(cell.relative_improvement()) << ',' << cell.curve.n_runs << "\n";
    return os.str();
}

int run_run(const CommonArgs& args) {
    EngineConfig cfg;
    Manifest manifest;
    prepare(args, cfg, manifest, "run");
    const int n_runs = args.runs_override > 0 ? args.runs_override : cfg.trial_n_runs;
    manifest.entries["n_runs"] = std::to_string(n_runs);
    manifest.entries["n_dyads"] = std::to_string(cfg.trial_n_dyads);

    std::string summary = summary_header();
    for (double target : cfg.ste_targets) {
        const Population pop = load_population(args, target);
        const auto baseline = run_baseline(pop, cfg.trial_n_dyads, n_runs, args.seed, args.jobs);
        TabularPolicy opt;
        bool have_opt = false;
        for (Algorithm alg : cfg.algorithms) {
            const TabularPolicy* opt_ptr = nullptr;
            if (alg == Algorithm::OptimalApprox) {
                if (!have_opt) {
                    opt = approx_optimal_policy(pop.dyads, pop.env, pop.seed);
                    have_opt = true;
                }
                opt_ptr = &opt;
            }
            CellResult cell = run_cell(alg, pop, cfg.trial_n_dyads, n_runs, args.seed, args.jobs,
                                       opt_ptr, &baseline);
            write_cell(args.out_dir, cell);
            summary += summary_row(cell);
            std::cout << "ran " << algorithm_name(alg) << " at ste " << ste_label(target)
                      << ": end improvement " << format_double(cell.curve.mean.back()) << "\n";
        }
    }
    write_text_file(fs::path(args.out_dir) / "summary.csv", summary);
    finish(args, manifest);
    return kExitOk;
}

int run_ablate(const CommonArgs& args) {
    EngineConfig cfg;
    Manifest manifest;
    prepare(args, cfg, manifest, "ablate");
    const int n_runs = args.runs_override > 0 ? args.runs_override : cfg.trial_n_runs;
    manifest.entries["n_runs"] = std::to_string(n_runs);
    manifest.entries["variant"] = TestbedVariant::name(cfg.variant.kind);

    std::vector<Population> testbeds;
    for (double target : cfg.ste_targets) testbeds.push_back(load_population(args, target));
    const std::vector<TestbedVariant> variants{cfg.variant};
    const AblationReport report = ablation_suite(testbeds, variants, cfg.algorithms,
                                                 cfg.trial_n_dyads, n_runs, args.seed, args.jobs);
    std::string summary = summary_header();
    for (const CellResult& cell : report.cells) {
        write_cell(args.out_dir, cell);
        summary += summary_row(cell);
    }
    write_text_file(fs::path(args.out_dir) / "summary.csv", summary);
    for (const OverlapCheck& check : report.no_mediator_overlap) {
        const std::string key = "no_mediator_overlap_ste" + ste_label(check.ste_target);
        manifest.entries[key] = std::string(check.within_one_se ? "ok" : "apart") + " (gap " +
                                format_double(check.gap) + ", pooled se " +
                                format_double(check.pooled_se) + ")";
        std::cout << key << ": gap " << format_double(check.gap) << " vs pooled se "
                  << format_double(check.pooled_se) << "\n";
    }
    finish(args, manifest);
    return kExitOk;
}

int run_collaborate(const CommonArgs& args) {
    EngineConfig cfg;
    Manifest manifest;
    prepare(args, cfg, manifest, "collaborate");
    const Population pop = load_population(args, 0.5);

    std::ostringstream csv;
    csv << "component,p_aya,p_care,p_rel,decisions,interventions,rate,se\n";
    auto emit = [&](const CollaborationResult& r, const char* component) {
        csv << component << ',' << format_double(r.p_aya) << ',' << format_double(r.p_care) << ','
            << format_double(r.p_rel) << ',' << r.decisions << ',' << r.interventions << ','
            << format_double(r.rate()) << ',' << format_double(r.rate_se()) << "\n";
        std::cout << component << " rate at p_aya=" << r.p_aya << " p_rel=" << r.p_rel << ": "
                  << format_double(r.rate()) << "\n";
    };
    for (double p_aya : {0.25, 0.75})
        emit(collaboration_experiment(pop, TrainedComponent::Rel, p_aya, 0.5, 0.5,
                                      cfg.collaborate_n_dyads, seeds::derive(args.seed, 11)),
             "rel");
    for (double p_rel : {0.25, 0.75})
        emit(collaboration_experiment(pop, TrainedComponent::Care, 0.5, 0.5, p_rel,
                                      cfg.collaborate_n_dyads, seeds::derive(args.seed, 12)),
             "care");
    write_text_file(fs::path(args.out_dir) / "collaboration.csv", csv.str());

    // Fixed-probability sweep: best relationship probability under a sparse
    // vs. a dense AYA schedule.
    std::ostringstream sweep;
    sweep << "p_aya,best_p_rel\n";
    for (double p_aya : {0.25, 0.75}) {
        const double best = best_prob_on_grid(pop, TrainedComponent::Rel, p_aya, 0.5,
                                              {0.0, 0.25, 0.5, 0.75, 1.0}, cfg.sweep_n_dyads,
                                              seeds::derive(args.seed, 13), args.jobs);
        sweep << format_double(p_aya) << ',' << format_double(best) << "\n";
    }
    write_text_file(fs::path(args.out_dir) / "sweep.csv", sweep.str());
    finish(args, manifest);
    return kExitOk;
}

int run_export(const CommonArgs& args, double c_treat) {
    EngineConfig cfg;
    Manifest manifest;
    prepare(args, cfg, manifest, "export-population");
    Population pop;
    pop.env = cfg.testbed.env;
    pop.seed = args.seed;
    pop.dyads = build_base_population(cfg.testbed, args.seed);
    if (c_treat > 0.0) {
        pop.dyads = impute_population(pop.dyads, c_treat, args.seed);
        pop.c_treat = c_treat;
    }
    const fs::path path = fs::path(args.out_dir) / "population.txt";
    write_population_file(path, pop);
    manifest.entries["dyads"] = std::to_string(pop.dyads.size());
    manifest.entries["c_treat"] = format_double(c_treat);
    finish(args, manifest);
    std::cout << "wrote " << path.string() << "\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"dyadrl: dyadic adherence-intervention simulation and learning engine"};
    app.set_version_flag("--version", std::string(kVersion));
    app.require_subcommand(1);

    CommonArgs args;
    double export_ctreat = 0.0;

    auto add_common = [&](CLI::App* cmd, bool needs_populations) {
        cmd->add_option("--config", args.config_path, "config file")->required();
        cmd->add_option("--out", args.out_dir, "output directory")->required();
        cmd->add_option("--seed", args.seed, "master seed");
        cmd->add_option("--runs", args.runs_override, "override the run count");
        cmd->add_option("--jobs", args.jobs, "worker cap (DYADRL_JOBS also applies)");
        cmd->add_flag("--force", args.force, "overwrite an existing run manifest");
        if (needs_populations)
            cmd->add_option("--populations", args.populations_dir,
                            "directory with calibrated population files (default: --out)");
    };

    CLI::App* calibrate = app.add_subcommand("calibrate", "bisect c_treat to the STE targets");
    add_common(calibrate, false);
    CLI::App* run = app.add_subcommand("run", "learning-curve experiment grid");
    add_common(run, true);
    CLI::App* ablate = app.add_subcommand("ablate", "variant ablation grid");
    add_common(ablate, true);
    CLI::App* collaborate = app.add_subcommand("collaborate", "collaboration analyses");
    add_common(collaborate, true);
    CLI::App* exportp = app.add_subcommand("export-population", "write a population file");
    add_common(exportp, false);
    exportp->add_option("--ctreat", export_ctreat, "impute treatment effects at this scale");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help / --version
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (*calibrate) return run_calibrate(args);
        if (*run) return run_run(args);
        if (*ablate) return run_ablate(args);
        if (*collaborate) return run_collaborate(args);
        if (*exportp) return run_export(args, export_ctreat);
        return kExitUsage;
    } catch (const ManifestExists& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitManifestExists;
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const CalibrationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitCalibration;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitError;
    }
}
