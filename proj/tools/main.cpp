#include <chrono>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "probesched/config.hpp"
#include "probesched/io.hpp"

namespace fs = std::filesystem;
using namespace probesched;

namespace {

struct CommonOpts {
    std::string config_path;
    std::string preset;
    std::string preset_dir = "presets";
    std::string out_dir = "out";
    std::optional<std::uint64_t> seed;
    std::optional<unsigned> threads;
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
    cmd->add_option("--config", opts.config_path, "experiment config (JSON)");
    cmd->add_option("--preset", opts.preset, "named preset from the preset directory");
    cmd->add_option("--preset-dir", opts.preset_dir, "preset directory")
        ->capture_default_str();
    cmd->add_option("--out", opts.out_dir, "output directory")->capture_default_str();
    cmd->add_option("--seed", opts.seed, "override the config seed");
    cmd->add_option("--threads", opts.threads, "worker threads (0 = hardware)");
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

struct LoadedConfig {
    ToolConfig cfg;
    std::string hash;
};

LoadedConfig load(const CommonOpts& opts) {
    std::string path = opts.config_path;
    if (!opts.preset.empty()) {
        if (!path.empty())
            throw std::invalid_argument("give either --config or --preset, not both");
        path = opts.preset;
        if (path.find('/') == std::string::npos && path.find(".json") == std::string::npos)
            path = opts.preset_dir + "/" + opts.preset + ".json";
    }
    if (path.empty()) throw std::invalid_argument("a --config file or --preset is required");

    const std::string text = read_file(path);
    LoadedConfig out{parse_config(text), config_hash(text)};
    if (opts.seed) out.cfg.experiment.seed = *opts.seed;
    if (opts.threads) out.cfg.threads = *opts.threads;
    return out;
}

class OutputSet {
  public:
    explicit OutputSet(fs::path dir) : dir_(std::move(dir)) {}

    void write(const std::string& rel, const std::string& content) {
        write_text_file(dir_ / rel, content);
        names_.push_back(rel);
    }

    void finish(const std::string& command, const LoadedConfig& loaded,
                std::chrono::steady_clock::time_point started) {
        Manifest m;
        m.command = command;
        m.config_hash = loaded.hash;
        m.seed = loaded.cfg.experiment.seed;
        m.outputs = names_;
        m.duration_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
        write_manifest(dir_, m);
        std::cout << "wrote " << names_.size() << " output file(s) + manifest.json under "
                  << dir_.string() << "\n";
    }

  private:
    fs::path dir_;
    std::vector<std::string> names_;
};

nlohmann::json report_json(const EmpiricalReport& rep) {
    nlohmann::json j;
    j["replications"] = rep.replications;
    j["gain"] = {{"mean", rep.gain_mean}, {"std", rep.gain_std}};
    j["kappa_hat"] = {{"mean", rep.kappa_mean}, {"std", rep.kappa_std}};
    j["sum_throughput"] = {{"mean", rep.sum_throughput_mean}, {"std", rep.sum_throughput_std}};
    j["selection_freq"] = rep.selection_freq;
    j["probe_freq"] = rep.probe_freq;
    return j;
}

int cmd_thresholds(const CommonOpts& opts) {
    const auto started = std::chrono::steady_clock::now();
    const LoadedConfig loaded = load(opts);
    const ExperimentConfig& exp = loaded.cfg.experiment;

    double kappa = 1.0;
    std::string mode = "fixed";
    const PolicySpec& spec = loaded.cfg.experiment.policy;
    if (spec.kappa_mode == KappaMode::fixed) {
        kappa = spec.kappa;
    } else if (spec.kappa_mode == KappaMode::theorem4) {
        mode = "theorem4";
        kappa = scheduling_gain_theorem4(exp.pop.rate_model, exp.beta, exp.pop.size(),
                                         spec.mc_samples, exp.seed)
                    .kappa;
    }
    const ThresholdTable table =
        build_threshold_table(exp.pop.rate_model, exp.beta, exp.pop.size(), kappa);

    OutputSet out{fs::path(opts.out_dir)};
    out.write("thresholds.csv", thresholds_csv(table));
    nlohmann::json summary;
    summary["beta"] = exp.beta;
    summary["users"] = exp.pop.size();
    summary["j_max"] = table.j_max();
    summary["kappa"] = table.kappa;
    summary["kappa_mode"] = mode;
    out.write("summary.json", summary.dump(2) + "\n");
    out.finish("thresholds", loaded, started);
    return 0;
}

int cmd_theory(const CommonOpts& opts) {
    const auto started = std::chrono::steady_clock::now();
    const LoadedConfig loaded = load(opts);
    const ExperimentConfig& exp = loaded.cfg.experiment;

    std::vector<std::size_t> user_counts;
    if (loaded.cfg.has_sweep) {
        if (loaded.cfg.sweep_variable != SweepVariable::users)
            throw std::invalid_argument("theory sweeps only over users");
        for (double v : loaded.cfg.sweep_values)
            user_counts.push_back(static_cast<std::size_t>(v));
    } else {
        user_counts.push_back(exp.pop.size());
    }

    std::vector<TheoryReport> reports;
    reports.reserve(user_counts.size());
    for (std::size_t K : user_counts) {
        reports.push_back(
            theory_report(exp.pop.rate_model, exp.beta, K, loaded.cfg.mc_samples, exp.seed));
    }
    // theory.json and probe_probs.csv always describe the configured K; the
    // gain curve covers the sweep
    TheoryReport main_report;
    bool found = false;
    for (const TheoryReport& r : reports) {
        if (r.user_count == exp.pop.size()) {
            main_report = r;
            found = true;
            break;
        }
    }
    if (!found)
        main_report = theory_report(exp.pop.rate_model, exp.beta, exp.pop.size(),
                                    loaded.cfg.mc_samples, exp.seed);

    OutputSet out{fs::path(opts.out_dir)};
    nlohmann::json j;
    j["beta"] = main_report.beta;
    j["users"] = main_report.user_count;
    j["probe_probs"] = main_report.probe_probs;
    j["kappa"] = main_report.kappa;
    j["gain_jps"] = main_report.gain_jps;
    j["gain_ga"] = main_report.gain_ga;
    j["gain_pa"] = main_report.gain_pa;
    j["gain_rr"] = main_report.gain_rr;
    j["mc_std_error"] = main_report.mc_std_error;
    out.write("theory.json", j.dump(2) + "\n");
    out.write("probe_probs.csv", probe_probs_csv(main_report.probe_probs));
    out.write("gain_curves.csv", gain_curves_csv(reports));
    out.finish("theory", loaded, started);
    return 0;
}

int cmd_simulate(const CommonOpts& opts) {
    const auto started = std::chrono::steady_clock::now();
    const LoadedConfig loaded = load(opts);

    OutputSet out{fs::path(opts.out_dir)};
    for (const PolicySpec& spec : loaded.cfg.policies) {
        ExperimentConfig exp = loaded.cfg.experiment;
        exp.policy = spec;
        const ExperimentResult result = run_experiment(exp, loaded.cfg.threads);
        const std::string prefix = policy_name(spec.kind) + "/";

        out.write(prefix + "throughput_traj.csv",
                  throughput_traj_csv(result.replications.front()));
        out.write(prefix + "utility_traj.csv", utility_traj_csv(result.replications.front()));
        out.write(prefix + "probe_hist.csv", probe_hist_csv(result.replications));
        out.write(prefix + "selection_counts.csv", selection_counts_csv(result.replications));

        nlohmann::json summary = report_json(result.report);
        summary["policy"] = policy_name(spec.kind);
        summary["beta"] = exp.beta;
        summary["users"] = exp.pop.size();
        summary["n_slots"] = exp.n_slots;
        summary["seed"] = exp.seed;
        summary["burn_in_fraction"] = exp.burn_in_fraction;
        out.write(prefix + "summary.json", summary.dump(2) + "\n");
    }
    out.finish("simulate", loaded, started);
    return 0;
}

int cmd_sweep(const CommonOpts& opts) {
    const auto started = std::chrono::steady_clock::now();
    const LoadedConfig loaded = load(opts);
    if (!loaded.cfg.has_sweep)
        throw std::invalid_argument("sweep command needs a sweep section in the config");

    const std::vector<SweepRow> rows =
        sweep(loaded.cfg.experiment, loaded.cfg.mean_rate_rule, loaded.cfg.sweep_variable,
              loaded.cfg.sweep_values, loaded.cfg.policies, loaded.cfg.threads);

    OutputSet out{fs::path(opts.out_dir)};
    out.write("sweep.csv", sweep_csv(rows, loaded.cfg.sweep_variable));
    out.finish("sweep", loaded, started);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"proportional-fair scheduling under per-user channel probing cost"};
    app.set_version_flag("--version", std::string("probesched ") + kToolVersion);
    app.require_subcommand(1);

    CommonOpts opts;
    int (*handler)(const CommonOpts&) = nullptr;

    auto* thresholds = app.add_subcommand("thresholds", "solve and export static thresholds");
    add_common(thresholds, opts);
    thresholds->callback([&] { handler = cmd_thresholds; });

    auto* simulate = app.add_subcommand("simulate", "run slot-loop experiments");
    add_common(simulate, opts);
    simulate->callback([&] { handler = cmd_simulate; });

    auto* theory = app.add_subcommand("theory", "closed-form and Monte Carlo evaluators");
    add_common(theory, opts);
    theory->callback([&] { handler = cmd_theory; });

    auto* sweep_cmd = app.add_subcommand("sweep", "run an experiment over a parameter range");
    add_common(sweep_cmd, opts);
    sweep_cmd->callback([&] { handler = cmd_sweep; });

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        return handler(opts);
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::runtime_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 1;
    }
}
