#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "l0comb/config.hpp"
#include "l0comb/csv.hpp"
#include "l0comb/harness.hpp"

namespace {

constexpr int kExitError = 1;       // I/O and unexpected failures
constexpr int kExitConfig = 2;      // config parse/validation errors
constexpr int kExitDivergence = 3;  // a filter diverged and divergent runs were not excluded

struct CommonOpts {
    std::string preset_name;
    std::string config_path;
    std::string scale = "paper";
    std::string out_dir;
    std::vector<std::string> sets;
    std::uint64_t seed = 0;
    CLI::Option* seed_opt = nullptr;
};

void add_common(CLI::App& cmd, CommonOpts& o) {
    cmd.add_option("--preset", o.preset_name, "preset name (see presets-list)");
    cmd.add_option("--config", o.config_path, "config file in the flat key = value format");
    cmd.add_option("--scale", o.scale, "preset scale")
        ->check(CLI::IsMember({"paper", "desk"}))
        ->capture_default_str();
    cmd.add_option("--out", o.out_dir, "output directory (created if missing)")->required();
    o.seed_opt = cmd.add_option("--seed", o.seed, "override base_seed");
    cmd.add_option("--set", o.sets, "key=value override, repeatable (applied after load)");
}

l0comb::ExperimentConfig load_config(const CommonOpts& o) {
    using namespace l0comb;
    if (o.preset_name.empty() == o.config_path.empty())
        throw ConfigError("exactly one of --preset and --config is required", "", 0);
    ExperimentConfig cfg;
    if (!o.preset_name.empty()) {
        cfg = preset(o.preset_name, o.scale == "desk" ? PresetScale::Desk : PresetScale::Paper);
    } else {
        std::ifstream in(o.config_path, std::ios::binary);
        if (!in) throw ConfigError("cannot read config file: " + o.config_path, "", 0);
        std::ostringstream ss;
        ss << in.rdbuf();
        cfg = parse_config(ss.str());
    }
    for (const std::string& kv : o.sets) apply_override(cfg, kv);
    if (o.seed_opt != nullptr && o.seed_opt->count() > 0) cfg.base_seed = o.seed;
    cfg.validate();
    return cfg;
}

int run_command(const CommonOpts& o) {
    using namespace l0comb;
    const ExperimentConfig cfg = load_config(o);
    std::filesystem::create_directories(o.out_dir);
    const MsdTrace trace = run_ensemble(cfg);
    const SteadySummary steady = steady_state_msd(trace);
    write_file(o.out_dir + "/trace.csv", trace_csv(trace));
    write_file(o.out_dir + "/config.txt", serialize(cfg));
    std::cout << steady_table(trace, steady);
    std::cout << "wrote " << o.out_dir << "/trace.csv\n";
    return 0;
}

int sweep_command(const CommonOpts& o) {
    using namespace l0comb;
    const ExperimentConfig cfg = load_config(o);
    if (cfg.sweep.points == 0)
        throw ConfigError("must be >= 1 for the sweep command", "sweep.points", 0);
    std::filesystem::create_directories(o.out_dir);
    const std::vector<double> grid =
        log_grid(cfg.sweep.kappa_min, cfg.sweep.kappa_max, cfg.sweep.points);
    const SweepResult result = kappa_sweep(cfg, grid, cfg.sweep.snr_list);
    write_file(o.out_dir + "/sweep.csv", sweep_csv(result));
    write_file(o.out_dir + "/config.txt", serialize(cfg));
    for (std::size_t si = 0; si < result.snr_list.size(); ++si) {
        std::size_t best = 0;
        for (std::size_t ki = 1; ki < result.kappa_grid.size(); ++ki)
            if (result.steady_msd[si][ki] < result.steady_msd[si][best]) best = ki;
        std::cout << "snr " << format_double(result.snr_list[si])
                  << " dB: best kappa = " << format_double(result.kappa_grid[best])
                  << ", steady msd = " << format_double(result.steady_msd[si][best]) << '\n';
    }
    std::cout << "wrote " << o.out_dir << "/sweep.csv\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"sparse system identification: l0-LMS filters, partial updates, and adaptive "
                 "combinations"};
    app.require_subcommand(1);

    CommonOpts run_opts;
    CommonOpts sweep_opts;
    CLI::App* run_cmd =
        app.add_subcommand("run", "run one experiment; writes trace.csv and config.txt");
    add_common(*run_cmd, run_opts);
    CLI::App* sweep_cmd =
        app.add_subcommand("sweep", "steady-state MSD over a kappa grid; writes sweep.csv");
    add_common(*sweep_cmd, sweep_opts);
    app.add_subcommand("presets-list", "list the built-in preset names");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run_cmd->parsed()) return run_command(run_opts);
        if (sweep_cmd->parsed()) return sweep_command(sweep_opts);
        for (const std::string& name : l0comb::preset_names()) std::cout << name << '\n';
        return 0;
    } catch (const l0comb::ConfigError& ex) {
        std::cerr << "config error: " << ex.what() << '\n';
        return kExitConfig;
    } catch (const l0comb::DivergenceError& ex) {
        std::cerr << "divergence: " << ex.what() << '\n';
        return kExitDivergence;
    } catch (const std::invalid_argument& ex) {
        std::cerr << "config error: " << ex.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << '\n';
        return kExitError;
    }
}
