#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "mmfm/pipeline.hpp"

namespace {

struct CommonArgs {
    std::string config_path;
    std::string out_dir;
    std::optional<std::uint64_t> seed;
    std::optional<int> threads;
};

void add_common(CLI::App* cmd, CommonArgs& args, bool config_required) {
    auto* opt = cmd->add_option("-c,--config", args.config_path, "run configuration (JSON)");
    if (config_required) opt->required();
    cmd->add_option("-o,--out", args.out_dir, "output directory (overrides the config)");
    cmd->add_option("-s,--seed", [&args](const CLI::results_t& res) {
        args.seed = std::stoull(res.front());
        return true;
    }, "seed override");
    cmd->add_option("-t,--threads", [&args](const CLI::results_t& res) {
        args.threads = std::stoi(res.front());
        return true;
    }, "worker thread count override");
}

mmfm::RunConfig resolve(const CommonArgs& args, const std::string& mode) {
    mmfm::RunConfig cfg = mmfm::load_run_config(args.config_path);
    cfg.mode = mode;
    if (!args.out_dir.empty()) cfg.output_dir = args.out_dir;
    if (args.seed) cfg.seed = *args.seed;
    if (args.threads) cfg.threads = *args.threads;
    return cfg;
}

int fail(const std::exception& e) {
    nlohmann::ordered_json err;
    err["error"] = e.what();
    std::cerr << err.dump() << "\n";
    return 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multilevel matrix factor model: simulation, estimation, Monte Carlo sweeps"};
    app.require_subcommand(1);

    CommonArgs sim_args, fit_args, sweep_args;
    auto* sim_cmd = app.add_subcommand("simulate", "generate a panel and write it with its ground truth");
    add_common(sim_cmd, sim_args, true);
    auto* fit_cmd = app.add_subcommand("fit", "ingest a panel CSV, run the three-stage fit, emit a report");
    add_common(fit_cmd, fit_args, true);
    auto* sweep_cmd = app.add_subcommand("sweep", "Monte Carlo grid over strengths, sizes, and lengths");
    add_common(sweep_cmd, sweep_args, true);

    std::string check_csv, check_na = "error";
    auto* check_cmd = app.add_subcommand("ingest-check", "validate a panel CSV and print a summary");
    check_cmd->add_option("--csv", check_csv, "panel CSV path")->required();
    check_cmd->add_option("--na-policy", check_na, "error | drop | ffill");

    CLI11_PARSE(app, argc, argv);

    try {
        if (sim_cmd->parsed()) {
            mmfm::run_simulate_verb(resolve(sim_args, "simulate"));
        } else if (fit_cmd->parsed()) {
            mmfm::run_fit_verb(resolve(fit_args, "fit"));
        } else if (sweep_cmd->parsed()) {
            mmfm::run_sweep_verb(resolve(sweep_args, "sweep"));
        } else if (check_cmd->parsed()) {
            const mmfm::IngestResult ingested = mmfm::ingest_csv(check_csv, check_na);
            const mmfm::ValidationReport report = mmfm::validate_panel(ingested.panel);
            nlohmann::ordered_json summary;
            summary["groups"] = ingested.panel.group_count();
            summary["time_len"] = ingested.panel.time_len();
            summary["cols"] = ingested.panel.cols();
            nlohmann::ordered_json rows = nlohmann::ordered_json::array();
            for (const auto& g : ingested.panel.groups) rows.push_back(g.rows());
            summary["rows_per_group"] = std::move(rows);
            summary["dropped_times"] = ingested.dropped_times;
            summary["ok"] = report.ok();
            summary["violations"] = report.violations;
            summary["warnings"] = report.warnings;
            std::cout << summary.dump(2) << "\n";
            return report.ok() ? 0 : 1;
        }
    } catch (const std::exception& e) {
        return fail(e);
    }
    return 0;
}
