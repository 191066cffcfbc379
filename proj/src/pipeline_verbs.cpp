#include <fstream>

#include "json.hpp"
#include "mmfm/csv.hpp"
#include "mmfm/pipeline.hpp"

namespace mmfm {

namespace {

using Json = nlohmann::ordered_json;
namespace fs = std::filesystem;

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text;
}

void write_manifest(const fs::path& dir, const std::string& verb,
                    const std::vector<std::string>& files, Json extra = Json::object()) {
    Json manifest;
    manifest["verb"] = verb;
    manifest["config"] = "config.resolved.json";
    manifest["files"] = files;
    for (auto& [key, value] : extra.items()) manifest[key] = value;
    write_text(dir / "manifest.json", manifest.dump(2) + "\n");
}

void write_matrix_grid(const Matrix& m, const fs::path& path) {
    csv::Table table;
    for (Eigen::Index j = 0; j < m.cols(); ++j) table.header.push_back("c" + std::to_string(j + 1));
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        std::vector<std::string> row;
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(csv::format_double(m(i, j)));
        table.rows.push_back(std::move(row));
    }
    csv::write_table(table, path);
}

void write_factor_series(const std::vector<Matrix>& series, const fs::path& path) {
    csv::Table table;
    table.header = {"t", "row", "col", "value"};
    for (std::size_t t = 0; t < series.size(); ++t)
        for (Eigen::Index i = 0; i < series[t].rows(); ++i)
            for (Eigen::Index j = 0; j < series[t].cols(); ++j)
                table.rows.push_back({std::to_string(t + 1), std::to_string(i + 1),
                                      std::to_string(j + 1),
                                      csv::format_double(series[t](i, j))});
    csv::write_table(table, path);
}

}  // namespace

void run_simulate_verb(const RunConfig& cfg) {
    fs::create_directories(cfg.output_dir);
    RunConfig resolved = cfg;
    resolved.mode = "simulate";
    resolved.sim.seed = cfg.seed;
    write_text(cfg.output_dir / "config.resolved.json", serialize_run_config(resolved));

    auto [panel, truth] = simulate(resolved.sim);
    std::vector<std::string> files{"panel.csv"};
    write_panel_csv(panel, cfg.output_dir / "panel.csv");

    fs::create_directories(cfg.output_dir / "truth");
    write_factor_series(truth.G, cfg.output_dir / "truth" / "global_factors.csv");
    files.push_back("truth/global_factors.csv");
    for (int m = 0; m < panel.group_count(); ++m) {
        const std::string g = panel.groups[m].name;
        write_factor_series(truth.F[m], cfg.output_dir / "truth" / ("local_factors_" + g + ".csv"));
        files.push_back("truth/local_factors_" + g + ".csv");
        const std::pair<const char*, const Matrix*> loadings[] = {
            {"q1", &truth.Q1[m]}, {"q2", &truth.Q2[m]}, {"q3", &truth.Q3[m]}, {"q4", &truth.Q4[m]}};
        for (const auto& [tag, matrix] : loadings) {
            const std::string name = std::string(tag) + "_" + g + ".csv";
            write_matrix_grid(*matrix, cfg.output_dir / "truth" / name);
            files.push_back("truth/" + name);
        }
    }
    write_manifest(cfg.output_dir, "simulate", files);
}

void run_fit_verb(const RunConfig& cfg) {
    if (cfg.data.csv.empty()) throw std::runtime_error("fit: config needs data.csv");
    fs::create_directories(cfg.output_dir);
    RunConfig resolved = cfg;
    resolved.mode = "fit";
    write_text(cfg.output_dir / "config.resolved.json", serialize_run_config(resolved));

    IngestResult ingested = ingest_csv(cfg.data.csv, cfg.data.na_policy);
    GroupedPanel panel = preprocess(ingested.panel, cfg.data.difference, cfg.data.standardize);
    if (cfg.data.difference && !ingested.times.empty()) ingested.times.erase(ingested.times.begin());

    const FitReport report = fit_report(panel, cfg.estimator);
    write_fit_report(report, panel, &ingested, cfg.output_dir, cfg.estimator);

    Json extra;
    Json groups = Json::array();
    for (int m = 0; m < panel.group_count(); ++m) {
        Json g;
        g["name"] = panel.groups[m].name;
        g["row_ids"] = ingested.row_ids[m];
        g["col_ids"] = ingested.col_ids[m];
        groups.push_back(std::move(g));
    }
    extra["groups"] = std::move(groups);
    extra["dropped_times"] = ingested.dropped_times;
    write_manifest(cfg.output_dir, "fit",
                   {"report.json", "correlations_raw.csv", "correlations_post_global.csv",
                    "correlations_post_local.csv", "diagnostics/eigen_diagnostics.csv",
                    "loadings/", "factors/", "signals/"},
                   std::move(extra));
}

void run_sweep_verb(const RunConfig& cfg) {
    fs::create_directories(cfg.output_dir);
    RunConfig resolved = cfg;
    resolved.mode = "sweep";
    write_text(cfg.output_dir / "config.resolved.json", serialize_run_config(resolved));

    const SweepResult result = run_sweep(cfg.sweep, cfg.seed, cfg.threads);
    write_sweep_outputs(result, cfg.output_dir, cfg.sweep.scale_x10);

    std::vector<std::string> files{"cells.csv", "replications.csv"};
    if (cfg.sweep.scale_x10) files.push_back("cells_x10.csv");
    write_manifest(cfg.output_dir, "sweep", files);
}

}  // namespace mmfm
