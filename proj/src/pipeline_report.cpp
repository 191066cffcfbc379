#include <cmath>
#include <fstream>
#include <stdexcept>

#include "json.hpp"
#include "mmfm/csv.hpp"
#include "mmfm/global_stage.hpp"
#include "mmfm/local_stage.hpp"
#include "mmfm/numerics.hpp"
#include "mmfm/pipeline.hpp"
#include "mmfm/signals.hpp"

namespace mmfm {

namespace {

using Json = nlohmann::ordered_json;

GroupedPanel panel_from_series(const GroupedPanel& shape,
                               const std::vector<std::vector<Matrix>>& obs) {
    GroupedPanel out;
    out.groups.resize(shape.group_count());
    for (int m = 0; m < shape.group_count(); ++m) {
        out.groups[m].name = shape.groups[m].name;
        out.groups[m].obs = obs[m];
    }
    return out;
}

GroupedPanel head_panel(const GroupedPanel& panel, int t_len) {
    GroupedPanel out;
    out.groups.resize(panel.group_count());
    for (int m = 0; m < panel.group_count(); ++m) {
        out.groups[m].name = panel.groups[m].name;
        out.groups[m].obs.assign(panel.groups[m].obs.begin(), panel.groups[m].obs.begin() + t_len);
    }
    return out;
}

}  // namespace

FitReport fit_report(const GroupedPanel& panel, const EstimatorConfig& cfg) {
    const ValidationReport check = validate_panel(panel);
    if (!check.ok()) throw std::invalid_argument("fit_report: " + check.violations.front());

    FitOptions options;
    options.k1 = cfg.k1;
    options.k2 = cfg.k2;
    options.local_ranks = cfg.local_ranks;
    options.h0 = cfg.h0;

    FitReport report;
    report.fit = fit_panel(panel, options);
    const FitResult& fit = report.fit;
    const int M = panel.group_count();

    std::vector<std::vector<Matrix>> post_global(M);
    for (int m = 0; m < M; ++m) {
        post_global[m].resize(panel.time_len());
        for (int t = 0; t < panel.time_len(); ++t)
            post_global[m][t] = panel.groups[m].obs[t] - fit.Psi[m][t];
    }
    report.corr_raw = correlation_summary(panel);
    report.corr_post_global = correlation_summary(panel_from_series(panel, post_global));
    report.corr_post_local = correlation_summary(panel_from_series(panel, fit.residual));

    for (int m = 0; m < M; ++m) {
        const auto [r1, r2] = fit.dims.local[m];
        report.params.push_back(parameter_count(fit.dims.k1, fit.dims.k2, r1, r2,
                                                panel.groups[m].rows(), panel.cols()));
    }

    // Fit proportion, optionally on a chronological holdout refit on the head.
    double total_rss = 0.0, total_tss = 0.0;
    report.group_rss_tss.resize(M);
    if (cfg.eval_split > 0.0) {
        const int T = panel.time_len();
        const int t_test = std::max(2, static_cast<int>(std::llround(cfg.eval_split * T)));
        const int t_train = T - t_test;
        if (t_train < 3) throw std::invalid_argument("fit_report: eval_split leaves too few points");
        report.out_of_sample = true;

        FitOptions train_options = options;  // pin the full-fit ranks for the refit
        train_options.k1 = fit.dims.k1;
        train_options.k2 = fit.dims.k2;
        train_options.local_ranks = fit.dims.local;
        const FitResult train = fit_panel(head_panel(panel, t_train), train_options);

        for (int m = 0; m < M; ++m) {
            const GroupLoadings& ld = train.loadings.groups[m];
            std::vector<Matrix> x_test(panel.groups[m].obs.begin() + t_train,
                                       panel.groups[m].obs.end());
            std::vector<Matrix> y1(x_test.size());
            for (std::size_t t = 0; t < x_test.size(); ++t)
                y1[t] = ld.B1.transpose() * x_test[t];
            const LocalSignal local = recover_local(y1, ld.Q3, ld.Q4, ld.B1);
            const GlobalSignal global = recover_global(x_test, local.Phi, ld.Q1, ld.Q2);
            const std::vector<Matrix> x_hat = fitted_values(global.Psi, local.Phi);

            report.group_rss_tss[m] = rss_tss(x_test, x_hat);
            Matrix mean = Matrix::Zero(x_test.front().rows(), x_test.front().cols());
            for (const Matrix& xt : x_test) mean += xt;
            mean /= static_cast<double>(x_test.size());
            for (std::size_t t = 0; t < x_test.size(); ++t) {
                total_rss += (x_test[t] - x_hat[t]).squaredNorm();
                total_tss += (x_test[t] - mean).squaredNorm();
            }
        }
    } else {
        for (int m = 0; m < M; ++m) {
            const std::vector<Matrix>& x = panel.groups[m].obs;
            const std::vector<Matrix> x_hat = fitted_values(fit.Psi[m], fit.Phi[m]);
            report.group_rss_tss[m] = rss_tss(x, x_hat);
            Matrix mean = Matrix::Zero(x.front().rows(), x.front().cols());
            for (const Matrix& xt : x) mean += xt;
            mean /= static_cast<double>(x.size());
            for (std::size_t t = 0; t < x.size(); ++t) {
                total_rss += (x[t] - x_hat[t]).squaredNorm();
                total_tss += (x[t] - mean).squaredNorm();
            }
        }
    }
    if (total_tss == 0.0) throw std::runtime_error("degenerate series");
    report.total_rss_tss = 1.0 - total_rss / total_tss;

    for (int m = 0; m < M; ++m) {
        const GroupLoadings& ld = fit.loadings.groups[m];
        report.q1_rot.push_back(varimax(ld.Q1).rotated);
        report.q2_rot.push_back(varimax(ld.Q2).rotated);
        report.q3_rot.push_back(varimax(ld.Q3).rotated);
        report.q4_rot.push_back(varimax(ld.Q4).rotated);
    }
    return report;
}

namespace {

void write_matrix_csv(const Matrix& m, const std::vector<std::string>& row_labels,
                      const std::string& label_header, const std::filesystem::path& path) {
    csv::Table table;
    table.header.push_back(label_header);
    for (Eigen::Index j = 0; j < m.cols(); ++j)
        table.header.push_back("f" + std::to_string(j + 1));
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        std::vector<std::string> row;
        row.push_back(row_labels[i]);
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(csv::format_double(m(i, j)));
        table.rows.push_back(std::move(row));
    }
    csv::write_table(table, path);
}

void write_scaled_csv(const Matrix& m, const std::vector<std::string>& row_labels,
                      const std::string& label_header, int scale,
                      const std::filesystem::path& path) {
    csv::Table table;
    table.header.push_back(label_header);
    for (Eigen::Index j = 0; j < m.cols(); ++j)
        table.header.push_back("f" + std::to_string(j + 1));
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        std::vector<std::string> row;
        row.push_back(row_labels[i]);
        for (Eigen::Index j = 0; j < m.cols(); ++j)
            row.push_back(std::to_string(std::llround(scale * m(i, j))));
        table.rows.push_back(std::move(row));
    }
    csv::write_table(table, path);
}

void write_correlation_csv(const Matrix& summary, const std::vector<std::string>& names,
                           const std::filesystem::path& path) {
    csv::Table table;
    table.header.push_back("group");
    for (const std::string& n : names) table.header.push_back(n);
    for (Eigen::Index i = 0; i < summary.rows(); ++i) {
        std::vector<std::string> row;
        row.push_back(names[i]);
        for (Eigen::Index j = 0; j < summary.cols(); ++j)
            row.push_back(csv::format_double(summary(i, j)));
        table.rows.push_back(std::move(row));
    }
    csv::write_table(table, path);
}

void write_long_series(const std::vector<Matrix>& series, const std::filesystem::path& path) {
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

std::vector<std::string> default_labels(const char* prefix, int count) {
    std::vector<std::string> labels;
    labels.reserve(count);
    for (int i = 0; i < count; ++i) labels.push_back(prefix + std::to_string(i + 1));
    return labels;
}

}  // namespace

void write_fit_report(const FitReport& report, const GroupedPanel& panel,
                      const IngestResult* labels, const std::filesystem::path& dir,
                      const EstimatorConfig& cfg) {
    namespace fs = std::filesystem;
    fs::create_directories(dir / "loadings");
    fs::create_directories(dir / "diagnostics");
    fs::create_directories(dir / "factors");
    if (cfg.emit_signals) fs::create_directories(dir / "signals");

    const FitResult& fit = report.fit;
    const int M = panel.group_count();

    std::vector<std::string> group_names;
    for (const GroupSeries& g : panel.groups)
        group_names.push_back(g.name.empty() ? "g" + std::to_string(group_names.size() + 1)
                                             : g.name);

    for (int m = 0; m < M; ++m) {
        const GroupLoadings& ld = fit.loadings.groups[m];
        const std::vector<std::string> rows =
            labels ? labels->row_ids[m] : default_labels("r", panel.groups[m].rows());
        const std::vector<std::string> cols =
            labels ? labels->col_ids[m] : default_labels("c", panel.cols());
        const std::string g = group_names[m];

        write_matrix_csv(ld.Q1, rows, "row_id", dir / "loadings" / ("q1_" + g + ".csv"));
        write_matrix_csv(ld.Q2, cols, "col_id", dir / "loadings" / ("q2_" + g + ".csv"));
        write_matrix_csv(ld.Q3, rows, "row_id", dir / "loadings" / ("q3_" + g + ".csv"));
        write_matrix_csv(ld.Q4, cols, "col_id", dir / "loadings" / ("q4_" + g + ".csv"));
        write_matrix_csv(report.q1_rot[m], rows, "row_id",
                         dir / "loadings" / ("q1_" + g + "_varimax.csv"));
        write_matrix_csv(report.q2_rot[m], cols, "col_id",
                         dir / "loadings" / ("q2_" + g + "_varimax.csv"));
        write_matrix_csv(report.q3_rot[m], rows, "row_id",
                         dir / "loadings" / ("q3_" + g + "_varimax.csv"));
        write_matrix_csv(report.q4_rot[m], cols, "col_id",
                         dir / "loadings" / ("q4_" + g + "_varimax.csv"));
        if (cfg.display_scale > 0) {
            write_scaled_csv(report.q1_rot[m], rows, "row_id", cfg.display_scale,
                             dir / "loadings" / ("q1_" + g + "_varimax_scaled.csv"));
            write_scaled_csv(report.q2_rot[m], cols, "col_id", cfg.display_scale,
                             dir / "loadings" / ("q2_" + g + "_varimax_scaled.csv"));
            write_scaled_csv(report.q3_rot[m], rows, "row_id", cfg.display_scale,
                             dir / "loadings" / ("q3_" + g + "_varimax_scaled.csv"));
            write_scaled_csv(report.q4_rot[m], cols, "col_id", cfg.display_scale,
                             dir / "loadings" / ("q4_" + g + "_varimax_scaled.csv"));
        }

        write_long_series(fit.S[m], dir / "factors" / ("s_" + g + ".csv"));
        write_long_series(fit.Z[m], dir / "factors" / ("z_" + g + ".csv"));
        if (cfg.emit_signals) {
            write_long_series(fit.Psi[m], dir / "signals" / ("psi_" + g + ".csv"));
            write_long_series(fit.Phi[m], dir / "signals" / ("phi_" + g + ".csv"));
            write_long_series(fit.residual[m], dir / "signals" / ("residual_" + g + ".csv"));
        }
    }

    // Eigenvalue ladders and ratio curves, one file for all groups/directions.
    csv::Table diag;
    diag.header = {"group", "direction", "index", "eigenvalue", "ratio", "selected"};
    auto emit_diag = [&](const std::vector<RankDiagnostics>& list, const char* direction) {
        for (int m = 0; m < static_cast<int>(list.size()); ++m) {
            const RankDiagnostics& d = list[m];
            for (Eigen::Index i = 0; i < d.eigenvalues.size(); ++i) {
                diag.rows.push_back(
                    {group_names[m], direction, std::to_string(i + 1),
                     csv::format_double(d.eigenvalues(i)),
                     i < d.ratios.size() ? csv::format_double(d.ratios(i)) : std::string(),
                     std::to_string(d.selected)});
            }
        }
    };
    emit_diag(fit.diagnostics.global_row, "global_row");
    emit_diag(fit.diagnostics.global_col, "global_col");
    emit_diag(fit.diagnostics.local_row, "local_row");
    emit_diag(fit.diagnostics.local_col, "local_col");
    csv::write_table(diag, dir / "diagnostics" / "eigen_diagnostics.csv");

    write_correlation_csv(report.corr_raw, group_names, dir / "correlations_raw.csv");
    write_correlation_csv(report.corr_post_global, group_names,
                          dir / "correlations_post_global.csv");
    write_correlation_csv(report.corr_post_local, group_names,
                          dir / "correlations_post_local.csv");

    Json summary;
    summary["dims"]["k1"] = fit.dims.k1;
    summary["dims"]["k2"] = fit.dims.k2;
    Json local = Json::array();
    for (auto [r1, r2] : fit.dims.local) local.push_back(Json::array({r1, r2}));
    summary["dims"]["local"] = std::move(local);
    summary["rss_tss"]["total"] = report.total_rss_tss;
    summary["rss_tss"]["out_of_sample"] = report.out_of_sample;
    Json per_group = Json::object();
    for (int m = 0; m < M; ++m) per_group[group_names[m]] = report.group_rss_tss[m];
    summary["rss_tss"]["per_group"] = std::move(per_group);
    Json params = Json::array();
    long total_factors = 0, total_loading = 0;
    for (int m = 0; m < M; ++m) {
        Json entry;
        entry["group"] = group_names[m];
        entry["factors"] = report.params[m].factors;
        entry["loading_params"] = report.params[m].loading_params;
        entry["vectorized_loading_params"] = report.params[m].vectorized_loading_params;
        params.push_back(std::move(entry));
        total_factors += report.params[m].factors;
        total_loading += report.params[m].loading_params;
    }
    summary["parameter_count"]["per_group"] = std::move(params);
    summary["parameter_count"]["total_factors"] = total_factors;
    summary["parameter_count"]["total_loading_params"] = total_loading;
    summary["orthogonality_error"] = fit.loadings.max_orthogonality_error();

    std::ofstream out(dir / "report.json", std::ios::binary);
    out << summary.dump(2) << "\n";
}

}  // namespace mmfm
