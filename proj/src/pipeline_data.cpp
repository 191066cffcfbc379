#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include "mmfm/csv.hpp"
#include "mmfm/pipeline.hpp"

namespace mmfm {

namespace {

std::string cell_label(const std::string& group, long long time, const std::string& row,
                       const std::string& col) {
    std::ostringstream os;
    os << "group " << group << ", time " << time << ", row " << row << ", col " << col;
    return os.str();
}

bool is_na_field(std::string field) {
    std::transform(field.begin(), field.end(), field.begin(), ::tolower);
    return field.empty() || field == "na" || field == "nan";
}

}  // namespace

void write_panel_csv(const GroupedPanel& panel, const std::filesystem::path& path) {
    csv::Table table;
    table.header = {"group", "time", "row_id", "col_id", "value"};
    for (const GroupSeries& g : panel.groups) {
        for (int t = 0; t < g.time_len(); ++t)
            for (int i = 0; i < g.rows(); ++i)
                for (int j = 0; j < g.cols(); ++j)
                    table.rows.push_back({g.name, std::to_string(t + 1),
                                          "r" + std::to_string(i + 1), "c" + std::to_string(j + 1),
                                          csv::format_double(g.obs[t](i, j))});
    }
    csv::write_table(table, path);
}

IngestResult ingest_csv(const std::filesystem::path& path, const std::string& na_policy) {
    if (na_policy != "error" && na_policy != "drop" && na_policy != "ffill")
        throw std::invalid_argument("ingest: na_policy must be error, drop, or ffill");

    const csv::Table table = csv::read_table(path);
    auto column = [&](const std::string& name) {
        const auto it = std::find(table.header.begin(), table.header.end(), name);
        if (it == table.header.end())
            throw std::runtime_error("ingest: missing column '" + name + "'");
        return static_cast<std::size_t>(it - table.header.begin());
    };
    const std::size_t c_group = column("group"), c_time = column("time"), c_row = column("row_id"),
                      c_col = column("col_id"), c_value = column("value");
    if (table.rows.empty()) throw std::runtime_error("no rows");

    // First-appearance orderings for groups, rows, and columns; times sorted.
    std::vector<std::string> group_order;
    std::map<std::string, int> group_index;
    std::vector<std::vector<std::string>> row_order, col_order;
    std::vector<std::map<std::string, int>> row_index, col_index;
    std::set<long long> time_set;

    struct RawCell {
        int group;
        long long time;
        int row, col;
        double value;
    };
    std::vector<RawCell> cells;
    cells.reserve(table.rows.size());

    for (const auto& fields : table.rows) {
        if (fields.size() != table.header.size())
            throw std::runtime_error("ingest: ragged row with " + std::to_string(fields.size()) +
                                     " fields");
        const std::string& gname = fields[c_group];
        auto [git, inserted] = group_index.try_emplace(gname, static_cast<int>(group_order.size()));
        if (inserted) {
            group_order.push_back(gname);
            row_order.emplace_back();
            col_order.emplace_back();
            row_index.emplace_back();
            col_index.emplace_back();
        }
        const int g = git->second;

        long long time = 0;
        try {
            time = std::stoll(fields[c_time]);
        } catch (const std::exception&) {
            throw std::runtime_error("ingest: non-integer time '" + fields[c_time] + "'");
        }
        time_set.insert(time);

        auto [rit, rnew] = row_index[g].try_emplace(fields[c_row], static_cast<int>(row_order[g].size()));
        if (rnew) row_order[g].push_back(fields[c_row]);
        auto [cit, cnew] = col_index[g].try_emplace(fields[c_col], static_cast<int>(col_order[g].size()));
        if (cnew) col_order[g].push_back(fields[c_col]);

        const double value = is_na_field(fields[c_value])
                                 ? std::numeric_limits<double>::quiet_NaN()
                                 : csv::parse_double(fields[c_value]);
        cells.push_back({g, time, rit->second, cit->second, value});
    }

    const int M = static_cast<int>(group_order.size());
    std::vector<long long> times(time_set.begin(), time_set.end());
    std::map<long long, int> time_index;
    for (std::size_t i = 0; i < times.size(); ++i) time_index[times[i]] = static_cast<int>(i);
    const int T = static_cast<int>(times.size());

    const int p = static_cast<int>(col_order.front().size());
    for (int g = 0; g < M; ++g)
        if (static_cast<int>(col_order[g].size()) != p)
            throw std::runtime_error("ingest: group " + group_order[g] + " has " +
                                     std::to_string(col_order[g].size()) +
                                     " columns, expected " + std::to_string(p));

    GroupedPanel panel;
    panel.groups.resize(M);
    std::vector<std::vector<Matrix>> seen(M);
    for (int g = 0; g < M; ++g) {
        const int n = static_cast<int>(row_order[g].size());
        panel.groups[g].name = group_order[g];
        panel.groups[g].obs.assign(T, Matrix::Zero(n, p));
        seen[g].assign(T, Matrix::Zero(n, p));
    }

    for (const RawCell& cell : cells) {
        const int t = time_index.at(cell.time);
        double& flag = seen[cell.group][t](cell.row, cell.col);
        if (flag != 0.0)
            throw std::runtime_error("ingest: duplicate cell (" +
                                     cell_label(group_order[cell.group], cell.time,
                                                row_order[cell.group][cell.row],
                                                col_order[cell.group][cell.col]) +
                                     ")");
        flag = 1.0;
        panel.groups[cell.group].obs[t](cell.row, cell.col) = cell.value;
    }

    std::vector<std::string> gaps;
    for (int g = 0; g < M && static_cast<int>(gaps.size()) < 10; ++g)
        for (int t = 0; t < T && static_cast<int>(gaps.size()) < 10; ++t)
            for (int i = 0; i < panel.groups[g].rows() && static_cast<int>(gaps.size()) < 10; ++i)
                for (int j = 0; j < p; ++j) {
                    if (seen[g][t](i, j) == 0.0) {
                        gaps.push_back(cell_label(group_order[g], times[t], row_order[g][i],
                                                  col_order[g][j]));
                        if (gaps.size() >= 10) break;
                    }
                }
    if (!gaps.empty()) {
        std::ostringstream os;
        os << "ingest: missing grid cells (first " << gaps.size() << "):";
        for (const std::string& gap : gaps) os << "\n  " << gap;
        throw std::runtime_error(os.str());
    }

    IngestResult result;
    result.row_ids = std::move(row_order);
    result.col_ids = std::move(col_order);
    result.times = times;

    // Missing-value policy over the assembled grid.
    if (na_policy == "error") {
        for (int g = 0; g < M; ++g)
            for (int t = 0; t < T; ++t)
                if (!panel.groups[g].obs[t].allFinite())
                    throw std::runtime_error("ingest: missing value in group " + group_order[g] +
                                             " at time " + std::to_string(times[t]) +
                                             " (na_policy=error)");
    } else if (na_policy == "drop") {
        std::vector<bool> keep(T, true);
        for (int g = 0; g < M; ++g)
            for (int t = 0; t < T; ++t)
                if (!panel.groups[g].obs[t].allFinite()) keep[t] = false;
        GroupedPanel filtered;
        filtered.groups.resize(M);
        std::vector<long long> kept_times;
        for (int g = 0; g < M; ++g) filtered.groups[g].name = panel.groups[g].name;
        for (int t = 0; t < T; ++t) {
            if (!keep[t]) continue;
            for (int g = 0; g < M; ++g) filtered.groups[g].obs.push_back(panel.groups[g].obs[t]);
            kept_times.push_back(times[t]);
        }
        result.dropped_times = T - static_cast<int>(kept_times.size());
        panel = std::move(filtered);
        result.times = std::move(kept_times);
    } else {  // ffill
        for (int g = 0; g < M; ++g) {
            GroupSeries& series = panel.groups[g];
            for (int i = 0; i < series.rows(); ++i)
                for (int j = 0; j < p; ++j) {
                    if (std::isnan(series.obs[0](i, j)))
                        throw std::runtime_error("ingest: leading missing value in group " +
                                                 group_order[g] + " row " + result.row_ids[g][i] +
                                                 " col " + result.col_ids[g][j] +
                                                 " (cannot forward-fill)");
                    for (int t = 1; t < T; ++t)
                        if (std::isnan(series.obs[t](i, j)))
                            series.obs[t](i, j) = series.obs[t - 1](i, j);
                }
        }
    }

    result.panel = std::move(panel);
    return result;
}

GroupedPanel preprocess(const GroupedPanel& panel, bool difference, bool standardize) {
    GroupedPanel out = panel;

    if (difference) {
        if (out.time_len() < 2) throw std::invalid_argument("preprocess: differencing needs T >= 2");
        for (GroupSeries& g : out.groups) {
            std::vector<Matrix> diffed(g.obs.size() - 1);
            for (std::size_t t = 1; t < g.obs.size(); ++t) diffed[t - 1] = g.obs[t] - g.obs[t - 1];
            g.obs = std::move(diffed);
        }
    }

    if (standardize) {
        const int T = out.time_len();
        if (T < 2) throw std::invalid_argument("preprocess: standardization needs T >= 2");
        for (int m = 0; m < out.group_count(); ++m) {
            GroupSeries& g = out.groups[m];
            for (int i = 0; i < g.rows(); ++i)
                for (int j = 0; j < g.cols(); ++j) {
                    double mean = 0.0;
                    for (int t = 0; t < T; ++t) mean += g.obs[t](i, j);
                    mean /= T;
                    double var = 0.0;
                    for (int t = 0; t < T; ++t) {
                        const double d = g.obs[t](i, j) - mean;
                        var += d * d;
                    }
                    var /= (T - 1);
                    if (var <= 0.0) {
                        std::ostringstream os;
                        os << "preprocess: zero variance series group " << (g.name.empty()
                               ? std::to_string(m + 1) : g.name)
                           << " row " << (i + 1) << " col " << (j + 1);
                        throw std::runtime_error(os.str());
                    }
                    const double sd = std::sqrt(var);
                    for (int t = 0; t < T; ++t) g.obs[t](i, j) = (g.obs[t](i, j) - mean) / sd;
                }
        }
    }
    return out;
}

}  // namespace mmfm
