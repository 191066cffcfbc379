#include <atomic>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <thread>

#include "mmfm/csv.hpp"
#include "mmfm/global_stage.hpp"
#include "mmfm/local_stage.hpp"
#include "mmfm/metrics.hpp"
#include "mmfm/pipeline.hpp"
#include "mmfm/rng.hpp"
#include "mmfm/signals.hpp"

namespace mmfm {

namespace {

void parallel_for(int count, int threads, const std::function<void(int)>& body) {
    threads = std::max(1, std::min(threads, count));
    if (threads == 1) {
        for (int i = 0; i < count; ++i) body(i);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (int w = 0; w < threads; ++w)
        pool.emplace_back([&] {
            for (int i = next.fetch_add(1); i < count; i = next.fetch_add(1)) body(i);
        });
    for (std::thread& t : pool) t.join();
}

// One simulate -> fit -> measure pass. Loading and signal errors come from
// the fit at the true ranks; rank-selection hits use the estimated ranks.
ReplicationMeasure measure_replication(const SimConfig& cell, int h0) {
    ReplicationMeasure meas;
    try {
        auto [panel, truth] = simulate(cell);
        const int M = panel.group_count();
        const FactorDims& dims = cell.dims;

        GlobalFit global = fit_global(panel, dims.k1, dims.k2);
        meas.k1_hat = global.k1_auto;
        meas.k2_hat = global.k2_auto;
        const bool k_correct = global.k1_auto == dims.k1 && global.k2_auto == dims.k2;

        meas.d_loading.resize(M);
        meas.d_phi.resize(M);
        meas.d_psi.resize(M);
        meas.ranks_correct.resize(M);
        meas.r_hat.resize(M);

        for (int m = 0; m < M; ++m) {
            const GroupSeries& group = panel.groups[m];
            const auto [r1, r2] = dims.local[m];
            const ProjectedSeries proj = project(group, global.B1[m], global.B2[m]);
            const LocalFit local = fit_local(proj, global.B1[m], r1, r2, h0);

            meas.d_loading[m] = {subspace_distance(global.Q1[m], truth.Q1[m]),
                                 subspace_distance(global.Q2[m], truth.Q2[m]),
                                 subspace_distance(local.Q3, truth.Q3[m]),
                                 subspace_distance(local.Q4, truth.Q4[m])};

            const LocalSignal local_sig = recover_local(proj.y1, local.Q3, local.Q4, global.B1[m]);
            const GlobalSignal global_sig =
                recover_global(group.obs, local_sig.Phi, global.Q1[m], global.Q2[m]);
            meas.d_phi[m] = signal_distance(local_sig.Phi, truth.Phi[m]);
            meas.d_psi[m] = signal_distance(global_sig.Psi, truth.Psi[m]);

            if (k_correct) {
                meas.r_hat[m] = {local.row_diag.selected, local.col_diag.selected};
            } else {
                // Re-project with the estimated global ranks before selecting
                // the local ranks, as the automatic path would.
                auto [q1h, b1h] = split_loading(global.row_eig[m].vectors, global.k1_auto);
                auto [q2h, b2h] = split_loading(global.col_eig[m].vectors, global.k2_auto);
                const LocalFit auto_local = fit_local(group, b1h, b2h, std::nullopt, std::nullopt, h0);
                meas.r_hat[m] = {auto_local.row_diag.selected, auto_local.col_diag.selected};
            }
            meas.ranks_correct[m] =
                k_correct && meas.r_hat[m].first == r1 && meas.r_hat[m].second == r2;
        }
    } catch (const std::exception& e) {
        meas.failed = true;
        meas.error = e.what();
    }
    return meas;
}

}  // namespace

CellStats aggregate_cell(const CellKey& key, const std::vector<ReplicationMeasure>& reps,
                         int groups) {
    CellStats stats;
    stats.key = key;
    stats.groups = groups;
    stats.replications = static_cast<int>(reps.size());
    stats.mean_d.assign(groups, {});
    stats.sd_d.assign(groups, {});
    stats.mean_phi.assign(groups, 0.0);
    stats.sd_phi.assign(groups, 0.0);
    stats.mean_psi.assign(groups, 0.0);
    stats.sd_psi.assign(groups, 0.0);
    stats.rank_freq.assign(groups, 0.0);

    std::vector<const ReplicationMeasure*> good;
    for (const auto& rep : reps) {
        if (rep.failed)
            ++stats.failures;
        else
            good.push_back(&rep);
    }
    if (good.empty()) return stats;
    const double count = static_cast<double>(good.size());

    auto mean_sd = [&](const std::function<double(const ReplicationMeasure&)>& pick) {
        double mean = 0.0;
        for (const auto* rep : good) mean += pick(*rep);
        mean /= count;
        double ss = 0.0;
        for (const auto* rep : good) {
            const double d = pick(*rep) - mean;
            ss += d * d;
        }
        const double sd = good.size() > 1 ? std::sqrt(ss / (count - 1.0)) : 0.0;
        return std::pair{mean, sd};
    };

    for (int m = 0; m < groups; ++m) {
        for (int i = 0; i < 4; ++i) {
            auto [mean, sd] = mean_sd([m, i](const ReplicationMeasure& r) { return r.d_loading[m][i]; });
            stats.mean_d[m][i] = mean;
            stats.sd_d[m][i] = sd;
        }
        std::tie(stats.mean_phi[m], stats.sd_phi[m]) =
            mean_sd([m](const ReplicationMeasure& r) { return r.d_phi[m]; });
        std::tie(stats.mean_psi[m], stats.sd_psi[m]) =
            mean_sd([m](const ReplicationMeasure& r) { return r.d_psi[m]; });
        double hits = 0.0;
        for (const auto* rep : good) hits += rep->ranks_correct[m] ? 1.0 : 0.0;
        stats.rank_freq[m] = hits / count;
    }
    return stats;
}

SweepResult run_sweep(const SweepConfig& cfg, std::uint64_t seed, int threads) {
    if (cfg.replications < 1) throw std::invalid_argument("run_sweep: replications must be >= 1");

    SweepResult result;
    for (const auto& deltas : cfg.deltas)
        for (const auto& [n, p] : cfg.sizes) {
            if (!cfg.t_absolute.empty()) {
                for (int t : cfg.t_absolute) result.keys.push_back({deltas, n, p, t});
            } else {
                for (double mult : cfg.t_multipliers)
                    result.keys.push_back(
                        {deltas, n, p, static_cast<int>(std::llround(mult * n * p))});
            }
        }

    const int cells = static_cast<int>(result.keys.size());
    const int reps = cfg.replications;
    result.replications.assign(cells, std::vector<ReplicationMeasure>(reps));

    parallel_for(cells * reps, threads, [&](int task) {
        const int cell = task / reps;
        const int rep = task % reps;
        const CellKey& key = result.keys[cell];

        SimConfig sim = cfg.base;
        sim.rows = key.n;
        sim.cols = key.p;
        sim.time_len = key.t;
        sim.deltas = key.deltas;
        sim.seed = derive_seed(seed, {static_cast<std::uint64_t>(cell), static_cast<std::uint64_t>(rep)});
        result.replications[cell][rep] = measure_replication(sim, cfg.h0);
    });

    result.cells.reserve(cells);
    for (int c = 0; c < cells; ++c)
        result.cells.push_back(aggregate_cell(result.keys[c], result.replications[c], cfg.base.groups));
    return result;
}

namespace {

std::string fmt(double v) { return csv::format_double(v); }

csv::Table cells_table(const SweepResult& result, double scale) {
    csv::Table table;
    table.header = {"delta1", "delta2",    "delta3",    "delta4",  "n",
                    "p",      "T",         "group",     "replications", "failures",
                    "d_q1_mean", "d_q1_sd", "d_q2_mean", "d_q2_sd", "d_q3_mean",
                    "d_q3_sd",   "d_q4_mean", "d_q4_sd", "rank_freq", "d_phi_mean",
                    "d_phi_sd",  "d_psi_mean", "d_psi_sd"};
    for (const CellStats& cell : result.cells) {
        for (int m = 0; m < cell.groups; ++m) {
            std::vector<std::string> row;
            for (double d : cell.key.deltas) row.push_back(fmt(d));
            row.push_back(std::to_string(cell.key.n));
            row.push_back(std::to_string(cell.key.p));
            row.push_back(std::to_string(cell.key.t));
            row.push_back(std::to_string(m + 1));
            row.push_back(std::to_string(cell.replications));
            row.push_back(std::to_string(cell.failures));
            for (int i = 0; i < 4; ++i) {
                row.push_back(fmt(scale * cell.mean_d[m][i]));
                row.push_back(fmt(scale * cell.sd_d[m][i]));
            }
            row.push_back(fmt(cell.rank_freq[m]));
            row.push_back(fmt(scale * cell.mean_phi[m]));
            row.push_back(fmt(scale * cell.sd_phi[m]));
            row.push_back(fmt(scale * cell.mean_psi[m]));
            row.push_back(fmt(scale * cell.sd_psi[m]));
            table.rows.push_back(std::move(row));
        }
    }
    return table;
}

}  // namespace

void write_sweep_outputs(const SweepResult& result, const std::filesystem::path& dir,
                         bool scale_x10) {
    csv::write_table(cells_table(result, 1.0), dir / "cells.csv");
    if (scale_x10) csv::write_table(cells_table(result, 10.0), dir / "cells_x10.csv");

    csv::Table reps;
    reps.header = {"delta1", "delta2", "delta3", "delta4", "n",     "p",     "T",
                   "rep",    "group",  "failed", "d_q1",   "d_q2",  "d_q3",  "d_q4",
                   "d_phi",  "d_psi",  "rank_correct", "k1_hat", "k2_hat", "r1_hat",
                   "r2_hat", "error"};
    for (std::size_t c = 0; c < result.keys.size(); ++c) {
        const CellKey& key = result.keys[c];
        for (std::size_t r = 0; r < result.replications[c].size(); ++r) {
            const ReplicationMeasure& meas = result.replications[c][r];
            const int groups = meas.failed ? 1 : static_cast<int>(meas.d_loading.size());
            for (int m = 0; m < groups; ++m) {
                std::vector<std::string> row;
                for (double d : key.deltas) row.push_back(fmt(d));
                row.push_back(std::to_string(key.n));
                row.push_back(std::to_string(key.p));
                row.push_back(std::to_string(key.t));
                row.push_back(std::to_string(r + 1));
                row.push_back(std::to_string(m + 1));
                row.push_back(meas.failed ? "1" : "0");
                if (meas.failed) {
                    for (int i = 0; i < 11; ++i) row.emplace_back();
                    std::string error = meas.error;
                    for (char& ch : error)
                        if (ch == ',' || ch == '\n') ch = ';';
                    row.push_back(error);
                } else {
                    for (int i = 0; i < 4; ++i) row.push_back(fmt(meas.d_loading[m][i]));
                    row.push_back(fmt(meas.d_phi[m]));
                    row.push_back(fmt(meas.d_psi[m]));
                    row.push_back(meas.ranks_correct[m] ? "1" : "0");
                    row.push_back(std::to_string(meas.k1_hat));
                    row.push_back(std::to_string(meas.k2_hat));
                    row.push_back(std::to_string(meas.r_hat[m].first));
                    row.push_back(std::to_string(meas.r_hat[m].second));
                    row.emplace_back();
                }
                reps.rows.push_back(std::move(row));
            }
        }
    }
    csv::write_table(reps, dir / "replications.csv");
}

}  // namespace mmfm
