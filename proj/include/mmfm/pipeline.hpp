#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "mmfm/fit.hpp"
#include "mmfm/metrics.hpp"
#include "mmfm/simulate.hpp"
#include "mmfm/types.hpp"

namespace mmfm {

struct IngestSpec {
    std::filesystem::path csv;
    std::string na_policy = "error";  // error | drop | ffill
    bool difference = false;
    bool standardize = false;
};

struct EstimatorConfig {
    std::optional<int> k1;  // nullopt = ratio estimator + majority vote
    std::optional<int> k2;
    std::optional<std::vector<std::pair<int, int>>> local_ranks;
    int h0 = 2;
    double eval_split = 0.0;  // fraction of T held out for out-of-sample RSS/TSS
    int display_scale = 0;    // extra scaled/rounded loading tables when > 0
    bool emit_signals = true;
};

struct SweepConfig {
    SimConfig base;  // dims, AR coefficients, noise; size fields overridden per cell
    std::vector<std::array<double, 4>> deltas{{0.0, 0.0, 0.0, 0.0}};
    std::vector<std::pair<int, int>> sizes{{20, 20}};  // (n, p)
    std::vector<double> t_multipliers{1.0};            // T = round(mult * n * p)
    std::vector<int> t_absolute;                       // overrides multipliers when nonempty
    int replications = 50;
    int h0 = 2;
    bool scale_x10 = false;  // additionally emit cells_x10.csv
};

struct RunConfig {
    int config_version = 1;
    std::string mode;  // simulate | fit | sweep
    std::uint64_t seed = 0;
    int threads = 1;
    std::filesystem::path output_dir = "out";
    SimConfig sim;
    SweepConfig sweep;
    IngestSpec data;
    EstimatorConfig estimator;
};

RunConfig parse_run_config(const std::string& json_text);
RunConfig load_run_config(const std::filesystem::path& path);
std::string serialize_run_config(const RunConfig& cfg);

/// Long-format panel CSV: group,time,row_id,col_id,value. Doubles are written
/// so that re-reading reproduces them bit-for-bit.
void write_panel_csv(const GroupedPanel& panel, const std::filesystem::path& path);

struct IngestResult {
    GroupedPanel panel;
    std::vector<std::vector<std::string>> row_ids;  // per group, first-appearance order
    std::vector<std::vector<std::string>> col_ids;  // per group, first-appearance order
    std::vector<long long> times;                   // ascending
    int dropped_times = 0;                          // under na_policy = drop
};

IngestResult ingest_csv(const std::filesystem::path& path, const std::string& na_policy = "error");

/// Differencing maps T -> T-1; standardization makes every (group,row,col)
/// series mean 0, sd 1. Zero-variance series under standardization throw.
GroupedPanel preprocess(const GroupedPanel& panel, bool difference, bool standardize);

struct CellKey {
    std::array<double, 4> deltas{};
    int n = 0, p = 0, t = 0;
};

struct ReplicationMeasure {
    bool failed = false;
    std::string error;
    std::vector<std::array<double, 4>> d_loading;  // per group: D for Q1..Q4
    std::vector<double> d_phi, d_psi;              // per group signal distances
    std::vector<bool> ranks_correct;               // per group joint (k1,k2,r1,r2)
    int k1_hat = 0, k2_hat = 0;
    std::vector<std::pair<int, int>> r_hat;
};

struct CellStats {
    CellKey key;
    int groups = 0;
    int replications = 0;
    int failures = 0;
    std::vector<std::array<double, 4>> mean_d, sd_d;  // per group
    std::vector<double> mean_phi, sd_phi, mean_psi, sd_psi;
    std::vector<double> rank_freq;
};

struct SweepResult {
    std::vector<CellKey> keys;
    std::vector<std::vector<ReplicationMeasure>> replications;  // per cell
    std::vector<CellStats> cells;
};

/// Per-cell statistics from the raw replication log; exposed so reported
/// aggregates can be recomputed and checked against cells.csv.
CellStats aggregate_cell(const CellKey& key, const std::vector<ReplicationMeasure>& reps, int groups);

/// Monte Carlo grid: for each (delta, size, T) cell runs simulate -> fit ->
/// measure with a per-(cell, replication) RNG stream; results do not depend
/// on the thread count.
SweepResult run_sweep(const SweepConfig& cfg, std::uint64_t seed, int threads);

void write_sweep_outputs(const SweepResult& result, const std::filesystem::path& dir,
                         bool scale_x10);

struct FitReport {
    FitResult fit;
    Matrix corr_raw, corr_post_global, corr_post_local;  // M x M summaries
    double total_rss_tss = 0.0;
    std::vector<double> group_rss_tss;
    std::vector<ParameterCount> params;
    std::vector<Matrix> q1_rot, q2_rot, q3_rot, q4_rot;  // varimax-rotated loadings
    bool out_of_sample = false;
};

FitReport fit_report(const GroupedPanel& panel, const EstimatorConfig& cfg);

void write_fit_report(const FitReport& report, const GroupedPanel& panel,
                      const IngestResult* labels, const std::filesystem::path& dir,
                      const EstimatorConfig& cfg);

/// CLI verb drivers; each writes config.resolved.json, outputs, manifest.json.
void run_simulate_verb(const RunConfig& cfg);
void run_fit_verb(const RunConfig& cfg);
void run_sweep_verb(const RunConfig& cfg);

}  // namespace mmfm
