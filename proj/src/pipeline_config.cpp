#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "mmfm/pipeline.hpp"

namespace mmfm {

namespace {

using Json = nlohmann::ordered_json;

Matrix matrix_from_json(const Json& j) {
    if (!j.is_array() || j.empty() || !j.front().is_array())
        throw std::runtime_error("config: expected a 2-D array of numbers");
    const auto rows = j.size(), cols = j.front().size();
    Matrix m(rows, cols);
    for (std::size_t i = 0; i < rows; ++i) {
        if (j[i].size() != cols) throw std::runtime_error("config: ragged matrix");
        for (std::size_t k = 0; k < cols; ++k) m(i, k) = j[i][k].get<double>();
    }
    return m;
}

Json matrix_to_json(const Matrix& m) {
    Json rows = Json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        Json row = Json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

Matrix constant_ar(int rows, int cols, double value) {
    return Matrix::Constant(rows, cols, value);
}

// The three-group design's AR matrices when the dimensions allow, otherwise a
// flat 0.5 so factors stay autocorrelated.
Matrix default_global_ar(int k1, int k2) {
    if (k1 == 3 && k2 == 2) {
        Matrix m(3, 2);
        m << -0.5, 0.6, 0.8, -0.4, 0.7, 0.3;
        return m;
    }
    return constant_ar(k1, k2, 0.5);
}

Matrix default_local_ar(int r1, int r2) {
    if (r1 == 2 && r2 == 2) {
        Matrix m(2, 2);
        m << -0.5, 0.6, 0.8, -0.4;
        return m;
    }
    return constant_ar(r1, r2, 0.5);
}

std::vector<std::pair<int, int>> parse_rank_pairs(const Json& j, int groups) {
    std::vector<std::pair<int, int>> pairs;
    if (j.is_array() && j.size() == 2 && j[0].is_number()) {
        pairs.assign(groups, {j[0].get<int>(), j[1].get<int>()});
    } else if (j.is_array()) {
        for (const auto& item : j) {
            if (!item.is_array() || item.size() != 2)
                throw std::runtime_error("config: local rank entries must be [r1, r2]");
            pairs.emplace_back(item[0].get<int>(), item[1].get<int>());
        }
    } else {
        throw std::runtime_error("config: local_ranks must be [r1, r2] or a list of pairs");
    }
    return pairs;
}

SimConfig parse_sim(const Json& j) {
    SimConfig sim;
    sim.groups = j.value("groups", 3);
    sim.rows = j.value("rows", 20);
    sim.cols = j.value("cols", 20);
    sim.time_len = j.value("time_len", 400);
    sim.dims.k1 = j.value("k1", 3);
    sim.dims.k2 = j.value("k2", 2);
    if (j.contains("local_ranks"))
        sim.dims.local = parse_rank_pairs(j.at("local_ranks"), sim.groups);
    else
        sim.dims.local.assign(sim.groups, {2, 2});
    if (static_cast<int>(sim.dims.local.size()) != sim.groups)
        throw std::runtime_error("config: local_ranks must cover every group");

    if (j.contains("deltas")) {
        const auto& d = j.at("deltas");
        if (!d.is_array() || d.size() != 4)
            throw std::runtime_error("config: deltas must have four entries");
        for (int i = 0; i < 4; ++i) sim.deltas[i] = d[i].get<double>();
    }

    sim.global_ar = j.contains("global_ar") ? matrix_from_json(j.at("global_ar"))
                                            : default_global_ar(sim.dims.k1, sim.dims.k2);
    if (j.contains("local_ar")) {
        const auto& la = j.at("local_ar");
        if (la.is_array() && !la.empty() && la.front().is_array() && !la.front().empty() &&
            la.front().front().is_array()) {
            for (const auto& item : la) sim.local_ar.push_back(matrix_from_json(item));
            if (static_cast<int>(sim.local_ar.size()) != sim.groups)
                throw std::runtime_error("config: local_ar list must cover every group");
        } else {
            sim.local_ar.assign(sim.groups, matrix_from_json(la));
        }
    } else {
        sim.local_ar.clear();
        for (auto [r1, r2] : sim.dims.local) sim.local_ar.push_back(default_local_ar(r1, r2));
    }

    sim.noise_offdiag = j.value("noise_offdiag", 0.2);
    sim.noise_scale = j.value("noise_scale", 1.0);
    sim.seed = j.value("seed", std::uint64_t{0});
    sim.burn_in = j.value("burn_in", 200);
    return sim;
}

Json sim_to_json(const SimConfig& sim) {
    Json j;
    j["groups"] = sim.groups;
    j["rows"] = sim.rows;
    j["cols"] = sim.cols;
    j["time_len"] = sim.time_len;
    j["k1"] = sim.dims.k1;
    j["k2"] = sim.dims.k2;
    Json local = Json::array();
    for (auto [r1, r2] : sim.dims.local) local.push_back(Json::array({r1, r2}));
    j["local_ranks"] = std::move(local);
    j["deltas"] = sim.deltas;
    j["global_ar"] = matrix_to_json(sim.global_ar);
    Json local_ar = Json::array();
    for (const Matrix& m : sim.local_ar) local_ar.push_back(matrix_to_json(m));
    j["local_ar"] = std::move(local_ar);
    j["noise_offdiag"] = sim.noise_offdiag;
    j["noise_scale"] = sim.noise_scale;
    j["burn_in"] = sim.burn_in;
    return j;
}

std::optional<int> parse_auto_int(const Json& j, const char* key) {
    if (!j.contains(key) || (j.at(key).is_string() && j.at(key) == "auto")) return std::nullopt;
    return j.at(key).get<int>();
}

}  // namespace

RunConfig parse_run_config(const std::string& json_text) {
    Json j;
    try {
        j = Json::parse(json_text);
    } catch (const std::exception& e) {
        throw std::runtime_error(std::string("config: invalid JSON: ") + e.what());
    }

    RunConfig cfg;
    cfg.config_version = j.value("config_version", 1);
    if (cfg.config_version != 1) throw std::runtime_error("config: unsupported config_version");
    cfg.mode = j.value("mode", "");
    cfg.seed = j.value("seed", std::uint64_t{0});
    cfg.threads = j.value("threads", 1);
    cfg.output_dir = j.value("output_dir", std::string("out"));

    if (j.contains("sim"))
        cfg.sim = parse_sim(j.at("sim"));
    else
        cfg.sim = SimConfig::defaults(20, 20, 400);

    if (j.contains("sweep")) {
        const Json& s = j.at("sweep");
        cfg.sweep.base = cfg.sim;
        if (s.contains("deltas")) {
            cfg.sweep.deltas.clear();
            for (const auto& d : s.at("deltas")) {
                if (!d.is_array() || d.size() != 4)
                    throw std::runtime_error("config: sweep deltas entries must have four values");
                std::array<double, 4> cell{};
                for (int i = 0; i < 4; ++i) cell[i] = d[i].get<double>();
                cfg.sweep.deltas.push_back(cell);
            }
        }
        if (s.contains("sizes")) {
            cfg.sweep.sizes.clear();
            for (const auto& item : s.at("sizes"))
                cfg.sweep.sizes.emplace_back(item[0].get<int>(), item[1].get<int>());
        }
        if (s.contains("t_multipliers"))
            cfg.sweep.t_multipliers = s.at("t_multipliers").get<std::vector<double>>();
        if (s.contains("t_absolute"))
            cfg.sweep.t_absolute = s.at("t_absolute").get<std::vector<int>>();
        cfg.sweep.replications = s.value("replications", 50);
        cfg.sweep.h0 = s.value("h0", 2);
        cfg.sweep.scale_x10 = s.value("scale_x10", false);
    } else {
        cfg.sweep.base = cfg.sim;
    }

    if (j.contains("data")) {
        const Json& d = j.at("data");
        cfg.data.csv = d.value("csv", std::string(""));
        cfg.data.na_policy = d.value("na_policy", std::string("error"));
        cfg.data.difference = d.value("difference", false);
        cfg.data.standardize = d.value("standardize", false);
    }

    if (j.contains("estimator")) {
        const Json& e = j.at("estimator");
        cfg.estimator.k1 = parse_auto_int(e, "k1");
        cfg.estimator.k2 = parse_auto_int(e, "k2");
        if (e.contains("local_ranks") && !(e.at("local_ranks").is_string())) {
            // size resolved against the panel later; broadcast handled by fit_panel
            auto pairs = parse_rank_pairs(e.at("local_ranks"), 1);
            cfg.estimator.local_ranks = std::move(pairs);
        }
        cfg.estimator.h0 = e.value("h0", 2);
        cfg.estimator.eval_split = e.value("eval_split", 0.0);
        cfg.estimator.display_scale = e.value("display_scale", 0);
        cfg.estimator.emit_signals = e.value("emit_signals", true);
    }
    return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("config: cannot open " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_run_config(buffer.str());
}

std::string serialize_run_config(const RunConfig& cfg) {
    Json j;
    j["config_version"] = cfg.config_version;
    j["mode"] = cfg.mode;
    j["seed"] = cfg.seed;
    j["threads"] = cfg.threads;
    j["output_dir"] = cfg.output_dir.generic_string();
    j["sim"] = sim_to_json(cfg.mode == "sweep" ? cfg.sweep.base : cfg.sim);

    Json sweep;
    Json deltas = Json::array();
    for (const auto& d : cfg.sweep.deltas) deltas.push_back(d);
    sweep["deltas"] = std::move(deltas);
    Json sizes = Json::array();
    for (auto [n, p] : cfg.sweep.sizes) sizes.push_back(Json::array({n, p}));
    sweep["sizes"] = std::move(sizes);
    sweep["t_multipliers"] = cfg.sweep.t_multipliers;
    sweep["t_absolute"] = cfg.sweep.t_absolute;
    sweep["replications"] = cfg.sweep.replications;
    sweep["h0"] = cfg.sweep.h0;
    sweep["scale_x10"] = cfg.sweep.scale_x10;
    j["sweep"] = std::move(sweep);

    Json data;
    data["csv"] = cfg.data.csv.generic_string();
    data["na_policy"] = cfg.data.na_policy;
    data["difference"] = cfg.data.difference;
    data["standardize"] = cfg.data.standardize;
    j["data"] = std::move(data);

    Json est;
    if (cfg.estimator.k1)
        est["k1"] = *cfg.estimator.k1;
    else
        est["k1"] = "auto";
    if (cfg.estimator.k2)
        est["k2"] = *cfg.estimator.k2;
    else
        est["k2"] = "auto";
    if (cfg.estimator.local_ranks) {
        Json ranks = Json::array();
        for (auto [r1, r2] : *cfg.estimator.local_ranks) ranks.push_back(Json::array({r1, r2}));
        est["local_ranks"] = std::move(ranks);
    } else {
        est["local_ranks"] = "auto";
    }
    est["h0"] = cfg.estimator.h0;
    est["eval_split"] = cfg.estimator.eval_split;
    est["display_scale"] = cfg.estimator.display_scale;
    est["emit_signals"] = cfg.estimator.emit_signals;
    j["estimator"] = std::move(est);

    return j.dump(2) + "\n";
}

}  // namespace mmfm
