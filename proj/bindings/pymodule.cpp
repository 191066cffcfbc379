#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "mmfm/fit.hpp"
#include "mmfm/global_stage.hpp"
#include "mmfm/local_stage.hpp"
#include "mmfm/metrics.hpp"
#include "mmfm/numerics.hpp"
#include "mmfm/simulate.hpp"
#include "mmfm/types.hpp"

namespace py = pybind11;

namespace {

// Panels cross the boundary as a list of (T, N_m, p) float64 arrays.
mmfm::GroupedPanel panel_from_arrays(const std::vector<py::array_t<double>>& arrays) {
    mmfm::GroupedPanel panel;
    panel.groups.resize(arrays.size());
    for (std::size_t m = 0; m < arrays.size(); ++m) {
        auto buf = arrays[m].unchecked<3>();
        mmfm::GroupSeries& g = panel.groups[m];
        g.name = "g" + std::to_string(m + 1);
        g.obs.resize(buf.shape(0));
        for (py::ssize_t t = 0; t < buf.shape(0); ++t) {
            mmfm::Matrix x(buf.shape(1), buf.shape(2));
            for (py::ssize_t i = 0; i < buf.shape(1); ++i)
                for (py::ssize_t j = 0; j < buf.shape(2); ++j) x(i, j) = buf(t, i, j);
            g.obs[t] = std::move(x);
        }
    }
    return panel;
}

py::array_t<double> series_to_array(const std::vector<mmfm::Matrix>& series) {
    const py::ssize_t t_len = static_cast<py::ssize_t>(series.size());
    const py::ssize_t rows = series.empty() ? 0 : series.front().rows();
    const py::ssize_t cols = series.empty() ? 0 : series.front().cols();
    py::array_t<double> out({t_len, rows, cols});
    auto buf = out.mutable_unchecked<3>();
    for (py::ssize_t t = 0; t < t_len; ++t)
        for (py::ssize_t i = 0; i < rows; ++i)
            for (py::ssize_t j = 0; j < cols; ++j) buf(t, i, j) = series[t](i, j);
    return out;
}

py::list series_list(const std::vector<std::vector<mmfm::Matrix>>& per_group) {
    py::list out;
    for (const auto& series : per_group) out.append(series_to_array(series));
    return out;
}

py::list matrix_list(const std::vector<mmfm::Matrix>& matrices) {
    py::list out;
    for (const auto& m : matrices) out.append(m);
    return out;
}

mmfm::SimConfig build_sim_config(int groups, int rows, int cols, int time_len, int k1, int k2,
                                 const std::vector<std::pair<int, int>>& local_ranks,
                                 const std::array<double, 4>& deltas,
                                 std::optional<mmfm::Matrix> global_ar,
                                 std::optional<mmfm::Matrix> local_ar, double noise_offdiag,
                                 double noise_scale, std::uint64_t seed, int burn_in) {
    mmfm::SimConfig cfg = mmfm::SimConfig::defaults(rows, cols, time_len);
    cfg.groups = groups;
    cfg.dims.k1 = k1;
    cfg.dims.k2 = k2;
    cfg.dims.local = local_ranks.size() == 1
                         ? std::vector<std::pair<int, int>>(groups, local_ranks.front())
                         : local_ranks;
    cfg.deltas = deltas;
    if (global_ar)
        cfg.global_ar = *global_ar;
    else if (!(k1 == 3 && k2 == 2))
        cfg.global_ar = mmfm::Matrix::Constant(k1, k2, 0.5);
    cfg.local_ar.clear();
    for (auto [r1, r2] : cfg.dims.local) {
        if (local_ar)
            cfg.local_ar.push_back(*local_ar);
        else if (r1 == 2 && r2 == 2) {
            mmfm::Matrix m(2, 2);
            m << -0.5, 0.6, 0.8, -0.4;
            cfg.local_ar.push_back(m);
        } else {
            cfg.local_ar.push_back(mmfm::Matrix::Constant(r1, r2, 0.5));
        }
    }
    cfg.noise_offdiag = noise_offdiag;
    cfg.noise_scale = noise_scale;
    cfg.seed = seed;
    cfg.burn_in = burn_in;
    return cfg;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Multilevel matrix factor model: estimation, simulation, and metrics";

    m.def("sym_eig",
          [](const mmfm::Matrix& a) {
              mmfm::EigenResult r = mmfm::sym_eig(a);
              return py::make_tuple(r.values, r.vectors);
          },
          py::arg("a"), "Symmetric eigendecomposition (values descending, deterministic signs)");

    m.def("thin_qr",
          [](const mmfm::Matrix& a) {
              mmfm::QrResult r = mmfm::thin_qr(a);
              return py::make_tuple(r.q, r.r);
          },
          py::arg("a"), "Thin QR with positive diagonal of R");

    m.def("ls_solve",
          [](const mmfm::Matrix& a, const mmfm::Matrix& y) { return mmfm::ls_solve(a, y).solution; },
          py::arg("a"), py::arg("y"), "Least-squares solution of min ||A Z - Y||_F");

    m.def("varimax",
          [](const mmfm::Matrix& l, int max_iter, double tol) {
              mmfm::VarimaxResult r = mmfm::varimax(l, max_iter, tol);
              return py::make_tuple(r.rotated, r.rotation);
          },
          py::arg("loadings"), py::arg("max_iter") = 100, py::arg("tol") = 1e-8);

    m.def("subspace_distance", &mmfm::subspace_distance, py::arg("o1"), py::arg("o2"));

    m.def("estimate_rank",
          [](const mmfm::Vector& ladder, int dim_cap) { return mmfm::estimate_rank(ladder, dim_cap); },
          py::arg("ladder"), py::arg("dim_cap"));

    m.def("compute_w1",
          [](const std::vector<py::array_t<double>>& panel, int group) {
              return mmfm::compute_w1(panel_from_arrays(panel), group);
          },
          py::arg("panel"), py::arg("group"));

    m.def("compute_w2",
          [](const std::vector<py::array_t<double>>& panel, int group) {
              return mmfm::compute_w2(panel_from_arrays(panel), group);
          },
          py::arg("panel"), py::arg("group"));

    m.def("compute_m",
          [](const py::array_t<double>& series, int h0) {
              auto buf = series.unchecked<3>();
              std::vector<mmfm::Matrix> y(buf.shape(0));
              for (py::ssize_t t = 0; t < buf.shape(0); ++t) {
                  mmfm::Matrix x(buf.shape(1), buf.shape(2));
                  for (py::ssize_t i = 0; i < buf.shape(1); ++i)
                      for (py::ssize_t j = 0; j < buf.shape(2); ++j) x(i, j) = buf(t, i, j);
                  y[t] = std::move(x);
              }
              return mmfm::compute_m(y, h0);
          },
          py::arg("series"), py::arg("h0") = 2);

    m.def("rss_tss",
          [](const py::array_t<double>& x, const py::array_t<double>& x_hat) {
              auto to_series = [](const py::array_t<double>& arr) {
                  auto buf = arr.unchecked<3>();
                  std::vector<mmfm::Matrix> out(buf.shape(0));
                  for (py::ssize_t t = 0; t < buf.shape(0); ++t) {
                      mmfm::Matrix m_(buf.shape(1), buf.shape(2));
                      for (py::ssize_t i = 0; i < buf.shape(1); ++i)
                          for (py::ssize_t j = 0; j < buf.shape(2); ++j) m_(i, j) = buf(t, i, j);
                      out[t] = std::move(m_);
                  }
                  return out;
              };
              return mmfm::rss_tss(to_series(x), to_series(x_hat));
          },
          py::arg("x"), py::arg("x_hat"));

    m.def("parameter_count",
          [](int k1, int k2, int r1, int r2, int rows, int cols) {
              const mmfm::ParameterCount c = mmfm::parameter_count(k1, k2, r1, r2, rows, cols);
              py::dict out;
              out["factors"] = c.factors;
              out["loading_params"] = c.loading_params;
              out["vectorized_loading_params"] = c.vectorized_loading_params;
              return out;
          },
          py::arg("k1"), py::arg("k2"), py::arg("r1"), py::arg("r2"), py::arg("rows"),
          py::arg("cols"));

    m.def("correlation_summary",
          [](const std::vector<py::array_t<double>>& panel) {
              return mmfm::correlation_summary(panel_from_arrays(panel));
          },
          py::arg("panel"));

    m.def("simulate",
          [](int groups, int rows, int cols, int time_len, int k1, int k2,
             const std::vector<std::pair<int, int>>& local_ranks, const std::array<double, 4>& deltas,
             std::optional<mmfm::Matrix> global_ar, std::optional<mmfm::Matrix> local_ar,
             double noise_offdiag, double noise_scale, std::uint64_t seed, int burn_in) {
              const mmfm::SimConfig cfg =
                  build_sim_config(groups, rows, cols, time_len, k1, k2, local_ranks, deltas,
                                   std::move(global_ar), std::move(local_ar), noise_offdiag,
                                   noise_scale, seed, burn_in);
              auto [panel, truth] = mmfm::simulate(cfg);
              py::list arrays;
              for (const auto& g : panel.groups) arrays.append(series_to_array(g.obs));
              py::dict truth_dict;
              truth_dict["q1"] = matrix_list(truth.Q1);
              truth_dict["q2"] = matrix_list(truth.Q2);
              truth_dict["q3"] = matrix_list(truth.Q3);
              truth_dict["q4"] = matrix_list(truth.Q4);
              truth_dict["psi"] = series_list(truth.Psi);
              truth_dict["phi"] = series_list(truth.Phi);
              truth_dict["g"] = series_to_array(truth.G);
              return py::make_tuple(arrays, truth_dict);
          },
          py::arg("groups") = 3, py::arg("rows") = 20, py::arg("cols") = 20,
          py::arg("time_len") = 400, py::arg("k1") = 3, py::arg("k2") = 2,
          py::arg("local_ranks") = std::vector<std::pair<int, int>>{{2, 2}},
          py::arg("deltas") = std::array<double, 4>{0, 0, 0, 0},
          py::arg("global_ar") = std::nullopt, py::arg("local_ar") = std::nullopt,
          py::arg("noise_offdiag") = 0.2, py::arg("noise_scale") = 1.0, py::arg("seed") = 0,
          py::arg("burn_in") = 200);

    m.def("fit",
          [](const std::vector<py::array_t<double>>& panel, std::optional<int> k1,
             std::optional<int> k2, std::optional<std::vector<std::pair<int, int>>> local_ranks,
             int h0) {
              mmfm::FitOptions options;
              options.k1 = k1;
              options.k2 = k2;
              options.local_ranks = std::move(local_ranks);
              options.h0 = h0;
              const mmfm::FitResult fit = mmfm::fit_panel(panel_from_arrays(panel), options);

              py::dict out;
              out["k1"] = fit.dims.k1;
              out["k2"] = fit.dims.k2;
              out["local_ranks"] = fit.dims.local;
              py::list q1, q2, q3, q4, b1, b2;
              for (const auto& g : fit.loadings.groups) {
                  q1.append(g.Q1);
                  q2.append(g.Q2);
                  q3.append(g.Q3);
                  q4.append(g.Q4);
                  b1.append(g.B1);
                  b2.append(g.B2);
              }
              out["q1"] = q1;
              out["q2"] = q2;
              out["q3"] = q3;
              out["q4"] = q4;
              out["b1"] = b1;
              out["b2"] = b2;
              out["s"] = series_list(fit.S);
              out["z"] = series_list(fit.Z);
              out["psi"] = series_list(fit.Psi);
              out["phi"] = series_list(fit.Phi);
              out["residual"] = series_list(fit.residual);
              py::dict diag;
              auto ladders = [](const std::vector<mmfm::RankDiagnostics>& list) {
                  py::list out_list;
                  for (const auto& d : list) {
                      py::dict entry;
                      entry["eigenvalues"] = d.eigenvalues;
                      entry["ratios"] = d.ratios;
                      entry["selected"] = d.selected;
                      out_list.append(entry);
                  }
                  return out_list;
              };
              diag["global_row"] = ladders(fit.diagnostics.global_row);
              diag["global_col"] = ladders(fit.diagnostics.global_col);
              diag["local_row"] = ladders(fit.diagnostics.local_row);
              diag["local_col"] = ladders(fit.diagnostics.local_col);
              out["diagnostics"] = diag;
              return out;
          },
          py::arg("panel"), py::arg("k1") = std::nullopt, py::arg("k2") = std::nullopt,
          py::arg("local_ranks") = std::nullopt, py::arg("h0") = 2);
}
