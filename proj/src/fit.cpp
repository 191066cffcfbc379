#include "mmfm/fit.hpp"

#include <stdexcept>

#include "mmfm/global_stage.hpp"
#include "mmfm/local_stage.hpp"
#include "mmfm/signals.hpp"

namespace mmfm {

FitResult fit_panel(const GroupedPanel& panel, const FitOptions& options) {
    const int M = panel.group_count();

    GlobalFit global = fit_global(panel, options.k1, options.k2);

    std::vector<std::pair<int, int>> requested;
    if (options.local_ranks) {
        requested = *options.local_ranks;
        if (requested.size() == 1) requested.assign(M, requested.front());
        if (static_cast<int>(requested.size()) != M)
            throw std::invalid_argument("fit_panel: need one local rank pair per group");
    }

    FitResult result;
    result.dims.k1 = global.k1;
    result.dims.k2 = global.k2;
    result.dims.local.resize(M);
    result.loadings.groups.resize(M);
    result.S.resize(M);
    result.Z.resize(M);
    result.Psi.resize(M);
    result.Phi.resize(M);
    result.residual.resize(M);
    result.diagnostics.global_row = global.row_diag;
    result.diagnostics.global_col = global.col_diag;
    result.diagnostics.local_row.resize(M);
    result.diagnostics.local_col.resize(M);

    for (int m = 0; m < M; ++m) {
        const GroupSeries& group = panel.groups[m];
        const ProjectedSeries proj = project(group, global.B1[m], global.B2[m]);

        std::optional<int> r1, r2;
        if (!requested.empty()) {
            r1 = requested[m].first;
            r2 = requested[m].second;
        }
        LocalFit local = fit_local(proj, global.B1[m], r1, r2, options.h0);
        result.dims.local[m] = {static_cast<int>(local.Q3.cols()), static_cast<int>(local.Q4.cols())};
        result.diagnostics.local_row[m] = local.row_diag;
        result.diagnostics.local_col[m] = local.col_diag;

        LocalSignal local_signal = recover_local(proj.y1, local.Q3, local.Q4, global.B1[m]);
        GlobalSignal global_signal =
            recover_global(group.obs, local_signal.Phi, global.Q1[m], global.Q2[m]);

        GroupLoadings& loadings = result.loadings.groups[m];
        loadings.Q1 = global.Q1[m];
        loadings.Q2 = global.Q2[m];
        loadings.B1 = global.B1[m];
        loadings.B2 = global.B2[m];
        loadings.Q3 = std::move(local.Q3);
        loadings.Q4 = std::move(local.Q4);

        const int T = group.time_len();
        result.residual[m].resize(T);
        for (int t = 0; t < T; ++t)
            result.residual[m][t] = group.obs[t] - global_signal.Psi[t] - local_signal.Phi[t];
        result.S[m] = std::move(global_signal.S);
        result.Psi[m] = std::move(global_signal.Psi);
        result.Z[m] = std::move(local_signal.Z);
        result.Phi[m] = std::move(local_signal.Phi);
    }
    return result;
}

}  // namespace mmfm
