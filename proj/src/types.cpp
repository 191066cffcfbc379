#include "mmfm/types.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace mmfm {

ValidationReport validate_panel(const GroupedPanel& panel) {
    ValidationReport report;
    auto fail = [&](const std::string& msg) { report.violations.push_back(msg); };

    if (panel.groups.empty()) {
        fail("panel has no groups");
        return report;
    }
    if (panel.group_count() < 2)
        fail("global estimation requires >=2 groups");

    const int T = panel.time_len();
    if (T < 2) fail("panel needs T >= 2 time points");

    const int p = panel.cols();
    int min_rows = 0, max_rows = 0;
    for (int m = 0; m < panel.group_count(); ++m) {
        const GroupSeries& g = panel.groups[m];
        std::ostringstream tag;
        tag << "group " << (m + 1);
        if (!g.name.empty()) tag << " ('" << g.name << "')";

        if (g.time_len() != T) {
            std::ostringstream os;
            os << tag.str() << " has " << g.time_len() << " observations, expected " << T;
            fail(os.str());
        }
        if (g.obs.empty()) continue;

        const int nm = g.rows();
        if (nm < 1) fail(tag.str() + " has no rows");
        if (g.cols() != p) {
            std::ostringstream os;
            os << tag.str() << " has " << g.cols() << " columns, expected " << p;
            fail(os.str());
        }
        for (int t = 0; t < g.time_len(); ++t) {
            const Matrix& x = g.obs[t];
            if (x.rows() != nm || x.cols() != g.cols()) {
                std::ostringstream os;
                os << "shape mismatch group " << (m + 1) << ", t=" << (t + 1) << ": got "
                   << x.rows() << "x" << x.cols() << ", want " << nm << "x" << g.cols();
                fail(os.str());
            }
            if (!x.allFinite()) {
                std::ostringstream os;
                os << "non-finite entries in group " << (m + 1) << ", t=" << (t + 1);
                fail(os.str());
            }
        }
        min_rows = (m == 0) ? nm : std::min(min_rows, nm);
        max_rows = (m == 0) ? nm : std::max(max_rows, nm);
    }

    if (min_rows >= 1 && max_rows > 10 * min_rows) {
        std::ostringstream os;
        os << "group row counts span a wide range (" << min_rows << ".." << max_rows
           << "); estimates assume comparable group sizes";
        report.warnings.push_back(os.str());
    }
    return report;
}

std::optional<std::string> check_dims(const FactorDims& dims, const GroupedPanel& panel) {
    const int p = panel.cols();
    if (dims.k1 < 1) return "k1 must be >= 1";
    if (dims.k2 < 1 || dims.k2 > p) return "k2 must lie in [1, p]";
    if (static_cast<int>(dims.local.size()) != panel.group_count())
        return "local rank list must have one (r1, r2) pair per group";
    for (int m = 0; m < panel.group_count(); ++m) {
        const int nm = panel.groups[m].rows();
        if (dims.k1 > nm) return "k1 exceeds the row count of group " + std::to_string(m + 1);
        auto [r1, r2] = dims.local[m];
        if (r1 < 1 || r1 > nm - dims.k1)
            return "r1 of group " + std::to_string(m + 1) + " must lie in [1, N_m - k1]";
        if (r2 < 1 || r2 > p - dims.k2)
            return "r2 of group " + std::to_string(m + 1) + " must lie in [1, p - k2]";
    }
    return std::nullopt;
}

double LoadingSet::max_orthogonality_error() const {
    double err = 0.0;
    auto gram = [&](const Matrix& Q) {
        if (Q.size() == 0) return;
        Matrix g = Q.transpose() * Q;
        g.diagonal().array() -= 1.0;
        err = std::max(err, g.cwiseAbs().maxCoeff());
    };
    auto cross = [&](const Matrix& B, const Matrix& Q) {
        if (B.size() == 0 || Q.size() == 0) return;
        err = std::max(err, (B.transpose() * Q).cwiseAbs().maxCoeff());
    };
    for (const GroupLoadings& g : groups) {
        gram(g.Q1);
        gram(g.Q2);
        gram(g.Q3);
        gram(g.Q4);
        gram(g.B1);
        gram(g.B2);
        cross(g.B1, g.Q1);
        cross(g.B2, g.Q2);
    }
    return err;
}

}  // namespace mmfm
