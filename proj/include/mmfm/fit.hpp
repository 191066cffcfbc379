#pragma once

#include <optional>

#include "mmfm/types.hpp"

namespace mmfm {

struct FitOptions {
    std::optional<int> k1;
    std::optional<int> k2;
    /// Per-group (r1, r2); a single pair is broadcast to all groups.
    std::optional<std::vector<std::pair<int, int>>> local_ranks;
    int h0 = 2;
};

/// Full three-stage fit: global loading spaces, local loading spaces after
/// projecting the global part out, then factor and signal recovery.
FitResult fit_panel(const GroupedPanel& panel, const FitOptions& options = {});

}  // namespace mmfm
