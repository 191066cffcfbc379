#include <filesystem>

#include "doctest.h"
#include "mmfm/numerics.hpp"
#include "mmfm/pipeline.hpp"
#include "mmfm/rng.hpp"
#include "mmfm/types.hpp"
#include "oracles.hpp"

using mmfm::GroupedPanel;
using mmfm::Matrix;

namespace {

GroupedPanel well_formed_panel() {
    mmfm::Rng rng(1);
    return oracles::random_panel(rng, 3, 20, 8, 12);
}

}  // namespace

TEST_SUITE_BEGIN("types");

TEST_CASE("validate_panel accepts a well-formed panel") {
    const mmfm::ValidationReport report = mmfm::validate_panel(well_formed_panel());
    CHECK(report.ok());
    CHECK(report.warnings.empty());
}

TEST_CASE("validate_panel reports a shape mismatch with group and time") {
    GroupedPanel panel = well_formed_panel();
    panel.groups[1].obs[4] = Matrix::Zero(19, 8);
    const mmfm::ValidationReport report = mmfm::validate_panel(panel);
    REQUIRE_FALSE(report.ok());
    CHECK(report.violations.front().find("shape mismatch group 2") != std::string::npos);
    CHECK(report.violations.front().find("t=5") != std::string::npos);
}

TEST_CASE("validate_panel requires at least two groups") {
    GroupedPanel panel = well_formed_panel();
    panel.groups.resize(1);
    const mmfm::ValidationReport report = mmfm::validate_panel(panel);
    REQUIRE_FALSE(report.ok());
    CHECK(report.violations.front() == "global estimation requires >=2 groups");
}

TEST_CASE("validate_panel flags non-finite entries and short panels") {
    GroupedPanel panel = well_formed_panel();
    panel.groups[0].obs[0](3, 2) = std::numeric_limits<double>::infinity();
    CHECK_FALSE(mmfm::validate_panel(panel).ok());

    GroupedPanel short_panel = well_formed_panel();
    for (auto& g : short_panel.groups) g.obs.resize(1);
    CHECK_FALSE(mmfm::validate_panel(short_panel).ok());
}

TEST_CASE("validate_panel warns on wildly uneven group sizes") {
    mmfm::Rng rng(2);
    GroupedPanel panel;
    panel.groups.push_back({"big", {}});
    panel.groups.push_back({"small", {}});
    for (int t = 0; t < 5; ++t) {
        panel.groups[0].obs.push_back(oracles::random_matrix(rng, 44, 4));
        panel.groups[1].obs.push_back(oracles::random_matrix(rng, 4, 4));
    }
    const mmfm::ValidationReport report = mmfm::validate_panel(panel);
    CHECK(report.ok());
    REQUIRE_FALSE(report.warnings.empty());
}

TEST_CASE("check_dims enforces the admissible rank ranges") {
    const GroupedPanel panel = well_formed_panel();
    mmfm::FactorDims dims;
    dims.k1 = 3;
    dims.k2 = 2;
    dims.local.assign(3, {2, 2});
    CHECK_FALSE(mmfm::check_dims(dims, panel).has_value());

    dims.local[1] = {18, 2};  // r1 > N_m - k1
    CHECK(mmfm::check_dims(dims, panel).has_value());
    dims.local[1] = {2, 7};  // r2 > p - k2
    CHECK(mmfm::check_dims(dims, panel).has_value());
    dims.local.assign(3, {2, 2});
    dims.k2 = 9;  // > p
    CHECK(mmfm::check_dims(dims, panel).has_value());
}

TEST_CASE("panel CSV round-trips bit-for-bit") {
    mmfm::Rng rng(9);
    GroupedPanel panel = oracles::random_panel(rng, 2, 3, 2, 4);
    // Mix in extreme magnitudes; every finite double must survive.
    panel.groups[0].obs[0](0, 0) = 1.0 / 3.0;
    panel.groups[0].obs[0](1, 1) = 1e-300;
    panel.groups[1].obs[2](2, 0) = -9.87654321e280;
    panel.groups[1].obs[3](0, 1) = 5e-324;  // smallest denormal

    const auto path = std::filesystem::temp_directory_path() / "mmfm_roundtrip.csv";
    mmfm::write_panel_csv(panel, path);
    const mmfm::IngestResult loaded = mmfm::ingest_csv(path);
    std::filesystem::remove(path);

    REQUIRE(loaded.panel.group_count() == panel.group_count());
    for (int m = 0; m < panel.group_count(); ++m)
        for (int t = 0; t < panel.time_len(); ++t) {
            REQUIRE(loaded.panel.groups[m].obs[t].rows() == panel.groups[m].obs[t].rows());
            CHECK((loaded.panel.groups[m].obs[t].array() == panel.groups[m].obs[t].array()).all());
        }
}

TEST_CASE("loading set orthogonality checker sees violations") {
    mmfm::Rng rng(4);
    mmfm::LoadingSet set;
    set.groups.resize(1);
    set.groups[0].Q1 = mmfm::thin_qr(oracles::random_gaussian(rng, 6, 2)).q;
    CHECK(set.max_orthogonality_error() < 1e-12);
    set.groups[0].Q1(0, 0) += 1e-3;
    CHECK(set.max_orthogonality_error() > 1e-4);
}

TEST_SUITE_END();
