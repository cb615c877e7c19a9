#pragma once

#include <functional>
#include <string>
#include <vector>

#include "fbp/config.hpp"

#include <json.hpp>

namespace fbp {

struct CriterionRow {
    int id = 0;
    std::string name;
    double measured = 0.0;
    double threshold = 0.0;
    bool pass = false;
    /// Per-criterion detail for report.json.
    nlohmann::ordered_json detail;
};

struct SuiteResult {
    std::vector<CriterionRow> rows;
    /// Wall time of the h = 1/64 two-plane solve. Kept out of the summary so
    /// the summary stays byte-reproducible.
    double two_plane_seconds = 0.0;
};

/// Progress sink; receives one line per finished experiment.
using SuiteLog = std::function<void(const std::string&)>;

/// Runs the acceptance matrix (criteria 1-9) with the regularity and
/// viscosity constants of `base` (grid, boundary and solver blocks are fixed
/// per criterion; solver.tolerance, max_iterations and seed are taken from
/// `base`).
SuiteResult run_suite(const ExperimentConfig& base, const SuiteLog& log);

/// criterion_id,measured,threshold,pass with fixed formatting.
std::string suite_summary_csv(const SuiteResult& result);

nlohmann::ordered_json suite_report(const SuiteResult& result);

}  // namespace fbp
