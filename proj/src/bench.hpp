#pragma once

#include <string>
#include <vector>

#include "config.hpp"
#include "model.hpp"
#include "truth.hpp"

namespace fieno::bench {

// One scored experiment cell. `mse` is NaN when the cell failed numerically;
// such rows stay in the CSV but are excluded from table aggregation.
struct ResultRecord {
    std::string equation;
    std::string bc_kind;
    std::string boundary_id;
    int64_t n_interior = 0;
    uint64_t seed = 0;
    std::string protocol;
    std::string truth_mode;
    double mse = 0.0;
    double wall_time_s = 0.0;
};

std::string results_csv(const std::vector<ResultRecord>& records);
std::vector<ResultRecord> parse_results_csv(const std::string& text);

// Runs the full experiment grid: for every (equation, bc, seed) a base model
// is trained on the B_train boundary, then every (boundary, n_interior) cell
// is scored under the configured protocol. Records are returned in
// deterministic grid order regardless of worker count.
std::vector<ResultRecord> run_grid(const config::ExperimentConfig& cfg,
                                   int workers);

struct TableOutput {
    std::string text;  // aligned, human-readable
    std::string csv;   // same cells, machine-readable
};

// Aggregates records for one (equation, bc) pair into the fixed
// 4-boundary x {50,100,200} matrix of seed-mean MSE, formatted in units of
// 1e-3 with three decimals (ties to even); missing cells render as an em
// dash.
TableOutput emit_table(const std::vector<ResultRecord>& records,
                       truth::Equation eq, truth::BcKind bc);

// Writes prediction / truth / squared-error scatter SVGs for the dataset's
// interior points and returns the written paths.
std::vector<std::string> emit_plots(model::FienoModel& model,
                                    const truth::Dataset& ds,
                                    const std::string& out_dir);

// Thin-plate-spline interpolation of the Dirichlet boundary data, scored as
// MSE over the dataset's interior points. A classical mesh-free reference.
double baseline_rbf(const truth::Dataset& ds);

}  // namespace fieno::bench
