#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "model.hpp"
#include "trainer.hpp"
#include "truth.hpp"

namespace fieno::config {

struct DataConfig {
    std::string shape_id = "B_train";
    int64_t m_boundary = 2000;
    int64_t n_interior = 200;
};

// Experiment grid: every (equation x bc_kind x boundary x n_interior x seed)
// cell, trained from the B_train base model.
struct GridConfig {
    std::vector<truth::Equation> equations{truth::Equation::Laplace};
    std::vector<truth::BcKind> bc_kinds{truth::BcKind::Dirichlet};
    std::vector<std::string> boundaries{"B1", "B2", "B3", "B4"};
    std::vector<int64_t> n_interior{50, 100, 200};
    std::string protocol = "few-shot";  // or "zero-shot"
    int64_t finetune_steps = 500;
    int64_t holdout_points = 500;
    std::string truth_mode = "auto";  // auto | analytic | manufactured | mfs_oracle
};

struct ExperimentConfig {
    uint64_t seed = 1;
    std::string output_dir = "out";
    truth::PdeSpec pde;
    DataConfig data;
    model::ModelConfig model;
    trainer::TrainConfig train;
    GridConfig grid;
    std::vector<uint64_t> seeds{1, 2, 3};
};

// The default ground-truth mode for a grid cell: analytic where a closed
// form exists (Laplace Dirichlet), manufactured otherwise.
truth::TruthMode default_truth_mode(truth::Equation eq, truth::BcKind bc);

// Resolves a GridConfig truth_mode string for one cell.
truth::TruthMode resolve_truth_mode(const std::string& mode,
                                    truth::Equation eq, truth::BcKind bc);

// Strict parse: unknown keys and type mismatches are Validation errors
// carrying the JSON field path. "pde.equation" is the one required field.
// The FIENO_SEED environment variable, when set, overrides the top-level
// seed. Cross-field consistency (widths vs d, m agreements) is validated.
ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config(const std::string& path);

}  // namespace fieno::config
