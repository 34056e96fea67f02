#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "model.hpp"
#include "truth.hpp"

namespace fieno::trainer {

struct TrainConfig {
    int64_t steps = 5000;
    double lr = 1e-3;
    int m_boundary = 200;        // boundary samples drawn per step
    int64_t n_interior = 200;    // supervision points
    int64_t dense_boundary = 2000;  // pool the per-step draw comes from
    uint64_t seed = 0;
    int64_t early_stop_patience = 500;
    int64_t eval_every = 100;

    void validate() const;
};

// One row per optimization step; holdout_mse is NaN on steps where the
// holdout was not evaluated (or no holdout set was given).
struct LossPoint {
    int64_t step = 0;
    double train_mse = 0.0;
    double holdout_mse = 0.0;
};

struct TrainResult {
    double best_loss = 0.0;
    int64_t best_step = 0;
    int64_t steps_run = 0;
    std::vector<LossPoint> history;
};

// Optimizes the model's trainable parameters with Adam against the MSE on
// the first cfg.n_interior interior points. Each step draws cfg.m_boundary
// samples (seeded, without replacement) from the first cfg.dense_boundary
// boundary samples. The model is left holding the best-loss parameters.
// Diverging (non-finite) loss aborts with a Numeric error.
TrainResult train(model::FienoModel& model, const truth::Dataset& data,
                  const TrainConfig& cfg,
                  const truth::Dataset* holdout = nullptr);

// Deterministic scoring: boundary input is the first ian.m samples of the
// dataset's stored boundary list; MSE over all interior points.
double evaluate(model::FienoModel& model, const truth::Dataset& data);

// CSV: step,train_mse,holdout_mse (holdout cell empty when absent).
std::string loss_csv(const std::vector<LossPoint>& history);

}  // namespace fieno::trainer
