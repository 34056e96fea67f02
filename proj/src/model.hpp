#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "autodiff.hpp"
#include "geometry.hpp"
#include "truth.hpp"

namespace fieno::model {

// Interior-point network: fixed random feature layers (standard-normal
// weights, zero biases, frozen), a cosine activation, then a trainable MLP
// with GELU between layers. One wide fixed layer is the intended shape:
// stacking unnormalized standard-normal layers multiplies the pre-cosine
// scale by ~sqrt(width) per layer, pushing the random-feature basis to
// frequencies too high to generalize from a few hundred samples.
struct KanConfig {
    std::vector<int> elm_layers{256};
    std::vector<int> mlp_layers{64, 20};
    int d = 20;
    uint64_t elm_seed = 0;
};

// Boundary encoder: the m samples, sorted by alpha, become a 5-row image
// (value, x, y, r, theta) convolved by two same-padded layers with GELU,
// then flattened through two fully connected layers.
struct IanConfig {
    std::vector<int> conv_channels{16, 32};
    int kernel_size = 3;
    std::vector<int> fc_layers{128, 20};
    int d = 20;
    int m = 200;
};

struct ModelConfig {
    KanConfig kan;
    IanConfig ian;
    truth::BcKind bc_kind = truth::BcKind::Dirichlet;

    void validate() const;
};

constexpr int kInputFeatures = 4;  // (x, y, r, theta)
constexpr int kBoundaryChannels = 5;  // (value, x, y, r, theta)

// prediction(x) = lambda * sum_i KAN(x)_i * IAN_i, with the inhomogeneous
// term taken as zero. Trainable: the KAN MLP, the IAN conv/fc stacks, and
// the scalar lambda (initialized to 1/D). The fixed feature weights are
// regenerated from elm_seed and never updated.
class FienoModel {
public:
    FienoModel(const ModelConfig& cfg, uint64_t param_seed);

    const ModelConfig& config() const { return cfg_; }
    uint64_t elm_seed() const { return cfg_.kan.elm_seed; }
    double lambda_value() const { return lambda_.data()[0]; }

    ad::Tensor kan_forward(const std::vector<geom::Point2>& points);
    ad::Tensor ian_forward(const std::vector<geom::BoundarySample>& boundary);
    ad::Tensor forward(const std::vector<geom::BoundarySample>& boundary,
                       const std::vector<geom::Point2>& points);
    std::vector<double> predict(
        const std::vector<geom::BoundarySample>& boundary,
        const std::vector<geom::Point2>& points);

    // Canonically ordered trainable parameters (lambda last); handles share
    // storage with the model.
    const std::vector<ad::Tensor>& trainable_params() const { return params_; }
    const std::vector<std::string>& param_names() const { return names_; }

    // Raw copies of the trainable parameter values, canonical order.
    std::vector<std::vector<double>> snapshot() const;
    void restore(const std::vector<std::vector<double>>& snap);

    FienoModel clone() const;

    std::string to_json() const;
    static FienoModel from_json(const std::string& text);
    void save(const std::string& path) const;
    static FienoModel load(const std::string& path);

private:
    FienoModel() = default;
    void build_fixed();
    void register_params();

    ModelConfig cfg_;
    std::vector<ad::Tensor> elm_weights_;            // fixed, frozen
    std::vector<ad::Tensor> mlp_w_, mlp_b_;          // trainable
    std::vector<ad::Tensor> conv_w_, conv_b_;        // trainable
    std::vector<ad::Tensor> fc_w_, fc_b_;            // trainable
    ad::Tensor lambda_;                              // trainable scalar
    std::vector<ad::Tensor> params_;
    std::vector<std::string> names_;
};

}  // namespace fieno::model
