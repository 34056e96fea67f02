#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

#include "common.hpp"

namespace fieno::ad {

using Shape = std::vector<int>;

int64_t numel(const Shape& s);

// One value in a define-by-run graph. The graph is rebuilt every forward
// pass; backward_fn pulls this node's gradient into its parents'.
struct Node {
    std::vector<double> data;
    Shape shape;
    std::vector<double> grad;
    bool requires_grad = false;
    std::vector<std::shared_ptr<Node>> parents;
    std::function<void(Node&)> backward_fn;

    void ensure_grad() {
        if (grad.size() != data.size()) grad.assign(data.size(), 0.0);
    }
};

// Dense f64 tensor handle. Copying a Tensor copies the handle, not the
// storage; parameters keep their Node across training steps.
class Tensor {
public:
    Tensor() = default;
    explicit Tensor(std::shared_ptr<Node> n) : node_(std::move(n)) {}

    static Tensor constant(std::vector<double> data, Shape shape);
    static Tensor scalar(double v) { return constant({v}, {1}); }
    static Tensor param(std::vector<double> data, Shape shape);
    static Tensor zeros(const Shape& shape, bool requires_grad = false);

    bool defined() const { return node_ != nullptr; }
    const Shape& shape() const { return node_->shape; }
    int64_t size() const { return static_cast<int64_t>(node_->data.size()); }
    std::vector<double>& data() { return node_->data; }
    const std::vector<double>& data() const { return node_->data; }
    std::vector<double>& grad() { return node_->grad; }
    const std::vector<double>& grad() const { return node_->grad; }
    bool requires_grad() const { return node_->requires_grad; }

    // Value of a single-element tensor.
    double item() const;

    void zero_grad() {
        if (node_->requires_grad) node_->grad.assign(node_->data.size(), 0.0);
    }

    std::shared_ptr<Node> node() const { return node_; }

private:
    std::shared_ptr<Node> node_;
};

// Elementwise; shapes must match exactly.
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);

// X [m,n] plus a row vector [n] broadcast over rows (bias add).
Tensor add_rowvec(const Tensor& x, const Tensor& row);

// [m,k] x [k,n] -> [m,n]
Tensor matmul(const Tensor& a, const Tensor& b);

enum class Padding { Valid, Same };

// input [Cin,H,W], weight [Cout,Cin,kh,kw], optional bias [Cout]; stride 1.
// Same padding requires odd kernel dims; valid requires kernel <= input.
Tensor conv2d(const Tensor& input, const Tensor& weight, const Tensor& bias,
              Padding padding);
Tensor conv2d(const Tensor& input, const Tensor& weight, Padding padding);

Tensor cos(const Tensor& x);
Tensor sin(const Tensor& x);
// Exact erf formulation: gelu(x) = x * Phi(x).
Tensor gelu(const Tensor& x);

Tensor sum(const Tensor& x);   // -> [1]
Tensor mean(const Tensor& x);  // -> [1]

Tensor reshape(const Tensor& x, Shape new_shape);
Tensor concat(const Tensor& a, const Tensor& b, int axis);

// x scaled by a single-element parameter tensor.
Tensor scale_by_scalar_param(const Tensor& x, const Tensor& s);

// Reverse-mode sweep from a scalar loss: each reachable node is visited
// exactly once in reverse topological order, accumulating exact
// vector-Jacobian products into parameter gradients.
void backward(const Tensor& loss);

// Bias-corrected Adam. Grad buffers are read from the params themselves;
// state grows lazily on first use.
struct AdamState {
    std::vector<std::vector<double>> m;
    std::vector<std::vector<double>> v;
    int64_t t = 0;
};

void adam_step(std::vector<Tensor>& params, AdamState& state, double lr,
               double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);

double gelu_scalar(double x);

}  // namespace fieno::ad
