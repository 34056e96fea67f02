#include "autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <unordered_set>

namespace fieno::ad {

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kInvSqrt2Pi = 0.39894228040143267794;

std::shared_ptr<Node> make_leaf(std::vector<double> data, Shape shape,
                                bool requires_grad) {
    if (numel(shape) != static_cast<int64_t>(data.size()))
        fail(ErrorKind::Validation, "tensor data length does not match shape");
    auto n = std::make_shared<Node>();
    n->data = std::move(data);
    n->shape = std::move(shape);
    n->requires_grad = requires_grad;
    if (requires_grad) n->ensure_grad();
    return n;
}

// Wires a result node: gradients flow iff some parent wants them.
Tensor make_op(std::vector<double> data, Shape shape,
               std::vector<std::shared_ptr<Node>> parents,
               std::function<void(Node&)> backward_fn) {
    auto n = std::make_shared<Node>();
    n->data = std::move(data);
    n->shape = std::move(shape);
    for (const auto& p : parents)
        if (p->requires_grad) n->requires_grad = true;
    if (n->requires_grad) {
        n->parents = std::move(parents);
        n->backward_fn = std::move(backward_fn);
        n->ensure_grad();
        for (const auto& p : n->parents) p->ensure_grad();
    }
    return Tensor(n);
}

void check_same_shape(const Tensor& a, const Tensor& b, const char* op) {
    if (a.shape() != b.shape())
        fail(ErrorKind::Validation,
             std::string(op) + ": operand shapes differ");
}

Tensor unary_elementwise(const Tensor& x, double (*f)(double),
                         double (*df)(double)) {
    std::vector<double> out(x.data().size());
    for (size_t i = 0; i < out.size(); ++i) out[i] = f(x.data()[i]);
    auto xn = x.node();
    return make_op(std::move(out), x.shape(), {xn}, [xn, df](Node& self) {
        for (size_t i = 0; i < self.data.size(); ++i)
            xn->grad[i] += df(xn->data[i]) * self.grad[i];
    });
}

struct ConvDims {
    int ci, h, w, co, kh, kw, ho, wo, py, px;
};

ConvDims conv_dims(const Tensor& input, const Tensor& weight,
                   Padding padding) {
    if (input.shape().size() != 3)
        fail(ErrorKind::Validation, "conv2d: input must be [C,H,W]");
    if (weight.shape().size() != 4)
        fail(ErrorKind::Validation, "conv2d: weight must be [Cout,Cin,kh,kw]");
    ConvDims d{};
    d.ci = input.shape()[0];
    d.h = input.shape()[1];
    d.w = input.shape()[2];
    d.co = weight.shape()[0];
    d.kh = weight.shape()[2];
    d.kw = weight.shape()[3];
    if (weight.shape()[1] != d.ci)
        fail(ErrorKind::Validation, "conv2d: channel mismatch");
    if (padding == Padding::Same) {
        if (d.kh % 2 == 0 || d.kw % 2 == 0)
            fail(ErrorKind::Validation,
                 "conv2d: same padding requires odd kernel dims");
        d.ho = d.h;
        d.wo = d.w;
        d.py = d.kh / 2;
        d.px = d.kw / 2;
    } else {
        if (d.kh > d.h || d.kw > d.w)
            fail(ErrorKind::Validation,
                 "conv2d: kernel larger than input with valid padding");
        d.ho = d.h - d.kh + 1;
        d.wo = d.w - d.kw + 1;
        d.py = 0;
        d.px = 0;
    }
    return d;
}

}  // namespace

int64_t numel(const Shape& s) {
    int64_t n = 1;
    for (int d : s) {
        if (d <= 0) fail(ErrorKind::Validation, "shape dims must be positive");
        n *= d;
    }
    return n;
}

Tensor Tensor::constant(std::vector<double> data, Shape shape) {
    return Tensor(make_leaf(std::move(data), std::move(shape), false));
}

Tensor Tensor::param(std::vector<double> data, Shape shape) {
    return Tensor(make_leaf(std::move(data), std::move(shape), true));
}

Tensor Tensor::zeros(const Shape& shape, bool requires_grad) {
    return Tensor(make_leaf(std::vector<double>(numel(shape), 0.0), shape,
                            requires_grad));
}

double Tensor::item() const {
    if (node_->data.size() != 1)
        fail(ErrorKind::Validation, "item() on non-scalar tensor");
    return node_->data[0];
}

Tensor add(const Tensor& a, const Tensor& b) {
    check_same_shape(a, b, "add");
    std::vector<double> out(a.data().size());
    for (size_t i = 0; i < out.size(); ++i) out[i] = a.data()[i] + b.data()[i];
    auto an = a.node(), bn = b.node();
    return make_op(std::move(out), a.shape(), {an, bn}, [an, bn](Node& self) {
        if (an->requires_grad)
            for (size_t i = 0; i < self.data.size(); ++i)
                an->grad[i] += self.grad[i];
        if (bn->requires_grad)
            for (size_t i = 0; i < self.data.size(); ++i)
                bn->grad[i] += self.grad[i];
    });
}

Tensor sub(const Tensor& a, const Tensor& b) {
    check_same_shape(a, b, "sub");
    std::vector<double> out(a.data().size());
    for (size_t i = 0; i < out.size(); ++i) out[i] = a.data()[i] - b.data()[i];
    auto an = a.node(), bn = b.node();
    return make_op(std::move(out), a.shape(), {an, bn}, [an, bn](Node& self) {
        if (an->requires_grad)
            for (size_t i = 0; i < self.data.size(); ++i)
                an->grad[i] += self.grad[i];
        if (bn->requires_grad)
            for (size_t i = 0; i < self.data.size(); ++i)
                bn->grad[i] -= self.grad[i];
    });
}

Tensor mul(const Tensor& a, const Tensor& b) {
    check_same_shape(a, b, "mul");
    std::vector<double> out(a.data().size());
    for (size_t i = 0; i < out.size(); ++i) out[i] = a.data()[i] * b.data()[i];
    auto an = a.node(), bn = b.node();
    return make_op(std::move(out), a.shape(), {an, bn}, [an, bn](Node& self) {
        if (an->requires_grad)
            for (size_t i = 0; i < self.data.size(); ++i)
                an->grad[i] += bn->data[i] * self.grad[i];
        if (bn->requires_grad)
            for (size_t i = 0; i < self.data.size(); ++i)
                bn->grad[i] += an->data[i] * self.grad[i];
    });
}

Tensor add_rowvec(const Tensor& x, const Tensor& row) {
    if (x.shape().size() != 2 || row.shape().size() != 1)
        fail(ErrorKind::Validation, "add_rowvec: expects [m,n] and [n]");
    const int m = x.shape()[0], n = x.shape()[1];
    if (row.shape()[0] != n)
        fail(ErrorKind::Validation, "add_rowvec: width mismatch");
    std::vector<double> out(x.data().size());
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < n; ++j)
            out[static_cast<size_t>(i) * n + j] =
                x.data()[static_cast<size_t>(i) * n + j] + row.data()[j];
    auto xn = x.node(), rn = row.node();
    return make_op(std::move(out), x.shape(), {xn, rn},
                   [xn, rn, m, n](Node& self) {
                       if (xn->requires_grad)
                           for (size_t i = 0; i < self.data.size(); ++i)
                               xn->grad[i] += self.grad[i];
                       if (rn->requires_grad)
                           for (int i = 0; i < m; ++i)
                               for (int j = 0; j < n; ++j)
                                   rn->grad[j] +=
                                       self.grad[static_cast<size_t>(i) * n + j];
                   });
}

Tensor matmul(const Tensor& a, const Tensor& b) {
    if (a.shape().size() != 2 || b.shape().size() != 2)
        fail(ErrorKind::Validation, "matmul: operands must be rank 2");
    const int m = a.shape()[0], k = a.shape()[1], n = b.shape()[1];
    if (b.shape()[0] != k)
        fail(ErrorKind::Validation, "matmul: inner dimensions differ");
    std::vector<double> out(static_cast<size_t>(m) * n, 0.0);
    for (int i = 0; i < m; ++i)
        for (int p = 0; p < k; ++p) {
            const double av = a.data()[static_cast<size_t>(i) * k + p];
            const double* brow = &b.data()[static_cast<size_t>(p) * n];
            double* orow = &out[static_cast<size_t>(i) * n];
            for (int j = 0; j < n; ++j) orow[j] += av * brow[j];
        }
    auto an = a.node(), bn = b.node();
    return make_op(std::move(out), {m, n}, {an, bn},
                   [an, bn, m, k, n](Node& self) {
                       // dA = G B^T, dB = A^T G
                       if (an->requires_grad)
                           for (int i = 0; i < m; ++i)
                               for (int p = 0; p < k; ++p) {
                                   const double* grow =
                                       &self.grad[static_cast<size_t>(i) * n];
                                   const double* brow =
                                       &bn->data[static_cast<size_t>(p) * n];
                                   double acc = 0.0;
                                   for (int j = 0; j < n; ++j)
                                       acc += grow[j] * brow[j];
                                   an->grad[static_cast<size_t>(i) * k + p] += acc;
                               }
                       if (bn->requires_grad)
                           for (int i = 0; i < m; ++i)
                               for (int p = 0; p < k; ++p) {
                                   const double av =
                                       an->data[static_cast<size_t>(i) * k + p];
                                   if (av == 0.0) continue;
                                   for (int j = 0; j < n; ++j)
                                       bn->grad[static_cast<size_t>(p) * n + j] +=
                                           av * self.grad[static_cast<size_t>(i) * n + j];
                               }
                   });
}

Tensor conv2d(const Tensor& input, const Tensor& weight, const Tensor& bias,
              Padding padding) {
    const ConvDims d = conv_dims(input, weight, padding);
    if (bias.defined()) {
        if (bias.shape().size() != 1 || bias.shape()[0] != d.co)
            fail(ErrorKind::Validation, "conv2d: bias must be [Cout]");
    }
    const auto& in = input.data();
    const auto& wt = weight.data();
    std::vector<double> out(static_cast<size_t>(d.co) * d.ho * d.wo, 0.0);
    // Inner loops run along the (long) row axis: for each kernel tap the
    // valid output range [xo_lo, xo_hi) is precomputed, giving branch-free
    // contiguous dot/axpy passes instead of a short loop over kernel taps.
    for (int co = 0; co < d.co; ++co) {
        const double b0 = bias.defined() ? bias.data()[co] : 0.0;
        for (int yo = 0; yo < d.ho; ++yo) {
            double* orow = &out[(static_cast<size_t>(co) * d.ho + yo) * d.wo];
            for (int xo = 0; xo < d.wo; ++xo) orow[xo] = b0;
            const int ky_lo = std::max(0, d.py - yo);
            const int ky_hi = std::min(d.kh, d.h + d.py - yo);
            for (int ci = 0; ci < d.ci; ++ci)
                for (int ky = ky_lo; ky < ky_hi; ++ky) {
                    const size_t irow =
                        (static_cast<size_t>(ci) * d.h + yo + ky - d.py) * d.w;
                    const size_t wrow =
                        ((static_cast<size_t>(co) * d.ci + ci) * d.kh + ky) *
                        d.kw;
                    for (int kx = 0; kx < d.kw; ++kx) {
                        const int xo_lo = std::max(0, d.px - kx);
                        const int xo_hi = std::min(d.wo, d.w + d.px - kx);
                        const int shift = kx - d.px;
                        const double wv = wt[wrow + kx];
                        for (int xo = xo_lo; xo < xo_hi; ++xo)
                            orow[xo] += wv * in[irow + xo + shift];
                    }
                }
        }
    }
    auto xn = input.node(), wn = weight.node();
    auto bn = bias.defined() ? bias.node() : nullptr;
    std::vector<std::shared_ptr<Node>> parents{xn, wn};
    if (bn) parents.push_back(bn);
    return make_op(
        std::move(out), {d.co, d.ho, d.wo}, std::move(parents),
        [xn, wn, bn, d](Node& self) {
            const bool xg = xn->requires_grad;
            const bool wg = wn->requires_grad;
            for (int co = 0; co < d.co; ++co)
                for (int yo = 0; yo < d.ho; ++yo) {
                    const double* grow =
                        &self.grad[(static_cast<size_t>(co) * d.ho + yo) *
                                   d.wo];
                    if (bn && bn->requires_grad) {
                        double acc = 0.0;
                        for (int xo = 0; xo < d.wo; ++xo) acc += grow[xo];
                        bn->grad[co] += acc;
                    }
                    const int ky_lo = std::max(0, d.py - yo);
                    const int ky_hi = std::min(d.kh, d.h + d.py - yo);
                    for (int ci = 0; ci < d.ci; ++ci)
                        for (int ky = ky_lo; ky < ky_hi; ++ky) {
                            const size_t irow =
                                (static_cast<size_t>(ci) * d.h + yo + ky -
                                 d.py) *
                                d.w;
                            const size_t wrow =
                                ((static_cast<size_t>(co) * d.ci + ci) * d.kh +
                                 ky) *
                                d.kw;
                            for (int kx = 0; kx < d.kw; ++kx) {
                                const int xo_lo = std::max(0, d.px - kx);
                                const int xo_hi =
                                    std::min(d.wo, d.w + d.px - kx);
                                const int shift = kx - d.px;
                                if (wg) {
                                    double acc = 0.0;
                                    for (int xo = xo_lo; xo < xo_hi; ++xo)
                                        acc += grow[xo] *
                                               xn->data[irow + xo + shift];
                                    wn->grad[wrow + kx] += acc;
                                }
                                if (xg) {
                                    const double wv = wn->data[wrow + kx];
                                    for (int xo = xo_lo; xo < xo_hi; ++xo)
                                        xn->grad[irow + xo + shift] +=
                                            wv * grow[xo];
                                }
                            }
                        }
                }
        });
}

Tensor conv2d(const Tensor& input, const Tensor& weight, Padding padding) {
    return conv2d(input, weight, Tensor(), padding);
}

Tensor cos(const Tensor& x) {
    return unary_elementwise(
        x, [](double v) { return std::cos(v); },
        [](double v) { return -std::sin(v); });
}

Tensor sin(const Tensor& x) {
    return unary_elementwise(
        x, [](double v) { return std::sin(v); },
        [](double v) { return std::cos(v); });
}

double gelu_scalar(double x) {
    return 0.5 * x * std::erfc(-x * kInvSqrt2);
}

Tensor gelu(const Tensor& x) {
    return unary_elementwise(x, &gelu_scalar, [](double v) {
        const double phi = 0.5 * std::erfc(-v * kInvSqrt2);
        const double pdf = kInvSqrt2Pi * std::exp(-0.5 * v * v);
        return phi + v * pdf;
    });
}

Tensor sum(const Tensor& x) {
    double acc = 0.0;
    for (double v : x.data()) acc += v;
    auto xn = x.node();
    return make_op({acc}, {1}, {xn}, [xn](Node& self) {
        const double g = self.grad[0];
        for (double& gv : xn->grad) gv += g;
    });
}

Tensor mean(const Tensor& x) {
    const double inv = 1.0 / static_cast<double>(x.data().size());
    double acc = 0.0;
    for (double v : x.data()) acc += v;
    auto xn = x.node();
    return make_op({acc * inv}, {1}, {xn}, [xn, inv](Node& self) {
        const double g = self.grad[0] * inv;
        for (double& gv : xn->grad) gv += g;
    });
}

Tensor reshape(const Tensor& x, Shape new_shape) {
    if (numel(new_shape) != x.size())
        fail(ErrorKind::Validation, "reshape: element count mismatch");
    auto xn = x.node();
    std::vector<double> out = x.data();
    return make_op(std::move(out), std::move(new_shape), {xn}, [xn](Node& self) {
        for (size_t i = 0; i < self.data.size(); ++i)
            xn->grad[i] += self.grad[i];
    });
}

Tensor concat(const Tensor& a, const Tensor& b, int axis) {
    const Shape& sa = a.shape();
    const Shape& sb = b.shape();
    if (sa.size() != sb.size())
        fail(ErrorKind::Validation, "concat: rank mismatch");
    if (axis < 0 || axis >= static_cast<int>(sa.size()))
        fail(ErrorKind::Validation, "concat: axis out of range");
    for (size_t i = 0; i < sa.size(); ++i)
        if (static_cast<int>(i) != axis && sa[i] != sb[i])
            fail(ErrorKind::Validation, "concat: non-axis dims differ");

    // Row-major layout: outer block count x (axis extent * inner stride).
    int64_t outer = 1, inner = 1;
    for (int i = 0; i < axis; ++i) outer *= sa[i];
    for (size_t i = axis + 1; i < sa.size(); ++i) inner *= sa[i];
    const int64_t wa = sa[axis] * inner;
    const int64_t wb = sb[axis] * inner;

    Shape out_shape = sa;
    out_shape[axis] += sb[axis];
    std::vector<double> out(static_cast<size_t>(outer) * (wa + wb));
    for (int64_t o = 0; o < outer; ++o) {
        std::copy_n(a.data().begin() + o * wa, wa,
                    out.begin() + o * (wa + wb));
        std::copy_n(b.data().begin() + o * wb, wb,
                    out.begin() + o * (wa + wb) + wa);
    }
    auto an = a.node(), bn = b.node();
    return make_op(std::move(out), std::move(out_shape), {an, bn},
                   [an, bn, outer, wa, wb](Node& self) {
                       for (int64_t o = 0; o < outer; ++o) {
                           const double* g = &self.grad[o * (wa + wb)];
                           if (an->requires_grad)
                               for (int64_t i = 0; i < wa; ++i)
                                   an->grad[o * wa + i] += g[i];
                           if (bn->requires_grad)
                               for (int64_t i = 0; i < wb; ++i)
                                   bn->grad[o * wb + i] += g[wa + i];
                       }
                   });
}

Tensor scale_by_scalar_param(const Tensor& x, const Tensor& s) {
    if (s.size() != 1)
        fail(ErrorKind::Validation, "scale_by_scalar_param: scale must be [1]");
    const double sv = s.data()[0];
    std::vector<double> out(x.data().size());
    for (size_t i = 0; i < out.size(); ++i) out[i] = sv * x.data()[i];
    auto xn = x.node(), sn = s.node();
    return make_op(std::move(out), x.shape(), {xn, sn}, [xn, sn](Node& self) {
        const double sv = sn->data[0];
        if (xn->requires_grad)
            for (size_t i = 0; i < self.data.size(); ++i)
                xn->grad[i] += sv * self.grad[i];
        if (sn->requires_grad) {
            double acc = 0.0;
            for (size_t i = 0; i < self.data.size(); ++i)
                acc += xn->data[i] * self.grad[i];
            sn->grad[0] += acc;
        }
    });
}

void backward(const Tensor& loss) {
    if (!loss.defined() || loss.size() != 1)
        fail(ErrorKind::Validation, "backward: loss must be a scalar tensor");
    if (!loss.requires_grad()) return;

    // Iterative post-order DFS over grad-requiring parents; child-before-
    // parent order means the reversed list visits every node exactly once
    // with its downstream gradient fully accumulated.
    std::vector<Node*> order;
    std::unordered_set<Node*> seen;
    struct Frame {
        Node* node;
        size_t next_parent;
    };
    std::vector<Frame> stack;
    stack.push_back({loss.node().get(), 0});
    seen.insert(loss.node().get());
    while (!stack.empty()) {
        Frame& f = stack.back();
        if (f.next_parent < f.node->parents.size()) {
            Node* p = f.node->parents[f.next_parent++].get();
            if (p->requires_grad && seen.insert(p).second)
                stack.push_back({p, 0});
        } else {
            order.push_back(f.node);
            stack.pop_back();
        }
    }

    loss.node()->grad[0] += 1.0;
    for (auto it = order.rbegin(); it != order.rend(); ++it)
        if ((*it)->backward_fn) (*it)->backward_fn(**it);
}

void adam_step(std::vector<Tensor>& params, AdamState& state, double lr,
               double beta1, double beta2, double eps) {
    if (state.m.size() != params.size()) {
        state.m.clear();
        state.v.clear();
        for (const auto& p : params) {
            state.m.emplace_back(p.data().size(), 0.0);
            state.v.emplace_back(p.data().size(), 0.0);
        }
        state.t = 0;
    }
    state.t += 1;
    const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(state.t));
    const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(state.t));
    // Algebraically identical to lr * (m/bc1) / (sqrt(v/bc2) + eps), with
    // the bias corrections folded into two per-step scalars.
    const double step_scale = lr * std::sqrt(bc2) / bc1;
    const double eps_scaled = eps * std::sqrt(bc2);
    for (size_t pi = 0; pi < params.size(); ++pi) {
        auto& data = params[pi].data();
        const auto& grad = params[pi].grad();
        auto& m = state.m[pi];
        auto& v = state.v[pi];
        if (grad.size() != data.size())
            fail(ErrorKind::Validation, "adam_step: parameter has no gradient");
        for (size_t i = 0; i < data.size(); ++i) {
            const double g = grad[i];
            m[i] = beta1 * m[i] + (1.0 - beta1) * g;
            v[i] = beta2 * v[i] + (1.0 - beta2) * g * g;
            data[i] -= step_scale * m[i] / (std::sqrt(v[i]) + eps_scaled);
        }
    }
}

}  // namespace fieno::ad
