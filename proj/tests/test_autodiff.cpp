#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "autodiff.hpp"
#include "common.hpp"

using namespace fieno;
using ad::Tensor;

TEST_CASE("tensor constructors validate shape against data") {
    const Tensor t = Tensor::constant({1, 2, 3, 4, 5, 6}, {2, 3});
    CHECK(t.size() == 6);
    CHECK(t.shape() == ad::Shape{2, 3});
    CHECK_FALSE(t.requires_grad());

    const Tensor p = Tensor::param({1, 2}, {2});
    CHECK(p.requires_grad());

    const Tensor z = Tensor::zeros({3, 2}, true);
    CHECK(z.size() == 6);
    for (double v : z.data()) CHECK(v == 0.0);

    CHECK_THROWS_AS(Tensor::constant({1, 2, 3}, {2, 2}), Error);
    CHECK_THROWS_AS(Tensor::zeros({2, 0}), Error);
    CHECK_THROWS_AS(Tensor::constant({1, 2}, {2}).item(), Error);
    CHECK(Tensor::scalar(4.5).item() == 4.5);
}

TEST_CASE("elementwise ops compute and differentiate exactly") {
    const std::vector<double> av{1.0, -2.0, 0.5};
    const std::vector<double> bv{3.0, 4.0, -1.5};
    Tensor a = Tensor::param(av, {3});
    Tensor b = Tensor::param(bv, {3});

    const Tensor s = ad::add(a, b);
    const Tensor d = ad::sub(a, b);
    const Tensor m = ad::mul(a, b);
    for (int i = 0; i < 3; ++i) {
        CHECK(s.data()[i] == av[i] + bv[i]);
        CHECK(d.data()[i] == av[i] - bv[i]);
        CHECK(m.data()[i] == av[i] * bv[i]);
    }

    ad::backward(ad::sum(m));
    for (int i = 0; i < 3; ++i) {
        CHECK(a.grad()[i] == bv[i]);
        CHECK(b.grad()[i] == av[i]);
    }

    const Tensor wrong = Tensor::constant({1, 2}, {2});
    CHECK_THROWS_AS(ad::add(a, wrong), Error);
    CHECK_THROWS_AS(ad::mul(a, wrong), Error);
}

TEST_CASE("add_rowvec broadcasts over rows and sums gradients per column") {
    Tensor x = Tensor::param({1, 2, 3, 4, 5, 6}, {2, 3});
    Tensor row = Tensor::param({10, 20, 30}, {3});
    const Tensor y = ad::add_rowvec(x, row);
    const std::vector<double> want{11, 22, 33, 14, 25, 36};
    CHECK(y.data() == want);

    // Weighted cotangent: d/drow[j] = sum_i w[i][j].
    const Tensor w = Tensor::constant({1, 2, 3, 4, 5, 6}, {2, 3});
    ad::backward(ad::sum(ad::mul(y, w)));
    CHECK(row.grad() == std::vector<double>{5, 7, 9});
    CHECK(x.grad() == std::vector<double>{1, 2, 3, 4, 5, 6});

    CHECK_THROWS_AS(ad::add_rowvec(x, Tensor::constant({1, 2}, {2})), Error);
}

TEST_CASE("matmul matches a hand-computed product and gradient") {
    Tensor a = Tensor::param({1, 2, 3, 4, 5, 6}, {2, 3});
    Tensor b = Tensor::param({7, 8, 9, 10, 11, 12}, {3, 2});
    const Tensor c = ad::matmul(a, b);
    CHECK(c.shape() == ad::Shape{2, 2});
    CHECK(c.data() == std::vector<double>{58, 64, 139, 154});

    ad::backward(ad::sum(c));
    // dA = 1 B^T (row sums of B), dB = A^T 1 (column sums of A).
    CHECK(a.grad() == std::vector<double>{15, 19, 23, 15, 19, 23});
    CHECK(b.grad() == std::vector<double>{5, 5, 7, 7, 9, 9});

    CHECK_THROWS_AS(ad::matmul(a, Tensor::constant({1, 2}, {2, 1})), Error);
    CHECK_THROWS_AS(ad::matmul(a, Tensor::constant({1, 2}, {2})), Error);
}

TEST_CASE("conv2d valid matches a hand computation") {
    Tensor x = Tensor::param({1, 2, 3, 4, 5, 6, 7, 8, 9}, {1, 3, 3});
    Tensor w = Tensor::param({1, 0, 0, 1}, {1, 1, 2, 2});
    Tensor bias = Tensor::param({0.5}, {1});
    const Tensor y = ad::conv2d(x, w, bias, ad::Padding::Valid);
    CHECK(y.shape() == ad::Shape{1, 2, 2});
    CHECK(y.data() == std::vector<double>{6.5, 8.5, 12.5, 14.5});

    ad::backward(ad::sum(y));
    // Bias sees every output once.
    CHECK(bias.grad() == std::vector<double>{4});
    // Weight gradient: sums of the input patch positions.
    CHECK(w.grad() == std::vector<double>{1 + 2 + 4 + 5, 2 + 3 + 5 + 6,
                                          4 + 5 + 7 + 8, 5 + 6 + 8 + 9});

    // Kernel larger than the input is invalid without padding.
    Tensor big = Tensor::param(std::vector<double>(16, 1.0), {1, 1, 4, 4});
    CHECK_THROWS_AS(ad::conv2d(x, big, ad::Padding::Valid), Error);
}

TEST_CASE("conv2d same keeps spatial size and zero-pads the border") {
    Tensor x = Tensor::param(std::vector<double>(9, 1.0), {1, 3, 3});
    Tensor w = Tensor::param(std::vector<double>(9, 1.0), {1, 1, 3, 3});
    const Tensor y = ad::conv2d(x, w, ad::Padding::Same);
    CHECK(y.shape() == ad::Shape{1, 3, 3});
    // Ones convolved with ones count the overlap area.
    CHECK(y.data() == std::vector<double>{4, 6, 4, 6, 9, 6, 4, 6, 4});

    Tensor even = Tensor::param(std::vector<double>(4, 1.0), {1, 1, 2, 2});
    CHECK_THROWS_AS(ad::conv2d(x, even, ad::Padding::Same), Error);
    CHECK_THROWS_AS(
        ad::conv2d(x, w, Tensor::constant({1, 2}, {2}), ad::Padding::Same),
        Error);
}

TEST_CASE("multi-channel conv2d sums over input channels") {
    // Two input channels, one output channel, 1x1 kernel = weighted sum.
    Tensor x = Tensor::param({1, 2, 3, 4, 10, 20, 30, 40}, {2, 2, 2});
    Tensor w = Tensor::param({2, 0.5}, {1, 2, 1, 1});
    const Tensor y = ad::conv2d(x, w, ad::Padding::Valid);
    CHECK(y.shape() == ad::Shape{1, 2, 2});
    CHECK(y.data() == std::vector<double>{7, 14, 21, 28});
}

TEST_CASE("trig and gelu activations match references") {
    Tensor x = Tensor::param({0.3, 1.1}, {2});
    const Tensor c = ad::cos(x);
    const Tensor s = ad::sin(x);
    CHECK(c.data()[0] == doctest::Approx(std::cos(0.3)).epsilon(1e-16));
    CHECK(s.data()[1] == doctest::Approx(std::sin(1.1)).epsilon(1e-16));

    ad::backward(ad::sum(c));
    CHECK(x.grad()[0] == doctest::Approx(-std::sin(0.3)).epsilon(1e-15));
    CHECK(x.grad()[1] == doctest::Approx(-std::sin(1.1)).epsilon(1e-15));

    // gelu(x) = x Phi(x), references from 30-digit arithmetic.
    CHECK(ad::gelu_scalar(0.0) == 0.0);
    CHECK(ad::gelu_scalar(1.0) ==
          doctest::Approx(0.841344746068542948585).epsilon(1e-15));
    CHECK(ad::gelu_scalar(0.5) ==
          doctest::Approx(0.345731230637006551819).epsilon(1e-15));
    CHECK(ad::gelu_scalar(-1.3) ==
          doctest::Approx(-0.125840629961293433098).epsilon(1e-15));
    CHECK(ad::gelu_scalar(2.7) ==
          doctest::Approx(2.69063917073179019506).epsilon(1e-15));
    // Phi(x) + Phi(-x) = 1 implies gelu(x) - gelu(-x) = x.
    for (double v : {0.17, 0.9, 2.3, 4.0})
        CHECK(ad::gelu_scalar(v) - ad::gelu_scalar(-v) ==
              doctest::Approx(v).epsilon(1e-14));

    Tensor g = Tensor::param({1.0}, {1});
    CHECK(ad::gelu(g).data()[0] ==
          doctest::Approx(0.841344746068542948585).epsilon(1e-15));
}

TEST_CASE("sum and mean reduce to scalars with uniform gradients") {
    Tensor x = Tensor::param({1, 2, 3, 4}, {2, 2});
    const Tensor s = ad::sum(x);
    CHECK(s.shape() == ad::Shape{1});
    CHECK(s.item() == 10.0);

    const Tensor m = ad::mean(x);
    CHECK(m.item() == 2.5);
    ad::backward(m);
    for (double gv : x.grad()) CHECK(gv == 0.25);
}

TEST_CASE("reshape reinterprets data and routes gradients through") {
    Tensor x = Tensor::param({1, 2, 3, 4, 5, 6}, {2, 3});
    const Tensor y = ad::reshape(x, {3, 2});
    CHECK(y.shape() == ad::Shape{3, 2});
    CHECK(y.data() == x.data());
    ad::backward(ad::sum(ad::mul(y, y)));
    for (int i = 0; i < 6; ++i) CHECK(x.grad()[i] == 2.0 * x.data()[i]);

    CHECK_THROWS_AS(ad::reshape(x, {4, 2}), Error);
}

TEST_CASE("concat joins along either axis and splits gradients") {
    Tensor a = Tensor::param({1, 2}, {1, 2});
    Tensor b = Tensor::param({3, 4}, {1, 2});
    const Tensor rows = ad::concat(a, b, 0);
    CHECK(rows.shape() == ad::Shape{2, 2});
    CHECK(rows.data() == std::vector<double>{1, 2, 3, 4});

    const Tensor cols = ad::concat(a, b, 1);
    CHECK(cols.shape() == ad::Shape{1, 4});
    CHECK(cols.data() == std::vector<double>{1, 2, 3, 4});

    const Tensor w = Tensor::constant({10, 20, 30, 40}, {2, 2});
    ad::backward(ad::sum(ad::mul(rows, w)));
    CHECK(a.grad() == std::vector<double>{10, 20});
    CHECK(b.grad() == std::vector<double>{30, 40});

    CHECK_THROWS_AS(ad::concat(a, Tensor::constant({1, 2, 3}, {1, 3}), 0),
                    Error);
    CHECK_THROWS_AS(ad::concat(a, b, 2), Error);
}

TEST_CASE("scale_by_scalar_param differentiates both factors") {
    Tensor x = Tensor::param({1, 2, 3}, {3});
    Tensor s = Tensor::param({0.5}, {1});
    const Tensor y = ad::scale_by_scalar_param(x, s);
    CHECK(y.data() == std::vector<double>{0.5, 1.0, 1.5});

    const Tensor w = Tensor::constant({2, 3, 4}, {3});
    ad::backward(ad::sum(ad::mul(y, w)));
    // ds = sum x.w, dx = s.w
    CHECK(s.grad()[0] == 1 * 2 + 2 * 3 + 3 * 4);
    CHECK(x.grad() == std::vector<double>{1.0, 1.5, 2.0});

    CHECK_THROWS_AS(ad::scale_by_scalar_param(x, Tensor::constant({1, 2}, {2})),
                    Error);
}

TEST_CASE("backward requires a scalar loss and handles shared subgraphs") {
    Tensor x = Tensor::param({1, 2}, {2});
    CHECK_THROWS_AS(ad::backward(ad::mul(x, x)), Error);

    // Diamond: the same node used twice accumulates both paths.
    const Tensor sq = ad::mul(x, x);
    const Tensor twice = ad::add(sq, sq);
    ad::backward(ad::sum(twice));
    CHECK(x.grad() == std::vector<double>{4, 8});  // 4x
}

TEST_CASE("constants never accumulate gradient") {
    Tensor x = Tensor::param({1, 2}, {2});
    Tensor c = Tensor::constant({3, 4}, {2});
    ad::backward(ad::sum(ad::mul(x, c)));
    CHECK(x.grad() == std::vector<double>{3, 4});
    CHECK_FALSE(c.requires_grad());
    for (const double g : c.grad()) CHECK(g == 0.0);
}

TEST_CASE("a ten-thousand-node chain back-propagates without recursion limits") {
    Tensor x = Tensor::param({1.0}, {1});
    const Tensor one = Tensor::scalar(1.0);
    Tensor z{x.node()};
    for (int i = 0; i < 10000; ++i) z = ad::add(z, one);
    CHECK(z.item() == doctest::Approx(10001.0).epsilon(1e-12));
    ad::backward(z);
    CHECK(x.grad()[0] == 1.0);
}

TEST_CASE("zero_grad clears accumulated gradients") {
    Tensor x = Tensor::param({1, 2}, {2});
    ad::backward(ad::sum(ad::mul(x, x)));
    CHECK(x.grad()[0] != 0.0);
    x.zero_grad();
    CHECK(x.grad() == std::vector<double>{0, 0});
}

TEST_CASE("adam takes a bias-corrected first step") {
    std::vector<Tensor> params{Tensor::param({1.0, -2.0}, {2})};
    params[0].node()->ensure_grad();
    params[0].grad() = {1.0, 0.5};
    ad::AdamState state;
    ad::adam_step(params, state, 0.01);
    CHECK(state.t == 1);
    // With bias correction at t = 1, m_hat = g and sqrt(v_hat) = |g|, so the
    // step is lr * g / (|g| + eps): sign(g) times almost exactly lr.
    const double eps = 1e-8;
    CHECK(params[0].data()[0] ==
          doctest::Approx(1.0 - 0.01 * 1.0 / (1.0 + eps)).epsilon(1e-12));
    CHECK(params[0].data()[1] ==
          doctest::Approx(-2.0 - 0.01 * 0.5 / (0.5 + eps)).epsilon(1e-12));

    // A second identical step keeps moving in the same direction.
    const double after_one = params[0].data()[0];
    params[0].grad() = {1.0, 0.5};
    ad::adam_step(params, state, 0.01);
    CHECK(state.t == 2);
    CHECK(params[0].data()[0] < after_one);
}

TEST_CASE("adam rejects tensors that carry no gradient buffer") {
    // Parameters allocate their gradient at construction; a constant passed
    // where a parameter belongs has no buffer and must be rejected.
    std::vector<Tensor> params{Tensor::constant({1.0}, {1})};
    ad::AdamState state;
    CHECK_THROWS_AS(ad::adam_step(params, state, 0.01), Error);
}
