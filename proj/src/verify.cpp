#include "verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>

#include "autodiff.hpp"
#include "common.hpp"
#include "geometry.hpp"
#include "model.hpp"
#include "rff.hpp"
#include "truth.hpp"

namespace fieno::verify {

bool SuiteResult::passed() const {
    return std::all_of(checks.begin(), checks.end(),
                       [](const CheckResult& c) { return c.passed; });
}

namespace {

std::string fmt_tol(double measured, double tol, const char* what) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "%s %.3g (tol %.1g)", what, measured, tol);
    return buf;
}

// ---------------------------------------------------------------- rff suite

CheckResult check_projection_identity(uint64_t seed) {
    Rng rng(derive_seed(seed, "identity"));
    constexpr int kCases = 500;
    constexpr int kDegree = 8;
    constexpr double kTol = 1e-8;
    double max_err = 0.0;
    for (int c = 0; c < kCases; ++c) {
        const int m = 1 + static_cast<int>(rng.uniform_index(32));
        const double b = rng.uniform(0.0, 2.0 * M_PI);
        rff::TrigSeries phi;
        phi.cos_coeffs.resize(kDegree + 1);
        phi.sin_coeffs.resize(kDegree + 1);
        for (double& a : phi.cos_coeffs) a = rng.uniform(-1.0, 1.0);
        for (double& a : phi.sin_coeffs) a = rng.uniform(-1.0, 1.0);
        const rff::IdentityCheck chk = rff::circle_integral_identity(m, b, phi);
        max_err = std::max(max_err, std::abs(chk.lhs - chk.rhs));
    }
    return {"projection_identity", max_err < kTol,
            fmt_tol(max_err, kTol, "max abs err over 500 cases")};
}

CheckResult check_kernel_concentration(uint64_t seed) {
    Rng rng(derive_seed(seed, "pairs"));
    constexpr int kPairs = 100;
    constexpr double kSigma = 1.0;
    std::vector<std::array<double, 4>> pairs(kPairs);
    for (auto& p : pairs)
        p = {rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0),
             rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0)};

    auto errs_at = [&](int count, double* mean_out, double* max_out) {
        const rff::RffBasis basis = rff::sample_basis(
            2, count, kSigma,
            derive_seed(seed, "basis", {static_cast<uint64_t>(count)}));
        double sum = 0.0, mx = 0.0;
        for (const auto& p : pairs) {
            const double x[2] = {p[0], p[1]}, y[2] = {p[2], p[3]};
            const double d2 = (p[0] - p[2]) * (p[0] - p[2]) +
                              (p[1] - p[3]) * (p[1] - p[3]);
            const double exact = std::exp(-kSigma * kSigma * d2 / 2.0);
            const double err =
                std::abs(rff::approx_kernel(basis, x, y) - exact);
            sum += err;
            mx = std::max(mx, err);
        }
        *mean_out = sum / kPairs;
        *max_out = mx;
    };

    double mean_small, max_small, mean_big, max_big;
    errs_at(64, &mean_small, &max_small);
    errs_at(4096, &mean_big, &max_big);

    const bool ok = mean_big < 0.05 && max_big < 0.15 && mean_big < mean_small;
    char buf[192];
    std::snprintf(buf, sizeof buf,
                  "D=4096: mean %.4f (tol 0.05), max %.4f (tol 0.15); "
                  "D=64 mean %.4f (must exceed D=4096 mean)",
                  mean_big, max_big, mean_small);
    return {"kernel_concentration", ok, buf};
}

CheckResult check_basis_determinism(uint64_t seed) {
    const uint64_t s = derive_seed(seed, "basis_det");
    const rff::RffBasis a = rff::sample_basis(2, 32, 1.5, s);
    const rff::RffBasis b = rff::sample_basis(2, 32, 1.5, s);
    const rff::RffBasis c = rff::sample_basis(2, 32, 1.5, s + 1);
    const bool same = a.omegas == b.omegas && a.biases == b.biases;
    const bool differs = a.omegas != c.omegas;
    return {"basis_determinism", same && differs,
            same ? (differs ? "same seed reproduces, new seed differs"
                            : "different seed produced identical draws")
                 : "same seed produced different draws"};
}

SuiteResult run_rff(uint64_t seed) {
    SuiteResult r{"rff", {}};
    r.checks.push_back(check_projection_identity(seed));
    r.checks.push_back(check_kernel_concentration(seed));
    r.checks.push_back(check_basis_determinism(seed));
    return r;
}

// ----------------------------------------------------------- autodiff suite

double guarded_rel_err(double a, double b) {
    return std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)});
}

ad::Tensor rand_tensor(Rng& rng, const ad::Shape& shape, bool requires_grad) {
    int64_t n = 1;
    for (int d : shape) n *= d;
    std::vector<double> data(n);
    for (double& v : data) v = rng.uniform(-1.5, 1.5);
    return requires_grad ? ad::Tensor::param(std::move(data), shape)
                         : ad::Tensor::constant(std::move(data), shape);
}

// One randomized probe: build the graph, backprop, compare one coordinate's
// analytic gradient against a central finite difference of the rebuilt loss.
double fd_probe(const std::function<ad::Tensor()>& loss_fn,
                std::vector<ad::Tensor> leaves, Rng& rng) {
    for (auto& t : leaves) t.zero_grad();
    ad::backward(loss_fn());
    ad::Tensor& t = leaves[rng.uniform_index(leaves.size())];
    const size_t i = rng.uniform_index(static_cast<uint64_t>(t.size()));
    const double analytic = t.grad()[i];
    constexpr double h = 1e-6;
    const double orig = t.data()[i];
    t.data()[i] = orig + h;
    const double lp = loss_fn().item();
    t.data()[i] = orig - h;
    const double lm = loss_fn().item();
    t.data()[i] = orig;
    return guarded_rel_err(analytic, (lp - lm) / (2.0 * h));
}

// Reduce an op output to a scalar against a fixed random cotangent so the
// incoming gradient at the op is nontrivial.
ad::Tensor weighted_sum(const ad::Tensor& out, const ad::Tensor& w) {
    return ad::sum(ad::mul(out, w));
}

using OpCase = std::function<double(Rng&)>;

double probe_binary(Rng& rng,
                    ad::Tensor (*op)(const ad::Tensor&, const ad::Tensor&)) {
    const int m = 1 + static_cast<int>(rng.uniform_index(4));
    const int n = 1 + static_cast<int>(rng.uniform_index(4));
    ad::Tensor a = rand_tensor(rng, {m, n}, true);
    ad::Tensor b = rand_tensor(rng, {m, n}, true);
    ad::Tensor w = rand_tensor(rng, {m, n}, false);
    return fd_probe([=] { return weighted_sum(op(a, b), w); }, {a, b}, rng);
}

double probe_unary(Rng& rng, ad::Tensor (*op)(const ad::Tensor&)) {
    const int m = 1 + static_cast<int>(rng.uniform_index(4));
    const int n = 1 + static_cast<int>(rng.uniform_index(4));
    ad::Tensor x = rand_tensor(rng, {m, n}, true);
    ad::Tensor w = rand_tensor(rng, {m, n}, false);
    return fd_probe([=] { return weighted_sum(op(x), w); }, {x}, rng);
}

std::vector<std::pair<std::string, OpCase>> op_cases() {
    std::vector<std::pair<std::string, OpCase>> cases;
    cases.emplace_back("add", [](Rng& rng) { return probe_binary(rng, ad::add); });
    cases.emplace_back("sub", [](Rng& rng) { return probe_binary(rng, ad::sub); });
    cases.emplace_back("mul", [](Rng& rng) { return probe_binary(rng, ad::mul); });
    cases.emplace_back("add_rowvec", [](Rng& rng) {
        const int m = 1 + static_cast<int>(rng.uniform_index(4));
        const int n = 1 + static_cast<int>(rng.uniform_index(4));
        ad::Tensor x = rand_tensor(rng, {m, n}, true);
        ad::Tensor row = rand_tensor(rng, {n}, true);
        ad::Tensor w = rand_tensor(rng, {m, n}, false);
        return fd_probe([=] { return weighted_sum(ad::add_rowvec(x, row), w); },
                        {x, row}, rng);
    });
    cases.emplace_back("matmul", [](Rng& rng) {
        const int m = 1 + static_cast<int>(rng.uniform_index(4));
        const int k = 1 + static_cast<int>(rng.uniform_index(4));
        const int n = 1 + static_cast<int>(rng.uniform_index(4));
        ad::Tensor a = rand_tensor(rng, {m, k}, true);
        ad::Tensor b = rand_tensor(rng, {k, n}, true);
        ad::Tensor w = rand_tensor(rng, {m, n}, false);
        return fd_probe([=] { return weighted_sum(ad::matmul(a, b), w); },
                        {a, b}, rng);
    });
    cases.emplace_back("conv2d_valid", [](Rng& rng) {
        const int ci = 1 + static_cast<int>(rng.uniform_index(2));
        const int co = 1 + static_cast<int>(rng.uniform_index(2));
        const int h = 2 + static_cast<int>(rng.uniform_index(4));
        const int w = 2 + static_cast<int>(rng.uniform_index(4));
        const int kh = 1 + static_cast<int>(rng.uniform_index(h));
        const int kw = 1 + static_cast<int>(rng.uniform_index(w));
        ad::Tensor x = rand_tensor(rng, {ci, h, w}, true);
        ad::Tensor wt = rand_tensor(rng, {co, ci, kh, kw}, true);
        ad::Tensor bias = rand_tensor(rng, {co}, true);
        ad::Tensor cot =
            rand_tensor(rng, {co, h - kh + 1, w - kw + 1}, false);
        return fd_probe(
            [=] {
                return weighted_sum(
                    ad::conv2d(x, wt, bias, ad::Padding::Valid), cot);
            },
            {x, wt, bias}, rng);
    });
    cases.emplace_back("conv2d_same", [](Rng& rng) {
        const int ci = 1 + static_cast<int>(rng.uniform_index(2));
        const int co = 1 + static_cast<int>(rng.uniform_index(2));
        const int h = 2 + static_cast<int>(rng.uniform_index(4));
        const int w = 2 + static_cast<int>(rng.uniform_index(4));
        const int k = rng.uniform_index(2) == 0 ? 1 : 3;
        ad::Tensor x = rand_tensor(rng, {ci, h, w}, true);
        ad::Tensor wt = rand_tensor(rng, {co, ci, k, k}, true);
        ad::Tensor bias = rand_tensor(rng, {co}, true);
        ad::Tensor cot = rand_tensor(rng, {co, h, w}, false);
        return fd_probe(
            [=] {
                return weighted_sum(ad::conv2d(x, wt, bias, ad::Padding::Same),
                                    cot);
            },
            {x, wt, bias}, rng);
    });
    cases.emplace_back("cos", [](Rng& rng) { return probe_unary(rng, ad::cos); });
    cases.emplace_back("sin", [](Rng& rng) { return probe_unary(rng, ad::sin); });
    cases.emplace_back("gelu", [](Rng& rng) { return probe_unary(rng, ad::gelu); });
    cases.emplace_back("sum", [](Rng& rng) {
        const int m = 1 + static_cast<int>(rng.uniform_index(4));
        const int n = 1 + static_cast<int>(rng.uniform_index(4));
        ad::Tensor x = rand_tensor(rng, {m, n}, true);
        ad::Tensor w = rand_tensor(rng, {1}, false);
        return fd_probe([=] { return ad::mul(ad::sum(x), w); }, {x}, rng);
    });
    cases.emplace_back("mean", [](Rng& rng) {
        const int m = 1 + static_cast<int>(rng.uniform_index(4));
        const int n = 1 + static_cast<int>(rng.uniform_index(4));
        ad::Tensor x = rand_tensor(rng, {m, n}, true);
        ad::Tensor w = rand_tensor(rng, {1}, false);
        return fd_probe([=] { return ad::mul(ad::mean(x), w); }, {x}, rng);
    });
    cases.emplace_back("reshape", [](Rng& rng) {
        const int m = 1 + static_cast<int>(rng.uniform_index(4));
        const int n = 1 + static_cast<int>(rng.uniform_index(4));
        ad::Tensor x = rand_tensor(rng, {m, n}, true);
        ad::Tensor w = rand_tensor(rng, {n, m}, false);
        return fd_probe(
            [=] {
                return weighted_sum(ad::reshape(ad::cos(x), {n, m}), w);
            },
            {x}, rng);
    });
    cases.emplace_back("concat", [](Rng& rng) {
        const int m = 1 + static_cast<int>(rng.uniform_index(3));
        const int n1 = 1 + static_cast<int>(rng.uniform_index(3));
        const int n2 = 1 + static_cast<int>(rng.uniform_index(3));
        const int axis = static_cast<int>(rng.uniform_index(2));
        ad::Tensor a = rand_tensor(
            rng, axis == 0 ? ad::Shape{n1, m} : ad::Shape{m, n1}, true);
        ad::Tensor b = rand_tensor(
            rng, axis == 0 ? ad::Shape{n2, m} : ad::Shape{m, n2}, true);
        ad::Tensor w = rand_tensor(
            rng, axis == 0 ? ad::Shape{n1 + n2, m} : ad::Shape{m, n1 + n2},
            false);
        return fd_probe(
            [=] { return weighted_sum(ad::concat(a, b, axis), w); }, {a, b},
            rng);
    });
    cases.emplace_back("scale_by_scalar_param", [](Rng& rng) {
        const int m = 1 + static_cast<int>(rng.uniform_index(4));
        const int n = 1 + static_cast<int>(rng.uniform_index(4));
        ad::Tensor x = rand_tensor(rng, {m, n}, true);
        ad::Tensor s = rand_tensor(rng, {1}, true);
        ad::Tensor w = rand_tensor(rng, {m, n}, false);
        return fd_probe(
            [=] { return weighted_sum(ad::scale_by_scalar_param(x, s), w); },
            {x, s}, rng);
    });
    return cases;
}

CheckResult check_primitive(const std::string& name, const OpCase& op,
                            uint64_t seed, uint64_t index) {
    constexpr int kChecks = 50;
    constexpr double kTol = 1e-4;
    Rng rng(derive_seed(seed, "fd", {index}));
    double max_err = 0.0;
    for (int i = 0; i < kChecks; ++i) max_err = std::max(max_err, op(rng));
    return {name, max_err < kTol,
            fmt_tol(max_err, kTol, "max rel err over 50 checks")};
}

CheckResult check_full_loss_gradient(uint64_t seed) {
    constexpr double kTol = 1e-4;
    constexpr double h = 1e-6;

    model::ModelConfig mc;
    mc.kan.elm_layers = {8};
    mc.kan.mlp_layers = {8, 4};
    mc.kan.d = 4;
    mc.kan.elm_seed = derive_seed(seed, "micro_elm");
    mc.ian.conv_channels = {2, 3};
    mc.ian.kernel_size = 3;
    mc.ian.fc_layers = {16, 4};
    mc.ian.d = 4;
    mc.ian.m = 8;
    mc.bc_kind = truth::BcKind::Dirichlet;
    mc.validate();

    truth::PdeSpec pde;  // Laplace Dirichlet, analytic truth
    const truth::Dataset ds =
        truth::build_dataset("B_train", pde, 8, 5, derive_seed(seed, "micro_data"));
    model::FienoModel mdl(mc, derive_seed(seed, "micro_params"));

    std::vector<geom::Point2> pts;
    std::vector<double> targets;
    for (const auto& s : ds.interior) {
        pts.push_back(s.point);
        targets.push_back(s.true_value);
    }
    auto loss_fn = [&]() {
        ad::Tensor pred = mdl.forward(ds.boundary, pts);
        ad::Tensor diff = ad::sub(
            pred, ad::Tensor::constant(targets,
                                       {static_cast<int>(targets.size())}));
        return ad::mean(ad::mul(diff, diff));
    };

    std::vector<ad::Tensor> params = mdl.trainable_params();
    for (auto& p : params) p.zero_grad();
    ad::backward(loss_fn());

    Rng rng(derive_seed(seed, "micro_probe"));
    double max_err = 0.0;
    for (auto& p : params) {
        const int probes =
            static_cast<int>(std::min<int64_t>(3, p.size()));
        for (int k = 0; k < probes; ++k) {
            const size_t i = rng.uniform_index(static_cast<uint64_t>(p.size()));
            const double analytic = p.grad()[i];
            const double orig = p.data()[i];
            p.data()[i] = orig + h;
            const double lp = loss_fn().item();
            p.data()[i] = orig - h;
            const double lm = loss_fn().item();
            p.data()[i] = orig;
            max_err = std::max(
                max_err, guarded_rel_err(analytic, (lp - lm) / (2.0 * h)));
        }
    }
    return {"full_loss_gradient", max_err < kTol,
            fmt_tol(max_err, kTol, "max rel err over all parameter tensors")};
}

SuiteResult run_autodiff(uint64_t seed) {
    SuiteResult r{"autodiff", {}};
    const auto cases = op_cases();
    for (size_t i = 0; i < cases.size(); ++i)
        r.checks.push_back(check_primitive(cases[i].first, cases[i].second,
                                           seed, i));
    r.checks.push_back(check_full_loss_gradient(seed));
    return r;
}

// ------------------------------------------------------------- oracle suite

double harmonic_reference(double x, double y) {
    return std::exp(x) * std::sin(y);
}

CheckResult check_mfs_training_boundary(uint64_t seed) {
    constexpr double kTol = 1e-6;
    const geom::BoundaryShape& shape = geom::boundary_by_id("B_train");
    truth::PdeSpec pde;  // Laplace Dirichlet
    std::vector<geom::BoundarySample> boundary =
        geom::equispaced_boundary(shape, 2000);
    for (auto& s : boundary)
        s.value = harmonic_reference(s.point.x, s.point.y);
    const truth::MfsSolution sol = truth::mfs_solve(shape, pde, boundary, 200);
    const std::vector<geom::Point2> pts =
        geom::sample_interior(shape, 100, 0.02, derive_seed(seed, "mfs_pts"));
    double max_err = 0.0;
    for (const auto& p : pts)
        max_err = std::max(
            max_err, std::abs(sol.value(p.x, p.y) - harmonic_reference(p.x, p.y)));
    return {"mfs_training_boundary", max_err < kTol,
            fmt_tol(max_err, kTol, "max abs err at 100 interior points")};
}

CheckResult check_mfs_neumann(uint64_t seed) {
    constexpr double kTol = 1e-5;
    const geom::BoundaryShape& shape = geom::boundary_by_id("B_train");
    truth::PdeSpec pde;
    pde.bc_kind = truth::BcKind::Neumann;
    // Normal derivative of the harmonic reference; compatible by Green's
    // identity, anchored at u(0,0) = 0 (its true value there).
    std::vector<geom::BoundarySample> boundary =
        geom::equispaced_boundary(shape, 2000);
    for (auto& s : boundary) {
        const double ux = std::exp(s.point.x) * std::sin(s.point.y);
        const double uy = std::exp(s.point.x) * std::cos(s.point.y);
        s.value = ux * s.nx + uy * s.ny;
    }
    const truth::MfsSolution sol =
        truth::mfs_solve(shape, pde, boundary, 200, /*anchor_value=*/0.0);
    const std::vector<geom::Point2> pts = geom::sample_interior(
        shape, 100, 0.02, derive_seed(seed, "mfs_neumann_pts"));
    double max_err = 0.0;
    for (const auto& p : pts)
        max_err = std::max(
            max_err, std::abs(sol.value(p.x, p.y) - harmonic_reference(p.x, p.y)));
    return {"mfs_neumann", max_err < kTol,
            fmt_tol(max_err, kTol, "max abs err at 100 interior points")};
}

CheckResult check_truth_mode_agreement(uint64_t seed) {
    constexpr double kTol = 1e-5;
    truth::PdeSpec analytic;  // Laplace Dirichlet Analytic
    truth::PdeSpec oracle = analytic;
    oracle.truth_mode = truth::TruthMode::MfsOracle;
    double max_err = 0.0;
    std::string worst;
    const auto& presets = geom::preset_boundaries();
    for (size_t i = 0; i < presets.size(); ++i) {
        const uint64_t dseed = derive_seed(seed, "agree", {i});
        const truth::Dataset a =
            truth::build_dataset(presets[i].id, analytic, 200, 50, dseed);
        const truth::Dataset b =
            truth::build_dataset(presets[i].id, oracle, 200, 50, dseed);
        for (size_t k = 0; k < a.interior.size(); ++k) {
            if (a.interior[k].point.x != b.interior[k].point.x ||
                a.interior[k].point.y != b.interior[k].point.y)
                return {"truth_mode_agreement", false,
                        "interior points diverged between modes on " +
                            presets[i].id};
            const double err = std::abs(a.interior[k].true_value -
                                        b.interior[k].true_value);
            if (err > max_err) {
                max_err = err;
                worst = presets[i].id;
            }
        }
    }
    return {"truth_mode_agreement", max_err <= kTol,
            fmt_tol(max_err, kTol,
                    ("max |analytic - oracle| (worst on " + worst + ")")
                        .c_str())};
}

CheckResult check_manufactured_residuals(uint64_t seed) {
    constexpr double kTol = 1e-5;
    constexpr double h = 1e-4;
    Rng rng(derive_seed(seed, "mms_pts"));
    double max_resid = 0.0;
    std::string worst;

    auto sample_points = [&](int n) {
        std::vector<std::pair<double, double>> pts(n);
        for (auto& p : pts) {
            const double r = 0.8 * std::sqrt(rng.uniform());
            const double t = rng.uniform(0.0, 2.0 * M_PI);
            p = {r * std::cos(t), r * std::sin(t)};
        }
        return pts;
    };
    auto laplacian = [&](const std::function<double(double, double)>& u,
                         double x, double y) {
        return (u(x + h, y) + u(x - h, y) + u(x, y + h) + u(x, y - h) -
                4.0 * u(x, y)) /
               (h * h);
    };

    struct Case {
        const char* name;
        truth::PdeSpec pde;
    };
    std::vector<Case> cases;
    {
        truth::PdeSpec p;
        p.truth_mode = truth::TruthMode::Manufactured;
        p.equation = truth::Equation::Laplace;
        cases.push_back({"laplace", p});
        p.equation = truth::Equation::Helmholtz;
        p.helmholtz_k = 1.0;
        cases.push_back({"helmholtz_k1", p});
        p.helmholtz_k = 2.5;
        cases.push_back({"helmholtz_k2.5", p});
        p.equation = truth::Equation::Darcy;
        p.helmholtz_k = 1.0;
        cases.push_back({"darcy", p});
    }

    for (const auto& c : cases) {
        const truth::Manufactured mf = truth::manufacture(c.pde);
        for (const auto& [x, y] : sample_points(200)) {
            double resid = 0.0;
            switch (c.pde.equation) {
                case truth::Equation::Laplace:
                    resid = laplacian(mf.u.value, x, y);
                    break;
                case truth::Equation::Helmholtz:
                    resid = laplacian(mf.u.value, x, y) +
                            c.pde.helmholtz_k * c.pde.helmholtz_k *
                                mf.u.value(x, y);
                    break;
                case truth::Equation::Darcy: {
                    // -div(a grad u) - f via nested central differences.
                    auto flux_x = [&](double px, double py) {
                        return mf.a.value(px, py) *
                               (mf.u.value(px + h, py) -
                                mf.u.value(px - h, py)) /
                               (2.0 * h);
                    };
                    auto flux_y = [&](double px, double py) {
                        return mf.a.value(px, py) *
                               (mf.u.value(px, py + h) -
                                mf.u.value(px, py - h)) /
                               (2.0 * h);
                    };
                    const double div =
                        (flux_x(x + h, y) - flux_x(x - h, y)) / (2.0 * h) +
                        (flux_y(x, y + h) - flux_y(x, y - h)) / (2.0 * h);
                    resid = -div - mf.f(x, y);
                    break;
                }
            }
            // Gradient field consistency, same tolerance.
            const auto g = mf.u.gradient(x, y);
            const double gx_fd =
                (mf.u.value(x + h, y) - mf.u.value(x - h, y)) / (2.0 * h);
            const double gy_fd =
                (mf.u.value(x, y + h) - mf.u.value(x, y - h)) / (2.0 * h);
            const double err = std::max(
                {std::abs(resid), std::abs(g[0] - gx_fd), std::abs(g[1] - gy_fd)});
            if (err > max_resid) {
                max_resid = err;
                worst = c.name;
            }
        }
    }
    return {"manufactured_residuals", max_resid < kTol,
            fmt_tol(max_resid, kTol,
                    ("max PDE/gradient residual (worst: " + worst + ")")
                        .c_str())};
}

CheckResult check_neumann_compatibility(uint64_t seed) {
    constexpr double kTol = 1e-8;
    const geom::BoundaryShape& shape = geom::boundary_by_id("B_train");
    truth::PdeSpec pde;
    pde.bc_kind = truth::BcKind::Neumann;
    pde.truth_mode = truth::TruthMode::MfsOracle;

    const auto raw = [&](const geom::BoundarySample& s) {
        return truth::neumann_value(pde, s);
    };
    const double perimeter =
        truth::boundary_line_integral(shape, [](const geom::BoundarySample&) {
            return 1.0;
        });
    const double shift =
        truth::boundary_line_integral(shape, raw) / perimeter;
    const double residual = truth::boundary_line_integral(
        shape, [&](const geom::BoundarySample& s) { return raw(s) - shift; });

    double max_g = 0.0;
    for (const auto& s : geom::equispaced_boundary(shape, 512))
        max_g = std::max(max_g, std::abs(raw(s)));
    const double rel = std::abs(residual) / (perimeter * max_g);

    // The dataset builder must store exactly the projected data.
    const truth::Dataset ds = truth::build_dataset(
        "B_train", pde, 64, 8, derive_seed(seed, "neumann_ds"));
    double max_diff = 0.0;
    for (const auto& s : ds.boundary)
        max_diff = std::max(max_diff, std::abs(s.value - (raw(s) - shift)));

    const bool ok = rel < kTol && max_diff < 1e-12;
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "normalized post-projection mean %.3g (tol 1e-8); stored "
                  "data offset %.3g (tol 1e-12)",
                  rel, max_diff);
    return {"neumann_compatibility", ok, buf};
}

SuiteResult run_oracle(uint64_t seed) {
    SuiteResult r{"oracle", {}};
    r.checks.push_back(check_mfs_training_boundary(seed));
    r.checks.push_back(check_mfs_neumann(seed));
    r.checks.push_back(check_truth_mode_agreement(seed));
    r.checks.push_back(check_manufactured_residuals(seed));
    r.checks.push_back(check_neumann_compatibility(seed));
    return r;
}

}  // namespace

const std::vector<std::string>& suite_names() {
    static const std::vector<std::string> kNames = {"rff", "autodiff",
                                                    "oracle"};
    return kNames;
}

SuiteResult run_suite(const std::string& name, uint64_t seed) {
    if (name == "rff") return run_rff(seed);
    if (name == "autodiff") return run_autodiff(seed);
    if (name == "oracle") return run_oracle(seed);
    fail(ErrorKind::Validation,
         "verify: unknown suite '" + name + "' (have rff, autodiff, oracle)");
}

std::vector<SuiteResult> run_all(uint64_t seed) {
    std::vector<SuiteResult> out;
    for (const auto& name : suite_names()) out.push_back(run_suite(name, seed));
    return out;
}

std::string report(const std::vector<SuiteResult>& suites) {
    std::ostringstream out;
    int total = 0, passed = 0;
    for (const auto& s : suites)
        for (const auto& c : s.checks) {
            ++total;
            if (c.passed) ++passed;
            out << (c.passed ? "[PASS] " : "[FAIL] ") << s.suite << '/'
                << c.name << ": " << c.detail << '\n';
        }
    out << passed << '/' << total << " checks passed\n";
    return out.str();
}

}  // namespace fieno::verify
