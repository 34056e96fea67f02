#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <numbers>
#include <string>
#include <vector>

#include "common.hpp"
#include "geometry.hpp"
#include "truth.hpp"

using namespace fieno;
using std::numbers::pi;

namespace {

truth::PdeSpec spec(truth::Equation eq, truth::BcKind bc, truth::TruthMode tm,
                    double k = 1.0) {
    truth::PdeSpec p;
    p.equation = eq;
    p.bc_kind = bc;
    p.truth_mode = tm;
    p.helmholtz_k = k;
    return p;
}

std::string temp_dir() {
    static int counter = 0;
    auto dir = std::filesystem::temp_directory_path() /
               ("fieno_truth_" + std::to_string(::getpid()) + "_" +
                std::to_string(counter++));
    std::filesystem::create_directories(dir);
    return dir.string();
}

ErrorKind kind_of(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.kind();
    }
    FAIL("expected an Error");
    return ErrorKind::Internal;
}

}  // namespace

TEST_CASE("enum names round-trip and reject unknown strings") {
    using truth::Equation;
    using truth::BcKind;
    using truth::TruthMode;
    for (auto eq : {Equation::Laplace, Equation::Helmholtz, Equation::Darcy})
        CHECK(truth::parse_equation(truth::to_string(eq)) == eq);
    for (auto bc : {BcKind::Dirichlet, BcKind::Neumann})
        CHECK(truth::parse_bc_kind(truth::to_string(bc)) == bc);
    for (auto tm : {TruthMode::Analytic, TruthMode::Manufactured,
                    TruthMode::MfsOracle})
        CHECK(truth::parse_truth_mode(truth::to_string(tm)) == tm);
    CHECK_THROWS_AS(truth::parse_equation("poisson"), Error);
    CHECK_THROWS_AS(truth::parse_bc_kind("robin"), Error);
    CHECK_THROWS_AS(truth::parse_truth_mode("magic"), Error);
}

TEST_CASE("PdeSpec validation enforces the supported combinations") {
    using truth::Equation;
    using truth::BcKind;
    using truth::TruthMode;
    // Valid corners.
    spec(Equation::Laplace, BcKind::Dirichlet, TruthMode::Analytic).validate();
    spec(Equation::Laplace, BcKind::Neumann, TruthMode::Manufactured).validate();
    spec(Equation::Helmholtz, BcKind::Dirichlet, TruthMode::MfsOracle, 2.5)
        .validate();
    spec(Equation::Darcy, BcKind::Dirichlet, TruthMode::Manufactured).validate();

    // Analytic exists only for Laplace/Dirichlet.
    CHECK(kind_of([] {
        spec(truth::Equation::Helmholtz, truth::BcKind::Dirichlet,
             truth::TruthMode::Analytic)
            .validate();
    }) == ErrorKind::Validation);
    CHECK(kind_of([] {
        spec(truth::Equation::Laplace, truth::BcKind::Neumann,
             truth::TruthMode::Analytic)
            .validate();
    }) == ErrorKind::Validation);
    // No fundamental solution for the variable-coefficient equation.
    CHECK(kind_of([] {
        spec(truth::Equation::Darcy, truth::BcKind::Dirichlet,
             truth::TruthMode::MfsOracle)
            .validate();
    }) == ErrorKind::Validation);
    CHECK(kind_of([] {
        spec(truth::Equation::Helmholtz, truth::BcKind::Dirichlet,
             truth::TruthMode::Manufactured, 0.0)
            .validate();
    }) == ErrorKind::Validation);
}

TEST_CASE("manufactured solutions match closed-form references") {
    // Laplace: u = e^x sin y.
    const auto lap = truth::manufacture(spec(truth::Equation::Laplace,
                                             truth::BcKind::Dirichlet,
                                             truth::TruthMode::Manufactured));
    CHECK(lap.u.value(0.3, 0.4) ==
          doctest::Approx(0.525659779196978752379).epsilon(1e-15));
    const auto lap_grad = lap.u.gradient(0.3, 0.4);
    CHECK(lap_grad[0] ==
          doctest::Approx(0.525659779196978752379).epsilon(1e-14));
    CHECK(lap_grad[1] ==
          doctest::Approx(1.24330229506950260393).epsilon(1e-14));

    // Helmholtz: u = cos(k (x cos 0.3 + y sin 0.3)).
    const auto h1 = truth::manufacture(spec(truth::Equation::Helmholtz,
                                            truth::BcKind::Dirichlet,
                                            truth::TruthMode::Manufactured, 1.0));
    CHECK(h1.u.value(0.2, -0.1) ==
          doctest::Approx(0.986984738859791746704).epsilon(1e-15));
    const auto h25 = truth::manufacture(spec(truth::Equation::Helmholtz,
                                             truth::BcKind::Dirichlet,
                                             truth::TruthMode::Manufactured, 2.5));
    CHECK(h25.u.value(0.2, -0.1) ==
          doctest::Approx(0.919579196941230961949).epsilon(1e-15));

    // Darcy: u* = sin x cos y, a = 1 + 0.5 sin r, f = -div(a grad u*).
    const auto dar = truth::manufacture(spec(truth::Equation::Darcy,
                                             truth::BcKind::Dirichlet,
                                             truth::TruthMode::Manufactured));
    CHECK(dar.u.value(0.5, 0.5) ==
          doctest::Approx(0.420735492403948253326).epsilon(1e-15));
    CHECK(dar.a.value(0.5, 0.5) ==
          doctest::Approx(1.32481846954003122206).epsilon(1e-15));
    CHECK(dar.f(0.5, 0.5) ==
          doctest::Approx(0.969570036664335581811).epsilon(1e-12));
}

TEST_CASE("manufactured gradients agree with finite differences") {
    const double h = 1e-6;
    for (auto pde :
         {spec(truth::Equation::Laplace, truth::BcKind::Dirichlet,
               truth::TruthMode::Manufactured),
          spec(truth::Equation::Helmholtz, truth::BcKind::Dirichlet,
               truth::TruthMode::Manufactured, 1.7),
          spec(truth::Equation::Darcy, truth::BcKind::Dirichlet,
               truth::TruthMode::Manufactured)}) {
        const auto man = truth::manufacture(pde);
        for (auto [x, y] : {std::pair{0.2, 0.6}, {-0.4, 0.1}, {0.0, -0.8}}) {
            const auto g = man.u.gradient(x, y);
            const double fx =
                (man.u.value(x + h, y) - man.u.value(x - h, y)) / (2 * h);
            const double fy =
                (man.u.value(x, y + h) - man.u.value(x, y - h)) / (2 * h);
            CHECK(g[0] == doctest::Approx(fx).epsilon(1e-7));
            CHECK(g[1] == doctest::Approx(fy).epsilon(1e-7));
        }
    }
}

TEST_CASE("boundary data uses the fixed functions or the manufactured trace") {
    geom::Point2 p = geom::Point2::from_xy(0.3, 0.4);
    const double exsy = 0.525659779196978752379;  // e^0.3 sin 0.4

    // Analytic and oracle modes prescribe e^x sin y.
    CHECK(truth::dirichlet_value(spec(truth::Equation::Laplace,
                                      truth::BcKind::Dirichlet,
                                      truth::TruthMode::Analytic),
                                 p) == doctest::Approx(exsy).epsilon(1e-15));
    CHECK(truth::dirichlet_value(spec(truth::Equation::Laplace,
                                      truth::BcKind::Dirichlet,
                                      truth::TruthMode::MfsOracle),
                                 p) == doctest::Approx(exsy).epsilon(1e-15));
    // Manufactured Laplace shares the same solution, so the trace agrees.
    CHECK(truth::dirichlet_value(spec(truth::Equation::Laplace,
                                      truth::BcKind::Dirichlet,
                                      truth::TruthMode::Manufactured),
                                 p) == doctest::Approx(exsy).epsilon(1e-15));

    // Fixed Neumann data h = 0.1 cos x cos y.
    geom::BoundarySample s;
    s.point = p;
    s.nx = 1.0;
    s.ny = 0.0;
    CHECK(truth::neumann_value(spec(truth::Equation::Laplace,
                                    truth::BcKind::Neumann,
                                    truth::TruthMode::MfsOracle),
                               s) ==
          doctest::Approx(0.0879923176281257096176).epsilon(1e-14));

    // Manufactured Neumann data is grad u . n.
    const auto man = truth::manufacture(spec(truth::Equation::Laplace,
                                             truth::BcKind::Neumann,
                                             truth::TruthMode::Manufactured));
    s.nx = 0.6;
    s.ny = 0.8;
    const auto g = man.u.gradient(0.3, 0.4);
    CHECK(truth::neumann_value(spec(truth::Equation::Laplace,
                                    truth::BcKind::Neumann,
                                    truth::TruthMode::Manufactured),
                               s) ==
          doctest::Approx(0.6 * g[0] + 0.8 * g[1]).epsilon(1e-14));
}

TEST_CASE("boundary_line_integral integrates exactly on the circle") {
    const auto& circle = geom::boundary_by_id("circle");
    const double perimeter = truth::boundary_line_integral(
        circle, [](const geom::BoundarySample&) { return 1.0; });
    CHECK(perimeter == doctest::Approx(2 * pi).epsilon(1e-12));

    const double cos_sq = truth::boundary_line_integral(
        circle, [](const geom::BoundarySample& s) {
            return std::cos(s.alpha) * std::cos(s.alpha);
        });
    CHECK(cos_sq == doctest::Approx(pi).epsilon(1e-12));
}

TEST_CASE("mfs_solve reproduces harmonic data and flags impossible fits") {
    const auto& shape = geom::boundary_by_id("circle");
    const auto pde = spec(truth::Equation::Laplace, truth::BcKind::Dirichlet,
                          truth::TruthMode::MfsOracle);
    auto boundary = geom::equispaced_boundary(shape, 256);
    for (auto& s : boundary)
        s.value = std::exp(s.point.x) * std::sin(s.point.y);
    const auto sol = truth::mfs_solve(shape, pde, boundary, 64);
    CHECK(sol.max_residual() < 1e-8);
    CHECK(sol.value(0.3, -0.2) ==
          doctest::Approx(std::exp(0.3) * std::sin(-0.2)).epsilon(1e-8));

    // White noise is not the trace of any harmonic function resolvable by
    // 32 smooth sources; the residual gate must fire.
    auto noisy = geom::equispaced_boundary(shape, 128);
    Rng rng(4);
    for (auto& s : noisy) s.value = rng.uniform(-1.0, 1.0);
    CHECK(kind_of([&] { truth::mfs_solve(shape, pde, noisy, 32); }) ==
          ErrorKind::Numeric);

    CHECK(kind_of([&] { truth::mfs_solve(shape, pde, boundary, 8); }) ==
          ErrorKind::Validation);
}

TEST_CASE("mfs_solve recovers a Helmholtz plane wave on the circle") {
    // u = cos(k (x cos 0.3 + y sin 0.3)) solves u_xx + u_yy + k^2 u = 0 for
    // any k, so feeding its trace as Dirichlet data must reproduce it in the
    // interior. This drives the Bessel-Y0 fundamental solution end to end.
    const auto& shape = geom::boundary_by_id("circle");
    for (double k : {1.0, 2.5}) {
        const auto pde = spec(truth::Equation::Helmholtz,
                              truth::BcKind::Dirichlet,
                              truth::TruthMode::MfsOracle, k);
        auto wave = [k](double x, double y) {
            return std::cos(k * (x * std::cos(0.3) + y * std::sin(0.3)));
        };
        auto boundary = geom::equispaced_boundary(shape, 512);
        for (auto& s : boundary) s.value = wave(s.point.x, s.point.y);
        const auto sol = truth::mfs_solve(shape, pde, boundary, 200);
        CHECK(sol.max_residual() < 1e-8);

        double max_err = 0.0;
        for (const auto& p : geom::sample_interior(shape, 200, 0.02, 11)) {
            max_err = std::max(max_err,
                               std::abs(sol.value(p.x, p.y) - wave(p.x, p.y)));
        }
        CHECK(max_err < 1e-5);
    }
}

TEST_CASE("build_dataset fills values, truths, and counts deterministically") {
    const auto pde = spec(truth::Equation::Laplace, truth::BcKind::Dirichlet,
                          truth::TruthMode::Analytic);
    const auto ds = truth::build_dataset("B_train", pde, 32, 8, 7);
    CHECK(ds.shape_id == "B_train");
    CHECK(ds.seed == 7);
    REQUIRE(ds.boundary.size() == 32);
    REQUIRE(ds.interior.size() == 8);
    for (const auto& s : ds.boundary)
        CHECK(s.value ==
              doctest::Approx(std::exp(s.point.x) * std::sin(s.point.y))
                  .epsilon(1e-14));
    for (const auto& q : ds.interior)
        CHECK(q.true_value ==
              doctest::Approx(std::exp(q.point.x) * std::sin(q.point.y))
                  .epsilon(1e-14));

    const auto ds2 = truth::build_dataset("B_train", pde, 32, 8, 7);
    CHECK(truth::dataset_to_json(ds) == truth::dataset_to_json(ds2));
    const auto ds3 = truth::build_dataset("B_train", pde, 32, 8, 8);
    CHECK(truth::dataset_to_json(ds) != truth::dataset_to_json(ds3));
}

TEST_CASE("dataset JSON round-trips byte-for-byte") {
    const auto pde = spec(truth::Equation::Helmholtz, truth::BcKind::Dirichlet,
                          truth::TruthMode::Manufactured, 2.5);
    const auto ds = truth::build_dataset("B2", pde, 16, 4, 3);
    const std::string text = truth::dataset_to_json(ds);
    const auto back = truth::dataset_from_json(text);
    CHECK(truth::dataset_to_json(back) == text);
    CHECK(back.pde.helmholtz_k == 2.5);
    CHECK(back.shape_id == "B2");
    CHECK(text.find("\"helmholtz_k\"") != std::string::npos);
    CHECK(text.back() == '\n');

    // The wavenumber key appears only for the equation that has one.
    const auto lap = truth::build_dataset(
        "B2",
        spec(truth::Equation::Laplace, truth::BcKind::Dirichlet,
             truth::TruthMode::Analytic),
        16, 4, 3);
    CHECK(truth::dataset_to_json(lap).find("helmholtz_k") == std::string::npos);
}

TEST_CASE("dataset parsing is strict") {
    CHECK(kind_of([] { truth::dataset_from_json("{"); }) ==
          ErrorKind::Validation);
    CHECK(kind_of([] { truth::dataset_from_json("[1,2]"); }) ==
          ErrorKind::Validation);

    const auto pde = spec(truth::Equation::Laplace, truth::BcKind::Dirichlet,
                          truth::TruthMode::Analytic);
    const auto ds = truth::build_dataset("circle", pde, 8, 2, 1);
    std::string text = truth::dataset_to_json(ds);

    // Unknown top-level key.
    std::string with_extra = text;
    with_extra.insert(with_extra.find('{') + 1, "\"extra\": 1,");
    CHECK(kind_of([&] { truth::dataset_from_json(with_extra); }) ==
          ErrorKind::Validation);

    // Wrong type for a required field.
    std::string bad_seed = text;
    const auto pos = bad_seed.find("\"seed\": 1");
    REQUIRE(pos != std::string::npos);
    bad_seed.replace(pos, 9, "\"seed\": \"x\"");
    CHECK(kind_of([&] { truth::dataset_from_json(bad_seed); }) ==
          ErrorKind::Validation);

    // A wavenumber on a Laplace dataset is not a valid document.
    std::string lap_with_k = text;
    lap_with_k.insert(lap_with_k.find('{') + 1, "\"helmholtz_k\": 1.0,");
    CHECK(kind_of([&] { truth::dataset_from_json(lap_with_k); }) ==
          ErrorKind::Validation);
}

TEST_CASE("datasets save and load through files") {
    const std::string dir = temp_dir();
    const auto pde = spec(truth::Equation::Laplace, truth::BcKind::Dirichlet,
                          truth::TruthMode::Analytic);
    const auto ds = truth::build_dataset("B1", pde, 8, 2, 5);
    const std::string path = dir + "/ds.json";
    truth::save_dataset(ds, path);
    const auto back = truth::load_dataset(path);
    CHECK(truth::dataset_to_json(back) == truth::dataset_to_json(ds));

    CHECK(kind_of([&] { truth::load_dataset(dir + "/missing.json"); }) ==
          ErrorKind::Io);
    std::filesystem::remove_all(dir);
}

TEST_CASE("truth modes agree on interior values for Laplace Dirichlet") {
    const auto analytic = truth::build_dataset(
        "B3",
        spec(truth::Equation::Laplace, truth::BcKind::Dirichlet,
             truth::TruthMode::Analytic),
        64, 16, 11);
    const auto oracle = truth::build_dataset(
        "B3",
        spec(truth::Equation::Laplace, truth::BcKind::Dirichlet,
             truth::TruthMode::MfsOracle),
        64, 16, 11);
    REQUIRE(analytic.interior.size() == oracle.interior.size());
    for (size_t i = 0; i < analytic.interior.size(); ++i) {
        // Same seed, same geometry stream.
        CHECK(analytic.interior[i].point.x == oracle.interior[i].point.x);
        CHECK(std::abs(analytic.interior[i].true_value -
                       oracle.interior[i].true_value) < 1e-5);
    }
}

TEST_CASE("oracle Neumann data is shifted onto the compatible subspace") {
    const auto pde = spec(truth::Equation::Laplace, truth::BcKind::Neumann,
                          truth::TruthMode::MfsOracle);
    const auto ds = truth::build_dataset("circle", pde, 64, 4, 2);
    const auto& shape = geom::boundary_by_id("circle");

    // The shift is the arc-length mean of the raw data h = 0.1 cos x cos y.
    const double num = truth::boundary_line_integral(
        shape, [](const geom::BoundarySample& s) {
            return 0.1 * std::cos(s.point.x) * std::cos(s.point.y);
        });
    const double den = truth::boundary_line_integral(
        shape, [](const geom::BoundarySample&) { return 1.0; });
    const double shift = num / den;

    for (const auto& s : ds.boundary) {
        const double raw = 0.1 * std::cos(s.point.x) * std::cos(s.point.y);
        CHECK(s.value == doctest::Approx(raw - shift).epsilon(1e-12));
    }
}

TEST_CASE("build_dataset rejects unknown boundaries and bad sizes") {
    const auto pde = spec(truth::Equation::Laplace, truth::BcKind::Dirichlet,
                          truth::TruthMode::Analytic);
    CHECK(kind_of([&] { truth::build_dataset("B9", pde, 8, 2, 1); }) ==
          ErrorKind::Validation);
    CHECK(kind_of([&] { truth::build_dataset("B1", pde, 0, 2, 1); }) ==
          ErrorKind::Validation);
    CHECK(kind_of([&] { truth::build_dataset("B1", pde, 8, 0, 1); }) ==
          ErrorKind::Validation);
}
