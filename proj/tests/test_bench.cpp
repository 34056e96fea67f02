#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "bench.hpp"
#include "common.hpp"
#include "config.hpp"
#include "model.hpp"
#include "truth.hpp"

using namespace fieno;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

bench::ResultRecord record(const std::string& eq, const std::string& bc,
                           const std::string& boundary, int64_t n,
                           uint64_t seed, double mse) {
    return {eq, bc, boundary, n, seed, "few-shot", "analytic", mse, 1.0};
}

// Drops the wall_time_s column, the one legitimately nondeterministic field.
std::string strip_wall(const std::string& csv) {
    std::istringstream in(csv);
    std::ostringstream out;
    std::string line;
    while (std::getline(in, line)) {
        const auto pos = line.rfind(',');
        out << line.substr(0, pos) << '\n';
    }
    return out.str();
}

std::string temp_dir() {
    static int counter = 0;
    auto dir = std::filesystem::temp_directory_path() /
               ("fieno_bench_" + std::to_string(::getpid()) + "_" +
                std::to_string(counter++));
    std::filesystem::create_directories(dir);
    return dir.string();
}

constexpr const char* kMicroGrid = R"({
    "seed": 1,
    "pde": {"equation": "laplace"},
    "kan": {"elm_layers": [6], "mlp_layers": [8, 4], "d": 4},
    "ian": {"conv_channels": [2], "kernel_size": 3,
             "fc_layers": [8, 4], "d": 4, "m": 8},
    "train": {"steps": 3, "lr": 0.01, "m_boundary": 8,
               "n_interior": 4, "dense_boundary": 16},
    "grid": {"equations": ["laplace"], "bc_kinds": ["dirichlet"],
              "boundaries": ["B1"], "n_interior": [2],
              "protocol": "zero-shot", "truth_mode": "analytic"},
    "seeds": [1, 2]
})";

}  // namespace

TEST_CASE("results_csv renders records with exact doubles and fixed walls") {
    std::vector<bench::ResultRecord> rs{
        {"laplace", "dirichlet", "B1", 50, 1, "few-shot", "analytic", 1.09e-4,
         1.2345},
        {"laplace", "dirichlet", "B2", 100, 2, "zero-shot", "mfs_oracle", kNaN,
         0.5},
    };
    const std::string csv = bench::results_csv(rs);
    std::istringstream in(csv);
    std::string line;
    REQUIRE(std::getline(in, line));
    CHECK(line ==
          "equation,bc_kind,boundary_id,n_interior,seed,protocol,truth_mode,"
          "mse,wall_time_s");
    REQUIRE(std::getline(in, line));
    // The MSE column uses the 17-significant-digit exact form; the wall
    // column is fixed to milliseconds.
    CHECK(line ==
          "laplace,dirichlet,B1,50,1,few-shot,analytic,"
          "0.00010900000000000001,1.234");
    REQUIRE(std::getline(in, line));
    CHECK(line == "laplace,dirichlet,B2,100,2,zero-shot,mfs_oracle,nan,0.500");
}

TEST_CASE("parse_results_csv round-trips, including NaN cells") {
    std::vector<bench::ResultRecord> rs{
        record("laplace", "dirichlet", "B1", 50, 1, 2.5e-4),
        record("helmholtz", "neumann", "B4", 200, 3, kNaN),
    };
    const auto back = bench::parse_results_csv(bench::results_csv(rs));
    REQUIRE(back.size() == 2);
    CHECK(back[0].equation == "laplace");
    CHECK(back[0].boundary_id == "B1");
    CHECK(back[0].n_interior == 50);
    CHECK(back[0].seed == 1);
    CHECK(back[0].mse == 2.5e-4);
    CHECK(back[1].bc_kind == "neumann");
    CHECK(std::isnan(back[1].mse));

    CHECK_THROWS_AS(bench::parse_results_csv("not,a,header\n"), Error);
    CHECK_THROWS_AS(bench::parse_results_csv(
                        "equation,bc_kind,boundary_id,n_interior,seed,protocol,"
                        "truth_mode,mse,wall_time_s\n"
                        "laplace,dirichlet,B1,xx,1,few-shot,analytic,0.1,0.1\n"),
                    Error);
    CHECK_THROWS_AS(bench::parse_results_csv(
                        "equation,bc_kind,boundary_id,n_interior,seed,protocol,"
                        "truth_mode,mse,wall_time_s\n"
                        "laplace,dirichlet,B1,50\n"),
                    Error);
}

TEST_CASE("emit_table aggregates seed means with display rounding") {
    std::vector<bench::ResultRecord> rs{
        // B1/50: two seeds averaging to 2e-4 -> 0.200.
        record("laplace", "dirichlet", "B1", 50, 1, 1e-4),
        record("laplace", "dirichlet", "B1", 50, 2, 3e-4),
        // B1/100: single seed, the classic 1.09e-4 -> 0.109.
        record("laplace", "dirichlet", "B1", 100, 1, 1.09e-4),
        // B1/200: NaN rows are excluded from the mean.
        record("laplace", "dirichlet", "B1", 200, 1, kNaN),
        record("laplace", "dirichlet", "B1", 200, 2, 1e-4),
        // B2/50: an exact representable tie at 1001.5 rounds to even -> 1.002.
        record("laplace", "dirichlet", "B2", 50, 1, 1001.5 / 1e6),
        // B2/100: plain quarter value -> 0.250.
        record("laplace", "dirichlet", "B2", 100, 1, 2.5e-4),
        // Other equations and bc kinds are filtered out of this table.
        record("helmholtz", "dirichlet", "B2", 200, 1, 9.0),
        record("laplace", "neumann", "B2", 200, 1, 9.0),
    };
    const auto table = bench::emit_table(rs, truth::Equation::Laplace,
                                         truth::BcKind::Dirichlet);
    CHECK(table.csv ==
          "boundary,50,100,200\n"
          "B1,0.200,0.109,0.100\n"
          "B2,1.002,0.250,—\n"
          "B3,—,—,—\n"
          "B4,—,—,—\n");
    CHECK(table.text.find("B1") != std::string::npos);
    CHECK(table.text.find("0.109") != std::string::npos);
    CHECK(table.text.find("—") != std::string::npos);
    CHECK(table.text.find("9.0") == std::string::npos);
}

TEST_CASE("baseline_rbf reproduces affine fields exactly") {
    // An affine field lies in the span of the interpolant's polynomial
    // part, so the thin-plate weights vanish and the interior error is
    // numerically zero.
    truth::Dataset ds;
    ds.shape_id = "circle";
    ds.pde.equation = truth::Equation::Laplace;
    ds.pde.bc_kind = truth::BcKind::Dirichlet;
    auto field = [](double x, double y) { return 1.0 + 2.0 * x - 3.0 * y; };
    for (const auto& s :
         geom::equispaced_boundary(geom::boundary_by_id("circle"), 24)) {
        auto sample = s;
        sample.value = field(s.point.x, s.point.y);
        ds.boundary.push_back(sample);
    }
    for (const auto& p :
         geom::sample_interior(geom::boundary_by_id("circle"), 20, 0.05, 3))
        ds.interior.push_back({p, field(p.x, p.y)});

    CHECK(bench::baseline_rbf(ds) < 1e-16);

    ds.pde.bc_kind = truth::BcKind::Neumann;
    CHECK_THROWS_AS(bench::baseline_rbf(ds), Error);
}

TEST_CASE("baseline_rbf gives a small finite error on harmonic data") {
    truth::PdeSpec pde;  // Laplace Dirichlet Analytic
    const auto ds = truth::build_dataset("B_train", pde, 64, 32, 17);
    const double mse = bench::baseline_rbf(ds);
    CHECK(std::isfinite(mse));
    CHECK(mse > 0.0);
    CHECK(mse < 1e-2);  // smooth interpolant of smooth data
}

TEST_CASE("run_grid produces one record per cell in grid order") {
    const auto cfg = config::parse_config(kMicroGrid);
    const auto records = bench::run_grid(cfg, 1);
    REQUIRE(records.size() == 2);
    for (const auto& r : records) {
        CHECK(r.equation == "laplace");
        CHECK(r.bc_kind == "dirichlet");
        CHECK(r.boundary_id == "B1");
        CHECK(r.n_interior == 2);
        CHECK(r.protocol == "zero-shot");
        CHECK(r.truth_mode == "analytic");
        CHECK(std::isfinite(r.mse));
        CHECK(r.wall_time_s >= 0.0);
    }
    CHECK(records[0].seed == 1);
    CHECK(records[1].seed == 2);

    CHECK_THROWS_AS(bench::run_grid(cfg, 0), Error);
}

TEST_CASE("run_grid is deterministic and worker-count independent") {
    const auto cfg = config::parse_config(kMicroGrid);
    const auto a = bench::run_grid(cfg, 1);
    const auto b = bench::run_grid(cfg, 1);
    const auto c = bench::run_grid(cfg, 2);
    CHECK(strip_wall(bench::results_csv(a)) ==
          strip_wall(bench::results_csv(b)));
    CHECK(strip_wall(bench::results_csv(a)) ==
          strip_wall(bench::results_csv(c)));
}

TEST_CASE("run_grid fine-tunes under the few-shot protocol") {
    auto cfg = config::parse_config(kMicroGrid);
    cfg.grid.protocol = "few-shot";
    cfg.grid.finetune_steps = 2;
    cfg.grid.holdout_points = 3;
    const auto records = bench::run_grid(cfg, 1);
    REQUIRE(records.size() == 2);
    for (const auto& r : records) {
        CHECK(r.protocol == "few-shot");
        CHECK(std::isfinite(r.mse));
    }

    // Few-shot scores on a holdout set, so the numbers differ from the
    // zero-shot scores of the same cells.
    const auto zero = bench::run_grid(config::parse_config(kMicroGrid), 1);
    CHECK(records[0].mse != zero[0].mse);
}

TEST_CASE("emit_plots writes the three named pages") {
    model::ModelConfig mcfg;
    mcfg.kan.elm_layers = {6};
    mcfg.kan.mlp_layers = {8, 4};
    mcfg.kan.d = 4;
    mcfg.kan.elm_seed = 21;
    mcfg.ian.conv_channels = {2};
    mcfg.ian.kernel_size = 3;
    mcfg.ian.fc_layers = {8, 4};
    mcfg.ian.d = 4;
    mcfg.ian.m = 8;
    model::FienoModel m(mcfg, 7);

    truth::PdeSpec pde;
    const auto ds = truth::build_dataset("circle", pde, 8, 5, 3);
    const std::string dir = temp_dir();
    const auto paths = bench::emit_plots(m, ds, dir);
    REQUIRE(paths.size() == 3);
    CHECK(paths[0] == dir + "/laplace_dirichlet_circle_5_prediction.svg");
    CHECK(paths[1] == dir + "/laplace_dirichlet_circle_5_truth.svg");
    CHECK(paths[2] == dir + "/laplace_dirichlet_circle_5_sqerror.svg");
    for (const auto& p : paths) {
        const std::string svg = read_file(p);
        CHECK(svg.rfind("<svg", 0) == 0);
        CHECK(svg.find("</svg>") != std::string::npos);
    }
    std::filesystem::remove_all(dir);
}
