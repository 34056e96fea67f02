#include "bench.hpp"

#include <Eigen/Dense>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <thread>

#include "trainer.hpp"

namespace fieno::bench {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
        .count();
}

std::string fmt_seconds(double s) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.3f", s);
    return buf;
}

}  // namespace

std::string results_csv(const std::vector<ResultRecord>& records) {
    std::ostringstream out;
    out << "equation,bc_kind,boundary_id,n_interior,seed,protocol,truth_mode,"
           "mse,wall_time_s\n";
    for (const auto& r : records)
        out << r.equation << ',' << r.bc_kind << ',' << r.boundary_id << ','
            << r.n_interior << ',' << r.seed << ',' << r.protocol << ','
            << r.truth_mode << ',' << fmt_g17(r.mse) << ','
            << fmt_seconds(r.wall_time_s) << '\n';
    return out.str();
}

std::vector<ResultRecord> parse_results_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) ||
        line != "equation,bc_kind,boundary_id,n_interior,seed,protocol,"
                "truth_mode,mse,wall_time_s")
        fail(ErrorKind::Validation, "results csv: bad or missing header");
    std::vector<ResultRecord> records;
    size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::vector<std::string> f;
        size_t start = 0;
        for (size_t i = 0; i <= line.size(); ++i)
            if (i == line.size() || line[i] == ',') {
                f.push_back(line.substr(start, i - start));
                start = i + 1;
            }
        if (f.size() != 9)
            fail(ErrorKind::Validation,
                 "results csv: line " + std::to_string(line_no) +
                     " has " + std::to_string(f.size()) + " fields, want 9");
        try {
            ResultRecord r;
            r.equation = f[0];
            r.bc_kind = f[1];
            r.boundary_id = f[2];
            r.n_interior = std::stoll(f[3]);
            r.seed = std::stoull(f[4]);
            r.protocol = f[5];
            r.truth_mode = f[6];
            r.mse = std::stod(f[7]);
            r.wall_time_s = std::stod(f[8]);
            records.push_back(std::move(r));
        } catch (const std::exception&) {
            fail(ErrorKind::Validation,
                 "results csv: line " + std::to_string(line_no) +
                     " has a malformed number");
        }
    }
    return records;
}

namespace {

struct Unit {
    truth::Equation eq;
    truth::BcKind bc;
    uint64_t seed;
    uint64_t eq_index;
    uint64_t bc_index;
};

std::vector<ResultRecord> run_unit(const config::ExperimentConfig& cfg,
                                   const Unit& u) {
    const auto& grid = cfg.grid;
    truth::PdeSpec pde;
    pde.equation = u.eq;
    pde.bc_kind = u.bc;
    pde.truth_mode = config::resolve_truth_mode(grid.truth_mode, u.eq, u.bc);
    pde.helmholtz_k = cfg.pde.helmholtz_k;
    pde.validate();

    const std::string eq_s = truth::to_string(u.eq);
    const std::string bc_s = truth::to_string(u.bc);
    const std::string tm_s = truth::to_string(pde.truth_mode);
    const uint64_t ei = u.eq_index, bj = u.bc_index;

    trainer::TrainConfig tcfg = cfg.train;
    tcfg.seed = derive_seed(u.seed, "train", {ei, bj});

    model::ModelConfig mcfg = cfg.model;
    mcfg.bc_kind = u.bc;
    mcfg.kan.elm_seed = derive_seed(u.seed, "elm", {ei, bj});

    std::vector<ResultRecord> records;
    auto push_failed_cells = [&]() {
        for (size_t bi = 0; bi < grid.boundaries.size(); ++bi)
            for (int64_t n : grid.n_interior)
                records.push_back({eq_s, bc_s, grid.boundaries[bi], n, u.seed,
                                   grid.protocol, tm_s, kNaN, 0.0});
    };

    model::FienoModel base(mcfg, derive_seed(u.seed, "params", {ei, bj}));
    const auto t_train = std::chrono::steady_clock::now();
    double base_train_time = 0.0;
    try {
        const truth::Dataset train_ds = truth::build_dataset(
            "B_train", pde, tcfg.dense_boundary, tcfg.n_interior,
            derive_seed(u.seed, "train_data", {ei, bj}));
        trainer::train(base, train_ds, tcfg);
        base_train_time = seconds_since(t_train);
    } catch (const Error& e) {
        if (e.kind() != ErrorKind::Numeric) throw;
        push_failed_cells();
        return records;
    }

    for (size_t bi = 0; bi < grid.boundaries.size(); ++bi) {
        const std::string& boundary = grid.boundaries[bi];
        for (int64_t n : grid.n_interior) {
            const auto t_cell = std::chrono::steady_clock::now();
            double mse = kNaN;
            try {
                const truth::Dataset target = truth::build_dataset(
                    boundary, pde, tcfg.dense_boundary, n,
                    derive_seed(u.seed, "cell_data",
                                {ei, bj, bi, static_cast<uint64_t>(n)}));
                if (grid.protocol == "zero-shot") {
                    mse = trainer::evaluate(base, target);
                } else {
                    const truth::Dataset holdout = truth::build_dataset(
                        boundary, pde, tcfg.dense_boundary,
                        grid.holdout_points,
                        derive_seed(u.seed, "cell_holdout", {ei, bj, bi}));
                    model::FienoModel tuned = base.clone();
                    trainer::TrainConfig fcfg = tcfg;
                    fcfg.steps = grid.finetune_steps;
                    fcfg.n_interior = n;
                    fcfg.seed =
                        derive_seed(u.seed, "finetune",
                                    {ei, bj, bi, static_cast<uint64_t>(n)});
                    trainer::train(tuned, target, fcfg);
                    mse = trainer::evaluate(tuned, holdout);
                }
            } catch (const Error& e) {
                if (e.kind() != ErrorKind::Numeric) throw;
                mse = kNaN;
            }
            // The training boundary's cost is carried by its unit's first
            // record so the CSV accounts for total compute.
            double wall = seconds_since(t_cell);
            if (records.empty()) wall += base_train_time;
            records.push_back({eq_s, bc_s, boundary, n, u.seed, grid.protocol,
                               tm_s, mse, wall});
        }
    }
    return records;
}

}  // namespace

std::vector<ResultRecord> run_grid(const config::ExperimentConfig& cfg,
                                   int workers) {
    if (workers < 1)
        fail(ErrorKind::Validation, "run_grid: workers must be >= 1");
    std::vector<Unit> units;
    for (size_t ei = 0; ei < cfg.grid.equations.size(); ++ei)
        for (size_t bi = 0; bi < cfg.grid.bc_kinds.size(); ++bi)
            for (uint64_t seed : cfg.seeds)
                units.push_back({cfg.grid.equations[ei], cfg.grid.bc_kinds[bi],
                                 seed, ei, bi});

    std::vector<std::vector<ResultRecord>> unit_records(units.size());
    if (workers == 1 || units.size() <= 1) {
        for (size_t i = 0; i < units.size(); ++i)
            unit_records[i] = run_unit(cfg, units[i]);
    } else {
        std::atomic<size_t> next{0};
        std::exception_ptr first_error;
        std::mutex error_mu;
        auto work = [&] {
            for (;;) {
                const size_t i = next.fetch_add(1);
                if (i >= units.size()) return;
                try {
                    unit_records[i] = run_unit(cfg, units[i]);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mu);
                    if (!first_error) first_error = std::current_exception();
                }
            }
        };
        const size_t n_threads =
            std::min(static_cast<size_t>(workers), units.size());
        std::vector<std::thread> pool;
        for (size_t i = 0; i < n_threads; ++i) pool.emplace_back(work);
        for (auto& t : pool) t.join();
        if (first_error) std::rethrow_exception(first_error);
    }

    std::vector<ResultRecord> all;
    for (auto& ur : unit_records)
        all.insert(all.end(), ur.begin(), ur.end());
    return all;
}

namespace {

// Display convention of the result tables: units of 1e-3, three decimals,
// ties to even.
std::string table_cell(double mse) {
    const double scaled = std::nearbyint(mse * 1e6) / 1000.0;
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.3f", scaled);
    return buf;
}

}  // namespace

TableOutput emit_table(const std::vector<ResultRecord>& records,
                       truth::Equation eq, truth::BcKind bc) {
    static const std::vector<std::string> kRows = {"B1", "B2", "B3", "B4"};
    static const std::vector<int64_t> kCols = {50, 100, 200};
    const std::string eq_s = truth::to_string(eq);
    const std::string bc_s = truth::to_string(bc);

    std::vector<std::vector<std::string>> cells(
        kRows.size(), std::vector<std::string>(kCols.size(), "—"));
    for (size_t ri = 0; ri < kRows.size(); ++ri)
        for (size_t ci = 0; ci < kCols.size(); ++ci) {
            double sum = 0.0;
            int count = 0;
            for (const auto& r : records) {
                if (r.equation != eq_s || r.bc_kind != bc_s ||
                    r.boundary_id != kRows[ri] || r.n_interior != kCols[ci] ||
                    !std::isfinite(r.mse))
                    continue;
                sum += r.mse;
                ++count;
            }
            if (count > 0) cells[ri][ci] = table_cell(sum / count);
        }

    std::ostringstream text;
    text << eq_s << " / " << bc_s << " (seed-mean MSE, units of 1e-3)\n";
    text << "boundary";
    for (int64_t c : kCols) {
        char buf[16];
        std::snprintf(buf, sizeof buf, "%9lld", static_cast<long long>(c));
        text << buf;
    }
    text << '\n';
    for (size_t ri = 0; ri < kRows.size(); ++ri) {
        char name[16];
        std::snprintf(name, sizeof name, "%-8s", kRows[ri].c_str());
        text << name;
        for (size_t ci = 0; ci < kCols.size(); ++ci) {
            // Manual right-align: the em dash is 3 bytes but 1 column.
            const std::string& cell = cells[ri][ci];
            const size_t width = cell == "—" ? 1 : cell.size();
            text << std::string(width < 9 ? 9 - width : 1, ' ') << cell;
        }
        text << '\n';
    }

    std::ostringstream csv;
    csv << "boundary";
    for (int64_t c : kCols) csv << ',' << c;
    csv << '\n';
    for (size_t ri = 0; ri < kRows.size(); ++ri) {
        csv << kRows[ri];
        for (size_t ci = 0; ci < kCols.size(); ++ci) csv << ',' << cells[ri][ci];
        csv << '\n';
    }
    return {text.str(), csv.str()};
}

namespace {

struct Rgb {
    double r, g, b;
};

// Compact perceptual-ish ramp, dark violet to yellow.
std::string color_at(double t) {
    static const Rgb stops[] = {{0.267, 0.005, 0.329},
                                {0.229, 0.322, 0.545},
                                {0.128, 0.565, 0.551},
                                {0.369, 0.789, 0.383},
                                {0.993, 0.906, 0.144}};
    t = std::min(1.0, std::max(0.0, t));
    const double x = t * 4.0;
    const int i = std::min(3, static_cast<int>(x));
    const double f = x - i;
    const Rgb c{stops[i].r + f * (stops[i + 1].r - stops[i].r),
                stops[i].g + f * (stops[i + 1].g - stops[i].g),
                stops[i].b + f * (stops[i + 1].b - stops[i].b)};
    char buf[8];
    std::snprintf(buf, sizeof buf, "#%02x%02x%02x",
                  static_cast<int>(std::lround(c.r * 255.0)),
                  static_cast<int>(std::lround(c.g * 255.0)),
                  static_cast<int>(std::lround(c.b * 255.0)));
    return buf;
}

std::string scatter_svg(const std::string& title,
                        const std::vector<geom::Point2>& pts,
                        const std::vector<double>& values, double lo,
                        double hi, const std::vector<geom::Point2>& outline) {
    constexpr double kSize = 640.0, kPlot = 560.0, kMargin = 40.0;
    double min_x = outline[0].x, max_x = outline[0].x;
    double min_y = outline[0].y, max_y = outline[0].y;
    for (const auto& p : outline) {
        min_x = std::min(min_x, p.x);
        max_x = std::max(max_x, p.x);
        min_y = std::min(min_y, p.y);
        max_y = std::max(max_y, p.y);
    }
    const double pad = 0.05 * std::max(max_x - min_x, max_y - min_y);
    min_x -= pad;
    max_x += pad;
    min_y -= pad;
    max_y += pad;
    const double scale =
        kPlot / std::max(max_x - min_x, max_y - min_y);
    auto sx = [&](double x) { return kMargin + (x - min_x) * scale; };
    auto sy = [&](double y) { return kMargin + (max_y - y) * scale; };

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kSize + 90
        << "\" height=\"" << kSize
        << "\" viewBox=\"0 0 " << kSize + 90 << ' ' << kSize << "\">\n";
    svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    svg << "<text x=\"" << kMargin << "\" y=\"24\" font-family=\"sans-serif\" "
           "font-size=\"16\">"
        << title << "</text>\n";

    svg << "<polygon points=\"";
    for (const auto& p : outline)
        svg << sx(p.x) << ',' << sy(p.y) << ' ';
    svg << "\" fill=\"none\" stroke=\"#444444\" stroke-width=\"1.5\"/>\n";

    const double span = hi > lo ? hi - lo : 1.0;
    for (size_t i = 0; i < pts.size(); ++i) {
        const double t = (values[i] - lo) / span;
        svg << "<circle cx=\"" << sx(pts[i].x) << "\" cy=\"" << sy(pts[i].y)
            << "\" r=\"4\" fill=\"" << color_at(t) << "\"/>\n";
    }

    // Color bar with min/max labels.
    const double bar_x = kSize + 10, bar_y = kMargin, bar_h = kPlot;
    constexpr int kBarSteps = 64;
    for (int i = 0; i < kBarSteps; ++i) {
        const double t = 1.0 - static_cast<double>(i) / (kBarSteps - 1);
        svg << "<rect x=\"" << bar_x << "\" y=\""
            << bar_y + bar_h * i / kBarSteps << "\" width=\"18\" height=\""
            << bar_h / kBarSteps + 1 << "\" fill=\"" << color_at(t) << "\"/>\n";
    }
    char lo_s[32], hi_s[32];
    std::snprintf(hi_s, sizeof hi_s, "%.4g", hi);
    std::snprintf(lo_s, sizeof lo_s, "%.4g", lo);
    svg << "<text x=\"" << bar_x + 22 << "\" y=\"" << bar_y + 12
        << "\" font-family=\"sans-serif\" font-size=\"12\">" << hi_s
        << "</text>\n";
    svg << "<text x=\"" << bar_x + 22 << "\" y=\"" << bar_y + bar_h
        << "\" font-family=\"sans-serif\" font-size=\"12\">" << lo_s
        << "</text>\n";
    svg << "</svg>\n";
    return svg.str();
}

}  // namespace

std::vector<std::string> emit_plots(model::FienoModel& model,
                                    const truth::Dataset& ds,
                                    const std::string& out_dir) {
    const geom::BoundaryShape& shape = geom::boundary_by_id(ds.shape_id);
    const int m = model.config().ian.m;
    if (static_cast<int>(ds.boundary.size()) < m)
        fail(ErrorKind::Validation,
             "emit_plots: dataset has fewer boundary samples than ian.m");
    std::vector<geom::BoundarySample> boundary(ds.boundary.begin(),
                                               ds.boundary.begin() + m);
    std::vector<geom::Point2> pts;
    std::vector<double> truths;
    for (const auto& s : ds.interior) {
        pts.push_back(s.point);
        truths.push_back(s.true_value);
    }
    const std::vector<double> preds = model.predict(boundary, pts);
    std::vector<double> sqerr(preds.size());
    for (size_t i = 0; i < preds.size(); ++i) {
        const double d = preds[i] - truths[i];
        sqerr[i] = d * d;
    }

    double lo = truths[0], hi = truths[0];
    for (double v : truths) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    for (double v : preds) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    double err_hi = 0.0;
    for (double v : sqerr) err_hi = std::max(err_hi, v);

    std::vector<geom::Point2> outline;
    for (const auto& s : geom::equispaced_boundary(shape, 512))
        outline.push_back(s.point);

    const std::string stem = truth::to_string(ds.pde.equation) + "_" +
                             truth::to_string(ds.pde.bc_kind) + "_" +
                             ds.shape_id + "_" +
                             std::to_string(ds.interior.size());
    struct Page {
        const char* kind;
        const std::vector<double>* values;
        double lo, hi;
    };
    const Page pages[] = {{"prediction", &preds, lo, hi},
                          {"truth", &truths, lo, hi},
                          {"sqerror", &sqerr, 0.0, err_hi}};
    std::vector<std::string> paths;
    for (const auto& p : pages) {
        const std::string path = out_dir + "/" + stem + "_" + p.kind + ".svg";
        write_file(path, scatter_svg(stem + " " + p.kind, pts, *p.values,
                                     p.lo, p.hi, outline));
        paths.push_back(path);
    }
    return paths;
}

double baseline_rbf(const truth::Dataset& ds) {
    if (ds.pde.bc_kind != truth::BcKind::Dirichlet)
        fail(ErrorKind::Validation,
             "baseline_rbf: interpolates Dirichlet boundary values only");
    const int n = static_cast<int>(ds.boundary.size());
    if (n < 3)
        fail(ErrorKind::Validation, "baseline_rbf: need at least 3 boundary points");

    // Thin-plate spline phi(r) = r^2 log r with an affine term; a light
    // ridge keeps coincident samples solvable.
    auto tps = [](double r) { return r > 0.0 ? r * r * std::log(r) : 0.0; };
    const int dim = n + 3;
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(dim, dim);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(dim);
    for (int i = 0; i < n; ++i) {
        const auto& pi = ds.boundary[i].point;
        for (int j = 0; j < n; ++j) {
            const auto& pj = ds.boundary[j].point;
            A(i, j) = tps(std::hypot(pi.x - pj.x, pi.y - pj.y));
        }
        A(i, i) += 1e-10;
        A(i, n) = A(n, i) = 1.0;
        A(i, n + 1) = A(n + 1, i) = pi.x;
        A(i, n + 2) = A(n + 2, i) = pi.y;
        rhs(i) = ds.boundary[i].value;
    }
    const Eigen::VectorXd w = A.colPivHouseholderQr().solve(rhs);

    double acc = 0.0;
    for (const auto& s : ds.interior) {
        double v = w(n) + w(n + 1) * s.point.x + w(n + 2) * s.point.y;
        for (int j = 0; j < n; ++j) {
            const auto& pj = ds.boundary[j].point;
            v += w(j) * tps(std::hypot(s.point.x - pj.x, s.point.y - pj.y));
        }
        const double d = v - s.true_value;
        acc += d * d;
    }
    return acc / static_cast<double>(ds.interior.size());
}

}  // namespace fieno::bench
