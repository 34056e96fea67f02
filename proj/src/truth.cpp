#include "truth.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <json.hpp>

#include "special.hpp"

namespace fieno::truth {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kPlaneWaveAngle = 0.3;
constexpr double kInteriorMargin = 0.02;
constexpr double kSourceDilation = 1.5;
constexpr int kDenseBoundaryFit = 2000;
constexpr int kOracleSources = 200;
constexpr double kMfsResidualTol = 1e-4;

double analytic_dirichlet_data(double x, double y) { return std::exp(x) * std::sin(y); }
double analytic_neumann_data(double x, double y) { return 0.1 * std::cos(x) * std::cos(y); }

Field laplace_field() {
    Field f;
    f.value = analytic_dirichlet_data;
    f.gradient = [](double x, double y) {
        return std::array<double, 2>{std::exp(x) * std::sin(y),
                                     std::exp(x) * std::cos(y)};
    };
    return f;
}

Field plane_wave_field(double k) {
    const double cx = std::cos(kPlaneWaveAngle), cy = std::sin(kPlaneWaveAngle);
    Field f;
    f.value = [k, cx, cy](double x, double y) {
        return std::cos(k * (x * cx + y * cy));
    };
    f.gradient = [k, cx, cy](double x, double y) {
        const double s = -k * std::sin(k * (x * cx + y * cy));
        return std::array<double, 2>{s * cx, s * cy};
    };
    return f;
}

}  // namespace

std::string to_string(Equation e) {
    switch (e) {
        case Equation::Laplace: return "laplace";
        case Equation::Helmholtz: return "helmholtz";
        case Equation::Darcy: return "darcy";
    }
    fail(ErrorKind::Internal, "bad Equation enum");
}

std::string to_string(BcKind b) {
    return b == BcKind::Dirichlet ? "dirichlet" : "neumann";
}

std::string to_string(TruthMode t) {
    switch (t) {
        case TruthMode::Analytic: return "analytic";
        case TruthMode::Manufactured: return "manufactured";
        case TruthMode::MfsOracle: return "mfs_oracle";
    }
    fail(ErrorKind::Internal, "bad TruthMode enum");
}

Equation parse_equation(const std::string& s) {
    if (s == "laplace") return Equation::Laplace;
    if (s == "helmholtz") return Equation::Helmholtz;
    if (s == "darcy") return Equation::Darcy;
    fail(ErrorKind::Validation, "unknown equation: " + s);
}

BcKind parse_bc_kind(const std::string& s) {
    if (s == "dirichlet") return BcKind::Dirichlet;
    if (s == "neumann") return BcKind::Neumann;
    fail(ErrorKind::Validation, "unknown bc_kind: " + s);
}

TruthMode parse_truth_mode(const std::string& s) {
    if (s == "analytic") return TruthMode::Analytic;
    if (s == "manufactured") return TruthMode::Manufactured;
    if (s == "mfs_oracle") return TruthMode::MfsOracle;
    fail(ErrorKind::Validation, "unknown truth_mode: " + s);
}

void PdeSpec::validate() const {
    if (equation == Equation::Helmholtz && !(helmholtz_k > 0.0))
        fail(ErrorKind::Validation, "pde.helmholtz_k must be > 0");
    if (equation == Equation::Darcy && truth_mode == TruthMode::MfsOracle)
        fail(ErrorKind::Validation,
             "pde: mfs_oracle supports laplace and helmholtz only");
    if (truth_mode == TruthMode::Analytic &&
        (equation != Equation::Laplace || bc_kind != BcKind::Dirichlet))
        fail(ErrorKind::Validation,
             "pde: analytic truth requires laplace + dirichlet");
}

Manufactured manufacture(const PdeSpec& pde) {
    Manufactured m;
    switch (pde.equation) {
        case Equation::Laplace:
            m.u = laplace_field();
            return m;
        case Equation::Helmholtz:
            m.u = plane_wave_field(pde.helmholtz_k);
            return m;
        case Equation::Darcy:
            break;
    }
    // u* = sin x cos y with a = 1 + 0.5 sin r; f = -div(a grad u*),
    // where grad a = 0.5 cos(r) (x, y)/r with the r -> 0 limit taken as 0.
    m.u.value = [](double x, double y) { return std::sin(x) * std::cos(y); };
    m.u.gradient = [](double x, double y) {
        return std::array<double, 2>{std::cos(x) * std::cos(y),
                                     -std::sin(x) * std::sin(y)};
    };
    m.a.value = [](double x, double y) {
        return 1.0 + 0.5 * std::sin(std::hypot(x, y));
    };
    m.a.gradient = [](double x, double y) {
        const double r = std::hypot(x, y);
        if (r < 1e-12) return std::array<double, 2>{0.0, 0.0};
        const double s = 0.5 * std::cos(r) / r;
        return std::array<double, 2>{s * x, s * y};
    };
    m.f = [m](double x, double y) {
        const auto ga = m.a.gradient(x, y);
        const auto gu = m.u.gradient(x, y);
        const double lap_u = -2.0 * std::sin(x) * std::cos(y);
        return -(ga[0] * gu[0] + ga[1] * gu[1] + m.a.value(x, y) * lap_u);
    };
    return m;
}

double dirichlet_value(const PdeSpec& pde, const geom::Point2& p) {
    if (pde.truth_mode == TruthMode::Manufactured)
        return manufacture(pde).u.value(p.x, p.y);
    return analytic_dirichlet_data(p.x, p.y);
}

double neumann_value(const PdeSpec& pde, const geom::BoundarySample& s) {
    if (pde.truth_mode == TruthMode::Manufactured) {
        const auto g = manufacture(pde).u.gradient(s.point.x, s.point.y);
        return g[0] * s.nx + g[1] * s.ny;
    }
    return analytic_neumann_data(s.point.x, s.point.y);
}

double boundary_line_integral(
    const geom::BoundaryShape& shape,
    const std::function<double(const geom::BoundarySample&)>& f) {
    constexpr int kNodes = 4096;
    const auto samples = geom::equispaced_boundary(shape, kNodes);
    const double h = 2.0 * kPi / kNodes;
    double acc = 0.0;
    for (const auto& s : samples)
        acc += f(s) * shape.arc_jacobian(s.alpha);
    return acc * h;
}

namespace {

constexpr double kInvTwoPi = 0.15915494309189533577;

double green_value(Equation eq, double k, double px, double py, double qx,
                   double qy) {
    const double rho = std::hypot(px - qx, py - qy);
    if (eq == Equation::Laplace) return -kInvTwoPi * std::log(rho);
    return 0.25 * special::bessel_y0(k * rho);
}

double green_normal_deriv(Equation eq, double k, double px, double py,
                          double nx, double ny, double qx, double qy) {
    const double dx = px - qx, dy = py - qy;
    const double rho2 = dx * dx + dy * dy;
    const double dn = dx * nx + dy * ny;
    if (eq == Equation::Laplace) return -kInvTwoPi * dn / rho2;
    const double rho = std::sqrt(rho2);
    return -0.25 * k * special::bessel_y1(k * rho) * dn / rho;
}

}  // namespace

double MfsSolution::value(double x, double y) const {
    double acc = 0.0;
    for (size_t j = 0; j < coeff_.size(); ++j)
        acc += coeff_[j] * green_value(equation_, k_, x, y, src_x_[j], src_y_[j]);
    return acc;
}

MfsSolution mfs_solve(const geom::BoundaryShape& shape, const PdeSpec& pde,
                      const std::vector<geom::BoundarySample>& boundary_data,
                      int n_sources, double anchor_value) {
    if (pde.equation == Equation::Darcy)
        fail(ErrorKind::Validation,
             "mfs_solve: laplace and helmholtz only");
    if (n_sources < 32)
        fail(ErrorKind::Validation, "mfs_solve: need at least 32 sources");
    if (boundary_data.empty())
        fail(ErrorKind::Validation, "mfs_solve: empty boundary data");

    MfsSolution sol;
    sol.equation_ = pde.equation;
    sol.k_ = pde.helmholtz_k;
    sol.src_x_.resize(n_sources);
    sol.src_y_.resize(n_sources);
    for (int j = 0; j < n_sources; ++j) {
        const double a = 2.0 * kPi * j / n_sources;
        const double r = kSourceDilation * shape.radius(a);
        sol.src_x_[j] = r * std::cos(a);
        sol.src_y_[j] = r * std::sin(a);
    }

    const bool anchored =
        pde.equation == Equation::Laplace && pde.bc_kind == BcKind::Neumann;
    const int rows = static_cast<int>(boundary_data.size()) + (anchored ? 1 : 0);
    Eigen::MatrixXd A(rows, n_sources);
    Eigen::VectorXd b(rows);
    for (size_t i = 0; i < boundary_data.size(); ++i) {
        const auto& s = boundary_data[i];
        for (int j = 0; j < n_sources; ++j) {
            A(i, j) = pde.bc_kind == BcKind::Dirichlet
                          ? green_value(pde.equation, pde.helmholtz_k,
                                        s.point.x, s.point.y, sol.src_x_[j],
                                        sol.src_y_[j])
                          : green_normal_deriv(pde.equation, pde.helmholtz_k,
                                               s.point.x, s.point.y, s.nx,
                                               s.ny, sol.src_x_[j],
                                               sol.src_y_[j]);
        }
        b(i) = s.value;
    }
    if (anchored) {
        const int i = rows - 1;
        for (int j = 0; j < n_sources; ++j)
            A(i, j) = green_value(pde.equation, pde.helmholtz_k, 0.0, 0.0,
                                  sol.src_x_[j], sol.src_y_[j]);
        b(i) = anchor_value;
    }

    // MFS collocation matrices are severely ill-conditioned; truncated SVD
    // least squares is the standard stable solve.
    Eigen::BDCSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeThinU |
                                              Eigen::ComputeThinV);
    Eigen::VectorXd c = svd.solve(b);
    const Eigen::VectorXd resid = A * c - b;
    sol.max_residual_ = resid.cwiseAbs().maxCoeff();
    if (!(sol.max_residual_ <= kMfsResidualTol))
        fail(ErrorKind::Numeric,
             "mfs_solve: collocation residual " + fmt_g17(sol.max_residual_) +
                 " exceeds " + fmt_g17(kMfsResidualTol) +
                 " (ill-posed data or too few sources)");
    sol.coeff_.assign(c.data(), c.data() + c.size());
    return sol;
}

namespace {

// Boundary datum before any compatibility correction.
double raw_value(const PdeSpec& pde, const geom::BoundarySample& s) {
    return pde.bc_kind == BcKind::Dirichlet ? dirichlet_value(pde, s.point)
                                            : neumann_value(pde, s);
}

// Mean to subtract so that the Neumann Laplace data integrates to zero
// over the boundary (solvability requirement); zero in every other case.
double compatibility_shift(const geom::BoundaryShape& shape,
                           const PdeSpec& pde) {
    if (pde.truth_mode != TruthMode::MfsOracle ||
        pde.equation != Equation::Laplace || pde.bc_kind != BcKind::Neumann)
        return 0.0;
    const double total = boundary_line_integral(
        shape, [&](const geom::BoundarySample& s) { return raw_value(pde, s); });
    const double perimeter = boundary_line_integral(
        shape, [](const geom::BoundarySample&) { return 1.0; });
    return total / perimeter;
}

}  // namespace

Dataset build_dataset(const std::string& shape_id, const PdeSpec& pde,
                      int64_t m_boundary, int64_t n_interior, uint64_t seed) {
    pde.validate();
    if (m_boundary < 1 || n_interior < 1)
        fail(ErrorKind::Validation,
             "build_dataset: m_boundary and n_interior must be >= 1");
    const geom::BoundaryShape& shape = geom::boundary_by_id(shape_id);

    Dataset ds;
    ds.shape_id = shape_id;
    ds.pde = pde;
    ds.seed = seed;
    ds.boundary = geom::sample_boundary(shape, m_boundary,
                                        derive_seed(seed, "boundary"));
    const double shift = compatibility_shift(shape, pde);
    for (auto& s : ds.boundary) s.value = raw_value(pde, s) - shift;

    const auto interior_pts = geom::sample_interior(
        shape, n_interior, kInteriorMargin, derive_seed(seed, "interior"));

    ds.interior.reserve(interior_pts.size());
    switch (pde.truth_mode) {
        case TruthMode::Analytic: {
            for (const auto& p : interior_pts)
                ds.interior.push_back({p, analytic_dirichlet_data(p.x, p.y)});
            break;
        }
        case TruthMode::Manufactured: {
            const Manufactured m = manufacture(pde);
            for (const auto& p : interior_pts)
                ds.interior.push_back({p, m.u.value(p.x, p.y)});
            break;
        }
        case TruthMode::MfsOracle: {
            auto dense = geom::equispaced_boundary(shape, kDenseBoundaryFit);
            for (auto& s : dense) s.value = raw_value(pde, s) - shift;
            const MfsSolution sol =
                mfs_solve(shape, pde, dense, kOracleSources, 0.0);
            for (const auto& p : interior_pts)
                ds.interior.push_back({p, sol.value(p.x, p.y)});
            break;
        }
    }

    for (const auto& s : ds.boundary)
        if (!std::isfinite(s.value))
            fail(ErrorKind::Numeric, "build_dataset: non-finite boundary value");
    for (const auto& s : ds.interior)
        if (!std::isfinite(s.true_value))
            fail(ErrorKind::Numeric, "build_dataset: non-finite interior truth");
    return ds;
}

namespace {

using ordered_json = nlohmann::ordered_json;

void require_keys(const nlohmann::json& j, const char* where,
                  std::initializer_list<const char*> keys) {
    for (const char* k : keys)
        if (!j.contains(k))
            fail(ErrorKind::Validation,
                 std::string("dataset: missing key ") + where + "." + k);
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool known = false;
        for (const char* k : keys)
            if (it.key() == k) known = true;
        if (!known)
            fail(ErrorKind::Validation,
                 std::string("dataset: unknown key ") + where + "." + it.key());
    }
}

double finite_number(const nlohmann::json& j, const std::string& where) {
    if (!j.is_number())
        fail(ErrorKind::Validation, "dataset: " + where + " must be a number");
    const double v = j.get<double>();
    if (!std::isfinite(v))
        fail(ErrorKind::Validation, "dataset: " + where + " is not finite");
    return v;
}

}  // namespace

std::string dataset_to_json(const Dataset& ds) {
    ordered_json j;
    j["shape_id"] = ds.shape_id;
    j["equation"] = to_string(ds.pde.equation);
    j["bc_kind"] = to_string(ds.pde.bc_kind);
    j["truth_mode"] = to_string(ds.pde.truth_mode);
    j["seed"] = ds.seed;
    if (ds.pde.equation == Equation::Helmholtz)
        j["helmholtz_k"] = ds.pde.helmholtz_k;
    auto& jb = j["boundary"] = ordered_json::array();
    for (const auto& s : ds.boundary) {
        ordered_json e;
        e["alpha"] = s.alpha;
        e["x"] = s.point.x;
        e["y"] = s.point.y;
        e["r"] = s.point.r;
        e["theta"] = s.point.theta;
        e["nx"] = s.nx;
        e["ny"] = s.ny;
        e["value"] = s.value;
        jb.push_back(std::move(e));
    }
    auto& ji = j["interior"] = ordered_json::array();
    for (const auto& s : ds.interior) {
        ordered_json e;
        e["x"] = s.point.x;
        e["y"] = s.point.y;
        e["r"] = s.point.r;
        e["theta"] = s.point.theta;
        e["true_value"] = s.true_value;
        ji.push_back(std::move(e));
    }
    return j.dump(2) + "\n";
}

Dataset dataset_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorKind::Validation, std::string("dataset: bad JSON: ") + e.what());
    }
    if (!j.is_object())
        fail(ErrorKind::Validation, "dataset: top level must be an object");

    Dataset ds;
    const bool helm = j.contains("equation") && j["equation"].is_string() &&
                      j["equation"].get<std::string>() == "helmholtz";
    if (helm)
        require_keys(j, "", {"shape_id", "equation", "bc_kind", "truth_mode",
                             "seed", "helmholtz_k", "boundary", "interior"});
    else
        require_keys(j, "", {"shape_id", "equation", "bc_kind", "truth_mode",
                             "seed", "boundary", "interior"});

    if (!j["shape_id"].is_string())
        fail(ErrorKind::Validation, "dataset: shape_id must be a string");
    ds.shape_id = j["shape_id"].get<std::string>();
    ds.pde.equation = parse_equation(j["equation"].get<std::string>());
    ds.pde.bc_kind = parse_bc_kind(j["bc_kind"].get<std::string>());
    ds.pde.truth_mode = parse_truth_mode(j["truth_mode"].get<std::string>());
    if (!j["seed"].is_number_unsigned())
        fail(ErrorKind::Validation, "dataset: seed must be a non-negative integer");
    ds.seed = j["seed"].get<uint64_t>();
    if (helm) ds.pde.helmholtz_k = finite_number(j["helmholtz_k"], "helmholtz_k");
    ds.pde.validate();

    if (!j["boundary"].is_array() || j["boundary"].empty())
        fail(ErrorKind::Validation, "dataset: boundary must be a non-empty array");
    for (const auto& e : j["boundary"]) {
        require_keys(e, "boundary[]",
                     {"alpha", "x", "y", "r", "theta", "nx", "ny", "value"});
        geom::BoundarySample s;
        s.alpha = finite_number(e["alpha"], "boundary[].alpha");
        s.point.x = finite_number(e["x"], "boundary[].x");
        s.point.y = finite_number(e["y"], "boundary[].y");
        s.point.r = finite_number(e["r"], "boundary[].r");
        s.point.theta = finite_number(e["theta"], "boundary[].theta");
        s.nx = finite_number(e["nx"], "boundary[].nx");
        s.ny = finite_number(e["ny"], "boundary[].ny");
        s.value = finite_number(e["value"], "boundary[].value");
        ds.boundary.push_back(s);
    }
    if (!j["interior"].is_array() || j["interior"].empty())
        fail(ErrorKind::Validation, "dataset: interior must be a non-empty array");
    for (const auto& e : j["interior"]) {
        require_keys(e, "interior[]", {"x", "y", "r", "theta", "true_value"});
        InteriorSample s;
        s.point.x = finite_number(e["x"], "interior[].x");
        s.point.y = finite_number(e["y"], "interior[].y");
        s.point.r = finite_number(e["r"], "interior[].r");
        s.point.theta = finite_number(e["theta"], "interior[].theta");
        s.true_value = finite_number(e["true_value"], "interior[].true_value");
        ds.interior.push_back(s);
    }
    return ds;
}

void save_dataset(const Dataset& ds, const std::string& path) {
    write_file(path, dataset_to_json(ds));
}

Dataset load_dataset(const std::string& path) {
    return dataset_from_json(read_file(path));
}

}  // namespace fieno::truth
