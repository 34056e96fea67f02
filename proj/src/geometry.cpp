#include "geometry.hpp"

#include <cmath>
#include <sstream>

namespace fieno::geom {

namespace {

constexpr double kTwoPi = 2.0 * M_PI;

double wrap_angle(double a) {
    double w = std::fmod(a, kTwoPi);
    if (w < 0.0) w += kTwoPi;
    return w;
}

// Signed offset of a from the direction `mid`, in (-pi, pi].
double a_offset(double a, double mid) {
    double d = std::fmod(a - mid, kTwoPi);
    if (d > M_PI) d -= kTwoPi;
    if (d <= -M_PI) d += kTwoPi;
    return d;
}

}  // namespace

Point2 Point2::from_xy(double x, double y) {
    Point2 p;
    p.x = x;
    p.y = y;
    p.r = std::hypot(x, y);
    p.theta = (x == 0.0 && y == 0.0) ? 0.0 : wrap_angle(std::atan2(y, x));
    return p;
}

Point2 Point2::from_polar(double r, double theta) {
    Point2 p;
    p.r = r;
    p.theta = wrap_angle(theta);
    p.x = r * std::cos(p.theta);
    p.y = r * std::sin(p.theta);
    return p;
}

BoundaryShape BoundaryShape::trig(const std::array<double, 5>& t) {
    BoundaryShape s;
    s.t_ = t;
    s.validate();
    return s;
}

BoundaryShape BoundaryShape::regular_polygon(int n_vertices) {
    if (n_vertices < 3)
        fail(ErrorKind::Validation, "regular_polygon: need at least 3 vertices");
    BoundaryShape s;
    s.n_vertices_ = n_vertices;
    s.validate();
    return s;
}

void BoundaryShape::validate() const {
    constexpr int kGrid = 4096;
    for (int k = 0; k < kGrid; ++k) {
        const double a = kTwoPi * k / kGrid;
        if (!(radius(a) > 0.0))
            fail(ErrorKind::Validation,
                 "boundary shape has non-positive radius at alpha=" +
                     fmt_g17(a));
    }
}

double BoundaryShape::radius(double alpha) const {
    const double a = wrap_angle(alpha);
    if (n_vertices_ == 0) {
        return 1.0 + 0.2 * (t_[0] * std::sin(3 * a) + t_[1] * std::sin(4 * a) +
                            t_[2] * std::sin(6 * a) + t_[3] * std::cos(2 * a) +
                            t_[4] * std::cos(5 * a));
    }
    // Polygon edge at parameter a: r = apothem / cos(offset from the edge
    // midpoint direction), offset in [-pi/n, pi/n].
    const double sector = kTwoPi / n_vertices_;
    const double b = wrap_angle(a - M_PI / 2.0);
    const double k = std::floor(b / sector);
    const double mid = M_PI / 2.0 + (k + 0.5) * sector;
    const double apothem = std::cos(M_PI / n_vertices_);
    return apothem / std::cos(a_offset(a, mid));
}

double BoundaryShape::radius_deriv(double alpha) const {
    const double a = wrap_angle(alpha);
    if (n_vertices_ == 0) {
        return 0.2 * (3 * t_[0] * std::cos(3 * a) + 4 * t_[1] * std::cos(4 * a) +
                      6 * t_[2] * std::cos(6 * a) - 2 * t_[3] * std::sin(2 * a) -
                      5 * t_[4] * std::sin(5 * a));
    }
    const double sector = kTwoPi / n_vertices_;
    const double b = wrap_angle(a - M_PI / 2.0);
    const double k = std::floor(b / sector);
    const double mid = M_PI / 2.0 + (k + 0.5) * sector;
    const double apothem = std::cos(M_PI / n_vertices_);
    const double d = a_offset(a, mid);
    return apothem * std::tan(d) / std::cos(d);
}

Point2 BoundaryShape::point_at(double alpha) const {
    return Point2::from_polar(radius(alpha), alpha);
}

void BoundaryShape::normal_at(double alpha, double* nx, double* ny) const {
    const double a = wrap_angle(alpha);
    if (n_vertices_ > 0) {
        const double sector = kTwoPi / n_vertices_;
        const double b = wrap_angle(a - M_PI / 2.0);
        double rel = std::fmod(b, sector);
        // Exactly at a vertex the two edge normals bisect to the radial
        // direction.
        if (rel == 0.0) {
            *nx = std::cos(a);
            *ny = std::sin(a);
            return;
        }
        const double k = std::floor(b / sector);
        const double mid = M_PI / 2.0 + (k + 0.5) * sector;
        *nx = std::cos(mid);
        *ny = std::sin(mid);
        return;
    }
    // Tangent of (r(a) cos a, r(a) sin a), rotated -90 degrees, oriented
    // away from the origin-containing interior.
    const double r = radius(a);
    const double dr = radius_deriv(a);
    const double ca = std::cos(a), sa = std::sin(a);
    const double tx = dr * ca - r * sa;
    const double ty = dr * sa + r * ca;
    double cnx = ty, cny = -tx;
    if (cnx * ca + cny * sa < 0.0) {
        cnx = -cnx;
        cny = -cny;
    }
    const double len = std::hypot(cnx, cny);
    *nx = cnx / len;
    *ny = cny / len;
}

double BoundaryShape::arc_jacobian(double alpha) const {
    const double r = radius(alpha);
    const double dr = radius_deriv(alpha);
    return std::hypot(r, dr);
}

double BoundaryShape::bounding_radius() const {
    if (n_vertices_ > 0) return 1.0;
    double sum = 0.0;
    for (double t : t_) sum += std::fabs(t);
    return 1.0 + 0.2 * sum;
}

const std::vector<PresetBoundary>& preset_boundaries() {
    static const std::vector<PresetBoundary> presets = [] {
        std::vector<PresetBoundary> v;
        v.push_back({"B_train", BoundaryShape::trig({0, 1, 0, 0, 0})});
        v.push_back({"B1", BoundaryShape::trig({0.3, 0, 0.2, 0, 0})});
        v.push_back({"B2", BoundaryShape::trig({0, 0.5, 0, 0.3, 0})});
        v.push_back({"B3", BoundaryShape::trig({0.2, 0.2, 0, 0, 0.3})});
        v.push_back({"B4", BoundaryShape::regular_polygon(5)});
        v.push_back({"circle", BoundaryShape::trig({0, 0, 0, 0, 0})});
        return v;
    }();
    return presets;
}

const BoundaryShape& boundary_by_id(const std::string& id) {
    for (const auto& p : preset_boundaries())
        if (p.id == id) return p.shape;
    fail(ErrorKind::Validation, "unknown boundary id: " + id);
}

static BoundarySample sample_at(const BoundaryShape& shape, double alpha) {
    BoundarySample s;
    s.alpha = alpha;
    s.point = shape.point_at(alpha);
    shape.normal_at(alpha, &s.nx, &s.ny);
    return s;
}

std::vector<BoundarySample> sample_boundary(const BoundaryShape& shape,
                                            int64_t m, uint64_t seed) {
    if (m < 1) fail(ErrorKind::Validation, "sample_boundary: m must be >= 1");
    Rng rng(seed);
    std::vector<BoundarySample> out;
    out.reserve(m);
    for (int64_t i = 0; i < m; ++i)
        out.push_back(sample_at(shape, rng.uniform(0.0, kTwoPi)));
    return out;
}

std::vector<BoundarySample> equispaced_boundary(const BoundaryShape& shape,
                                                int64_t m) {
    if (m < 1) fail(ErrorKind::Validation, "equispaced_boundary: m must be >= 1");
    std::vector<BoundarySample> out;
    out.reserve(m);
    for (int64_t i = 0; i < m; ++i)
        out.push_back(sample_at(shape, kTwoPi * i / m));
    return out;
}

std::vector<Point2> sample_interior(const BoundaryShape& shape, int64_t n,
                                    double margin, uint64_t seed,
                                    int64_t max_consecutive_rejects) {
    if (n < 1) fail(ErrorKind::Validation, "sample_interior: n must be >= 1");
    if (!(margin >= 0.0 && margin < 1.0))
        fail(ErrorKind::Validation, "sample_interior: margin must be in [0, 1)");
    Rng rng(seed);
    const double box = shape.bounding_radius();
    std::vector<Point2> out;
    out.reserve(n);
    int64_t rejects = 0;
    while (static_cast<int64_t>(out.size()) < n) {
        const double x = rng.uniform(-box, box);
        const double y = rng.uniform(-box, box);
        const Point2 p = Point2::from_xy(x, y);
        if (p.r < (1.0 - margin) * shape.radius(p.theta)) {
            out.push_back(p);
            rejects = 0;
        } else if (++rejects > max_consecutive_rejects) {
            fail(ErrorKind::Numeric,
                 "sample_interior: acceptance rate collapsed after " +
                     std::to_string(max_consecutive_rejects) +
                     " consecutive rejections");
        }
    }
    return out;
}

std::string boundary_csv(const BoundaryShape& shape, int64_t n_points) {
    const auto samples = equispaced_boundary(shape, n_points);
    std::ostringstream ss;
    ss << "alpha,x,y,r,theta,nx,ny\n";
    for (const auto& s : samples) {
        ss << fmt_g17(s.alpha) << ',' << fmt_g17(s.point.x) << ','
           << fmt_g17(s.point.y) << ',' << fmt_g17(s.point.r) << ','
           << fmt_g17(s.point.theta) << ',' << fmt_g17(s.nx) << ','
           << fmt_g17(s.ny) << '\n';
    }
    return ss.str();
}

}  // namespace fieno::geom
