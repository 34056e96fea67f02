#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "common.hpp"

namespace fieno::geom {

// A point carrying both Cartesian and polar coordinates, theta in [0, 2pi).
struct Point2 {
    double x = 0.0;
    double y = 0.0;
    double r = 0.0;
    double theta = 0.0;

    static Point2 from_xy(double x, double y);
    static Point2 from_polar(double r, double theta);
};

struct BoundarySample {
    Point2 point;
    double alpha = 0.0;  // boundary parameter
    double nx = 0.0;     // outward unit normal
    double ny = 0.0;
    double value = 0.0;  // boundary datum, filled by the data generator
};

// Star-shaped boundary around the origin. Either a five-term trigonometric
// perturbation of the unit circle,
//   r(a) = 1 + 0.2(t1 sin 3a + t2 sin 4a + t3 sin 6a + t4 cos 2a + t5 cos 5a),
// or a regular polygon given as a piecewise-linear polar radius. The
// constructor rejects shapes whose radius is not strictly positive on a
// 4096-point parameter grid.
class BoundaryShape {
public:
    // Trigonometric boundary from the five perturbation coefficients.
    static BoundaryShape trig(const std::array<double, 5>& t);
    // Regular n-gon, circumradius 1, first vertex at alpha = pi/2.
    static BoundaryShape regular_polygon(int n_vertices);

    double radius(double alpha) const;
    // d r / d alpha (one-sided limit at polygon vertices)
    double radius_deriv(double alpha) const;
    Point2 point_at(double alpha) const;
    // Outward unit normal; at polygon vertices, the bisector of the two
    // adjacent edge normals.
    void normal_at(double alpha, double* nx, double* ny) const;
    // |d p / d alpha|, the arc-length Jacobian.
    double arc_jacobian(double alpha) const;

    // Radius of a circle centered at the origin that encloses the shape.
    double bounding_radius() const;

    bool is_polygon() const { return n_vertices_ > 0; }
    const std::array<double, 5>& coefficients() const { return t_; }

private:
    BoundaryShape() = default;
    void validate() const;

    std::array<double, 5> t_{};  // trig coefficients (unused for polygons)
    int n_vertices_ = 0;         // 0 for trig shapes
};

// Preset boundary ids: the training boundary, three irregular test
// boundaries, the pentagon, and the unit circle.
struct PresetBoundary {
    std::string id;
    BoundaryShape shape;
};
const std::vector<PresetBoundary>& preset_boundaries();
const BoundaryShape& boundary_by_id(const std::string& id);

// m boundary samples at parameters drawn uniformly from [0, 2pi);
// values left at zero.
std::vector<BoundarySample> sample_boundary(const BoundaryShape& shape,
                                            int64_t m, uint64_t seed);

// Equispaced parameters, alpha_k = 2 pi k / m.
std::vector<BoundarySample> equispaced_boundary(const BoundaryShape& shape,
                                                int64_t m);

// n interior points uniform over { (r, a) : r < (1 - margin) radius(a) },
// by rejection sampling in the bounding box. Throws ErrorKind::Numeric if
// max_consecutive_rejects are rejected in a row.
std::vector<Point2> sample_interior(const BoundaryShape& shape, int64_t n,
                                    double margin, uint64_t seed,
                                    int64_t max_consecutive_rejects = 1000000);

// CSV with header alpha,x,y,r,theta,nx,ny at 17 significant digits.
std::string boundary_csv(const BoundaryShape& shape, int64_t n_points);

}  // namespace fieno::geom
