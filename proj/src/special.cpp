#include "special.hpp"

#include <cmath>

#include "common.hpp"

namespace fieno::special {

// The standard library carries the cylindrical Bessel families in double
// precision since C++17; these wrappers add the even/odd reflections for
// negative arguments (the library functions are defined on x >= 0) and
// turn the second-kind domain requirement into a library error.

double bessel_j0(double x) { return std::cyl_bessel_j(0.0, std::fabs(x)); }

double bessel_j1(double x) {
    const double v = std::cyl_bessel_j(1.0, std::fabs(x));
    return x < 0.0 ? -v : v;
}

double bessel_y0(double x) {
    if (!(x > 0.0)) fail(ErrorKind::Numeric, "bessel_y0: requires x > 0");
    return std::cyl_neumann(0.0, x);
}

double bessel_y1(double x) {
    if (!(x > 0.0)) fail(ErrorKind::Numeric, "bessel_y1: requires x > 0");
    return std::cyl_neumann(1.0, x);
}

}  // namespace fieno::special
