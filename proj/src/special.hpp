#pragma once

namespace fieno::special {

// Bessel functions of the first and second kind, orders 0 and 1. J is
// extended to negative arguments by its even/odd symmetry; Y requires
// x > 0 and reports a Numeric error otherwise. Accuracy is checked against
// high-precision references in the unit tests.
double bessel_j0(double x);
double bessel_j1(double x);
double bessel_y0(double x);  // requires x > 0
double bessel_y1(double x);  // requires x > 0

}  // namespace fieno::special
