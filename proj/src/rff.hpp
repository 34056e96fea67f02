#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "common.hpp"

namespace fieno::rff {

// Random Fourier feature basis for the Gaussian kernel
// exp(-sigma^2 ||x - y||^2 / 2): D frequency rows drawn from N(0, sigma^2 I)
// and D phases from U[0, 2pi). Immutable after construction; regenerable
// bit-for-bit from (seed, dim, D, sigma).
struct RffBasis {
    int dim = 0;
    int count = 0;  // D
    double sigma = 1.0;
    uint64_t seed = 0;
    std::vector<double> omegas;  // row-major, count x dim
    std::vector<double> biases;  // count
};

RffBasis sample_basis(int dim, int count, double sigma, uint64_t seed);

// z(x)_i = sqrt(2/D) cos(omega_i . x + b_i)
std::vector<double> feature_map(const RffBasis& basis, std::span<const double> x);

// z(x) . z(y), the Monte-Carlo kernel estimate.
double approx_kernel(const RffBasis& basis, std::span<const double> x,
                     std::span<const double> y);

// Finite trigonometric series sum_n a_n cos(nt) + b_n sin(nt); index n
// starts at 0 (the n = 0 cosine term is the constant).
struct TrigSeries {
    std::vector<double> cos_coeffs;
    std::vector<double> sin_coeffs;

    double eval(double t) const;
    double cos_at(int n) const {
        return n < static_cast<int>(cos_coeffs.size()) ? cos_coeffs[n] : 0.0;
    }
    double sin_at(int n) const {
        return n < static_cast<int>(sin_coeffs.size()) ? sin_coeffs[n] : 0.0;
    }
};

// Both sides of the full-circle projection identity for an integer
// frequency m and phase b:
//   lhs = integral_0^{2pi} cos(mt + b) phi(t) dt   (composite trapezoid,
//         2^14 nodes on the periodic integrand)
//   rhs = 2 pi c with c = (a_m cos b - b_m sin b) / 2.
struct IdentityCheck {
    double lhs;
    double rhs;
};
IdentityCheck circle_integral_identity(int m, double b, const TrigSeries& phi);

}  // namespace fieno::rff
