#include "rff.hpp"

#include <cmath>

namespace fieno::rff {

RffBasis sample_basis(int dim, int count, double sigma, uint64_t seed) {
    if (dim < 1) fail(ErrorKind::Validation, "sample_basis: dim must be >= 1");
    if (count < 1) fail(ErrorKind::Validation, "sample_basis: D must be >= 1");
    if (!(sigma > 0.0))
        fail(ErrorKind::Validation, "sample_basis: sigma must be > 0");
    RffBasis b;
    b.dim = dim;
    b.count = count;
    b.sigma = sigma;
    b.seed = seed;
    Rng rng(seed);
    b.omegas.resize(static_cast<size_t>(count) * dim);
    for (double& w : b.omegas) w = rng.normal(0.0, sigma);
    b.biases.resize(count);
    for (double& ph : b.biases) ph = rng.uniform(0.0, 2.0 * M_PI);
    return b;
}

std::vector<double> feature_map(const RffBasis& basis,
                                std::span<const double> x) {
    if (static_cast<int>(x.size()) != basis.dim)
        fail(ErrorKind::Validation, "feature_map: input dimension mismatch");
    const double scale = std::sqrt(2.0 / basis.count);
    std::vector<double> z(basis.count);
    for (int i = 0; i < basis.count; ++i) {
        double dot = basis.biases[i];
        const double* w = &basis.omegas[static_cast<size_t>(i) * basis.dim];
        for (int d = 0; d < basis.dim; ++d) dot += w[d] * x[d];
        z[i] = scale * std::cos(dot);
    }
    return z;
}

double approx_kernel(const RffBasis& basis, std::span<const double> x,
                     std::span<const double> y) {
    const auto zx = feature_map(basis, x);
    const auto zy = feature_map(basis, y);
    double acc = 0.0;
    for (int i = 0; i < basis.count; ++i) acc += zx[i] * zy[i];
    return acc;
}

double TrigSeries::eval(double t) const {
    const size_t n_max = std::max(cos_coeffs.size(), sin_coeffs.size());
    if (n_max == 0) return 0.0;
    // cos(nt), sin(nt) by the angle-addition recurrence: two trig calls
    // per evaluation instead of two per harmonic.
    const double c1 = std::cos(t), s1 = std::sin(t);
    double cn = 1.0, sn = 0.0;
    double acc = 0.0;
    for (size_t n = 0; n < n_max; ++n) {
        if (n < cos_coeffs.size()) acc += cos_coeffs[n] * cn;
        if (n < sin_coeffs.size()) acc += sin_coeffs[n] * sn;
        const double next_c = cn * c1 - sn * s1;
        sn = sn * c1 + cn * s1;
        cn = next_c;
    }
    return acc;
}

IdentityCheck circle_integral_identity(int m, double b, const TrigSeries& phi) {
    if (m < 1)
        fail(ErrorKind::Validation, "circle_integral_identity: m must be >= 1");
    // Trapezoid rule on a 2pi-periodic integrand reduces to the uniform
    // node average; spectrally accurate for band-limited phi.
    constexpr int kNodes = 1 << 14;
    const double h = 2.0 * M_PI / kNodes;
    double lhs = 0.0;
    for (int k = 0; k < kNodes; ++k) {
        const double t = h * k;
        lhs += std::cos(m * t + b) * phi.eval(t);
    }
    lhs *= h;
    const double c = 0.5 * (phi.cos_at(m) * std::cos(b) - phi.sin_at(m) * std::sin(b));
    return {lhs, 2.0 * M_PI * c};
}

}  // namespace fieno::rff
