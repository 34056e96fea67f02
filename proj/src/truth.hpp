#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "common.hpp"
#include "geometry.hpp"

namespace fieno::truth {

enum class Equation { Laplace, Helmholtz, Darcy };
enum class BcKind { Dirichlet, Neumann };
enum class TruthMode { Analytic, Manufactured, MfsOracle };

std::string to_string(Equation e);
std::string to_string(BcKind b);
std::string to_string(TruthMode t);
Equation parse_equation(const std::string& s);
BcKind parse_bc_kind(const std::string& s);
TruthMode parse_truth_mode(const std::string& s);

struct PdeSpec {
    Equation equation = Equation::Laplace;
    BcKind bc_kind = BcKind::Dirichlet;
    TruthMode truth_mode = TruthMode::Analytic;
    double helmholtz_k = 1.0;

    // Rejects helmholtz_k <= 0, Darcy + MfsOracle (no fundamental solution
    // for variable coefficients), and Analytic for anything other than
    // Laplace/Dirichlet (the only combination with a closed-form interior
    // solution for the prescribed boundary data).
    void validate() const;
};

// Closed-form scalar field with an analytic gradient.
struct Field {
    std::function<double(double, double)> value;
    std::function<std::array<double, 2>(double, double)> gradient;
};

// Manufactured solution bundle: u* solves the equation exactly; for Darcy
// the coefficient a and forcing f := -div(a grad u*) are included.
struct Manufactured {
    Field u;
    Field a;                                     // Darcy only
    std::function<double(double, double)> f;     // Darcy only
};

Manufactured manufacture(const PdeSpec& pde);

// Prescribed boundary data. Analytic/MfsOracle modes use the fixed data
// functions (Dirichlet e^x sin y; Neumann 0.1 cos x cos y); Manufactured
// takes the trace / normal derivative of the manufactured solution.
double dirichlet_value(const PdeSpec& pde, const geom::Point2& p);
double neumann_value(const PdeSpec& pde, const geom::BoundarySample& s);

// Interior evaluator returned by the fundamental-solutions solver:
// u(p) = sum_j c_j G(p, q_j), sources q_j outside the domain.
class MfsSolution {
public:
    double value(double x, double y) const;
    double max_residual() const { return max_residual_; }

private:
    friend MfsSolution mfs_solve(const geom::BoundaryShape&, const PdeSpec&,
                                 const std::vector<geom::BoundarySample>&,
                                 int, double);
    Equation equation_ = Equation::Laplace;
    double k_ = 1.0;
    std::vector<double> src_x_, src_y_, coeff_;
    double max_residual_ = 0.0;
};

// Least-squares collocation against the given boundary samples (values are
// Dirichlet data or normal derivatives per pde.bc_kind). Sources sit at
// equispaced parameters on the 1.5x dilated curve. For Neumann Laplace the
// system gains one interior anchor row u(0,0) = anchor_value to pin the
// additive constant. Fails (Numeric) if the fitted boundary residual
// exceeds 1e-4.
MfsSolution mfs_solve(const geom::BoundaryShape& shape, const PdeSpec& pde,
                      const std::vector<geom::BoundarySample>& boundary_data,
                      int n_sources, double anchor_value = 0.0);

// Line integral of f over the boundary, 4096-node trapezoid in alpha.
double boundary_line_integral(
    const geom::BoundaryShape& shape,
    const std::function<double(const geom::BoundarySample&)>& f);

struct InteriorSample {
    geom::Point2 point;
    double true_value = 0.0;
};

struct Dataset {
    std::string shape_id;
    PdeSpec pde;
    uint64_t seed = 0;
    std::vector<geom::BoundarySample> boundary;
    std::vector<InteriorSample> interior;
};

// Samples the geometry, fills boundary values per bc_kind, and fills
// interior ground truth per truth_mode (closed form, or an MFS solve
// against a dense 2000-point equispaced boundary fit). For Neumann Laplace
// under MfsOracle the data is first projected to satisfy the compatibility
// condition (boundary mean removed). Pure function of its arguments.
Dataset build_dataset(const std::string& shape_id, const PdeSpec& pde,
                      int64_t m_boundary, int64_t n_interior, uint64_t seed);

std::string dataset_to_json(const Dataset& ds);
Dataset dataset_from_json(const std::string& text);
void save_dataset(const Dataset& ds, const std::string& path);
Dataset load_dataset(const std::string& path);

}  // namespace fieno::truth
