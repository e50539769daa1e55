#pragma once

#include <optional>
#include <vector>

#include "pinn/types.hpp"

namespace pinn::pde {

/// Lu = c0*u + sum_i b_i du/dx_i + sum_i A_i d2u/dx_i^2 on D coordinates.
/// Covers both preset problems; mixed second-order terms are out of scope.
struct LinearOperator {
    double c0 = 0.0;
    Vec b;  // first-order coefficients, one per coordinate
    Vec A;  // diagonal second-order coefficients, one per coordinate

    Eigen::Index dim() const { return b.size(); }
    bool is_zero() const;
};

LinearOperator zero_operator(Eigen::Index dim);
LinearOperator identity_operator(Eigen::Index dim);

/// Axis-aligned box, optionally with axis 0 acting as time. The boundary set
/// depends on that flag:
///   time axis:  {t=lo0} x space  union  [lo0,hi0] x (spatial faces)
///   no time:    all 2*dim faces of the box
struct Domain {
    Vec lo;
    Vec hi;
    bool time_axis = false;

    Eigen::Index dim() const { return lo.size(); }
    double extent(Eigen::Index i) const { return hi(i) - lo(i); }
    /// Largest Euclidean norm over the corners; used to rescale samples so
    /// every point the model sees has norm at most 1.
    double corner_norm() const;
    bool contains(const Vec& x) const;
    bool strictly_inside(const Vec& x) const;
    /// Membership in the boundary set (exact face comparison).
    bool on_boundary(const Vec& x) const;

    /// One face of the boundary set: coordinate `axis` pinned to `value`.
    struct Face {
        Eigen::Index axis;
        double value;
        double measure;
    };
    std::vector<Face> boundary_faces() const;
};

/// Finite sum of separable sinusoid products
///   u(x) = sum_t c_t * prod_i sin(omega_{t,i} * pi * x_i + phase_{t,i}),
/// closed under first and second coordinate derivatives.
struct SolutionSpec {
    struct Term {
        double coef = 0.0;
        Vec omega;
        Vec phase;
    };
    std::vector<Term> terms;

    bool empty() const { return terms.empty(); }
    double value(const Vec& x) const;
    double d1(const Vec& x, Eigen::Index axis) const;
    double d2(const Vec& x, Eigen::Index axis) const;
};

/// Applies the operator to the closed-form solution at x.
double manufactured_forcing(const LinearOperator& op, const SolutionSpec& exact, const Vec& x);

/// A PDE instance: operator and data in physical coordinates, plus the
/// normalization scale mapping physical points to the unit-ball samples the
/// model consumes (x_model = x / scale).
struct PdeProblem {
    LinearOperator op;
    Domain domain;
    SolutionSpec exact;  // may be empty (then f = g = 0)
    double scale = 1.0;

    Eigen::Index dim() const { return domain.dim(); }
    double forcing(const Vec& x_phys) const;
    double boundary_data(const Vec& x_phys) const;
    bool has_exact() const { return !exact.empty(); }
    double exact_value(const Vec& x_phys) const { return exact.value(x_phys); }

    /// Operator transported to normalized coordinates (b/s, A/s^2); this is
    /// what gets applied to the network.
    LinearOperator network_operator() const;
    Vec to_physical(const Vec& x_model) const { return x_model * scale; }
    Vec to_normalized(const Vec& x_phys) const { return x_phys / scale; }
};

/// du/dx0 - sum_{i>=1} d2u/dx_i^2 = f on (0,T) x (0,1)^d with data on
/// {0} x space union [0,T] x (spatial boundary).
PdeProblem heat_problem(int d, double T, SolutionSpec exact);

/// d2u/dx^2 + d2u/dy^2 + k^2 u = f on [0,1]^2 with u = 0 on the boundary.
/// Throws InconsistentProblem if `exact` does not vanish on the boundary.
PdeProblem helmholtz_problem(double k, SolutionSpec exact);

/// Default manufactured solutions used by the experiment presets.
SolutionSpec default_heat_solution(int d);
SolutionSpec single_scale_solution();  // sin(pi x) sin(pi y)
SolutionSpec multi_scale_solution();   // sin(pi x) sin(pi y) + 0.1 sin(10 pi x) sin(10 pi y)

}  // namespace pinn::pde
