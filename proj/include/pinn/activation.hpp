#pragma once

#include <string>

#include "pinn/types.hpp"

namespace pinn::act {

/// Smooth activations with three globally Lipschitz derivatives.
/// ReLU-family functions are excluded on purpose.
enum class ActivationKind { Tanh, Logistic, Softplus };

ActivationKind kind_from_string(const std::string& name);
std::string to_string(ActivationKind kind);

/// Value and first three derivatives of the activation at one point.
struct Jet4 {
    double v0 = 0.0;  // sigma(z)
    double v1 = 0.0;  // sigma'(z)
    double v2 = 0.0;  // sigma''(z)
    double v3 = 0.0;  // sigma'''(z)
};

/// Closed-form 4-jet. Throws InvalidInput on non-finite z.
Jet4 eval_jet(ActivationKind kind, double z);

/// Batched jets over a matrix of pre-activations; outputs are resized to
/// z's shape. Uses vectorized exp-based formulas; values agree with
/// eval_jet to ~1e-14 absolute but are not bit-identical to it.
void eval_jets(ActivationKind kind, const Mat& z, Mat& j0, Mat& j1, Mat& j2, Mat& j3);

/// Empirical per-order Lipschitz constants on a uniform grid.
struct LipschitzReport {
    double lipschitz[4] = {0, 0, 0, 0};  // max secant slope of sigma^(k), k=0..3
    double max_abs_v3 = 0.0;             // max |sigma'''| over the grid
};

/// Scans [zmin, zmax] with `steps` grid points (steps >= 2, zmin < zmax).
LipschitzReport check_lipschitz(ActivationKind kind, double zmin, double zmax, long steps);

}  // namespace pinn::act
