#pragma once

#include <vector>

#include "pinn/optim.hpp"

namespace pinn::diag {

/// Quadrature remainders of the one-step recursion: component i is
///   integral over [0, eta] of
///     <grad L(w_base), grad r_i(w_base + alpha*dir) - grad r_i(w_base)> d alpha,
/// where r runs over interior then boundary residuals. For the implicit step
/// the base is w(k+1) and dir = +grad L(w(k+1)); for the explicit step the
/// base is w(k) and dir = -grad L(w(k)).
struct ResidualTerms {
    Vec i1;  // n1 entries
    Vec i2;  // n2 entries
};

/// Implicit-step remainders, evaluated at net_k1 (net_k is accepted for
/// interface symmetry and shape checking). Composite Simpson with `panels`
/// panels (even); eta == 0 returns zeros.
ResidualTerms residual_terms(const model::Network& net_k, const model::Network& net_k1, double eta,
                             const pde::PdeProblem& problem, const sampler::SampleSet& samples,
                             int panels, double boundary_weight = 1.0);

/// Explicit-step remainders, evaluated at net_k.
ResidualTerms gd_residual_terms(const model::Network& net_k, const model::Network& net_k1,
                                double eta, const pde::PdeProblem& problem,
                                const sampler::SampleSet& samples, int panels,
                                double boundary_weight = 1.0);

struct RecursionReport {
    double defect = 0.0;  // || stack(k+1) - (I + eta G(k+1))^{-1} (stack(k) - terms) ||
    double i1_norm = 0.0;
    double i2_norm = 0.0;
    int quadrature_panels = 0;
};

/// Checks the implicit one-step identity between consecutive IGD iterates.
/// The linear solve uses a symmetric factorization, never an inverse.
RecursionReport verify_recursion(const model::Network& net_k, const model::Network& net_k1,
                                 double eta, const pde::PdeProblem& problem,
                                 const sampler::SampleSet& samples, int panels,
                                 double boundary_weight = 1.0);

/// Defect of the explicit-step identity
///   stack(k+1) = (I - eta G(k)) stack(k) - chi(k).
double gd_recursion_defect(const model::Network& net_k, const model::Network& net_k1, double eta,
                           const pde::PdeProblem& problem, const sampler::SampleSet& samples,
                           int panels, double boundary_weight = 1.0);

struct DriftReport {
    double max_drift = 0.0;   // max_r ||w_r(k) - w_r(0)||
    double mean_drift = 0.0;  // mean over r
    double max_norm = 0.0;    // max_r ||w_r(k)||
};

DriftReport weight_drift(const model::Network& net_k, const model::Network& net0);

/// Width sweep of the per-run maxima of the remainder norms over a short IGD
/// trajectory, with log-log slopes fitted across widths.
struct ScalingRun {
    int width = 0;
    int seed_index = 0;
    double max_i1 = 0.0;
    double max_i2 = 0.0;
    bool diverged = false;
};

struct ScalingStudyResult {
    std::vector<ScalingRun> runs;
    std::vector<double> median_i1;  // per width, diverged runs excluded
    std::vector<double> median_i2;
    double slope_i1 = 0.0;  // d log(median max ||I1||) / d log m
    double slope_i2 = 0.0;
    int excluded = 0;
};

ScalingStudyResult residual_scaling_study(const pde::PdeProblem& problem,
                                          const sampler::SampleSet& samples,
                                          act::ActivationKind kind, double eta,
                                          const std::vector<int>& widths, int seeds, int iters,
                                          const optim::LbfgsOptions& opts, Rng& rng,
                                          model::InitScale scale = model::InitScale::Unit,
                                          bool bias_augmented = true, int panels = 32,
                                          double boundary_weight = 1.0);

/// Two-coordinate quadratic model with closed-form explicit and implicit
/// updates; per-step loss decay ratios, overall and per coordinate.
struct ToyState {
    double theta1 = 0.0;
    double theta2 = 0.0;
    double k1 = 1.0;
    double k2 = 1.0;
    double theta1_star = 0.0;
    double theta2_star = 0.0;
};

struct ToyStep {
    int step = 0;
    double ratio_total = 0.0;  // L(k+1)/L(k)
    double ratio1 = 0.0;       // per-coordinate loss ratios
    double ratio2 = 0.0;
    double loss = 0.0;
    bool converged = false;  // loss reached zero; ratios are NaN from here on
};

std::vector<ToyStep> quadratic_toy(ToyState state, double eta, int steps, optim::StepMode mode);

}  // namespace pinn::diag
