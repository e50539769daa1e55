#pragma once

#include <functional>
#include <utility>
#include <vector>

#include "pinn/gram.hpp"
#include "pinn/residual.hpp"

namespace pinn::optim {

struct LbfgsOptions {
    int memory = 10;
    int max_iters = 100;
    double grad_tol = 1e-8;
    double wolfe_c1 = 1e-4;
    double wolfe_c2 = 0.9;
    int max_line_search = 40;

    bool operator==(const LbfgsOptions&) const = default;
};

struct LbfgsStats {
    int iterations = 0;
    double grad_norm = 0.0;
    bool converged = false;
    int evaluations = 0;
};

/// Objective callback: returns the value and fills the gradient.
using Objective = std::function<double(const Vec&, Vec&)>;

/// Limited-memory BFGS (two-loop recursion) with a strong-Wolfe line search.
/// Stops when ||grad|| <= grad_tol or after max_iters iterations. A failed
/// line search returns the best iterate found with converged = false; a
/// non-finite objective at the start raises NumericalFailure.
std::pair<Vec, LbfgsStats> lbfgs_minimize(const Objective& objective, Vec x0,
                                          const LbfgsOptions& opts);

/// One explicit gradient step on the first layer: w <- w - eta * grad L(w).
model::Network gd_step(const model::Network& net, const pde::PdeProblem& problem,
                       const sampler::SampleSet& samples, double eta,
                       double boundary_weight = 1.0);

struct IgdStats {
    int sub_iterations = 0;
    double grad_norm = 0.0;  // final proximal-gradient norm (implicit optimality residual)
    bool converged = false;
    int evaluations = 0;
    double step_norm = 0.0;   // ||w(k+1) - w(k)||
    double prox_slack = 0.0;  // (1/2)||dw||^2 - eta*(L(k) - L(k+1)), <= 0 up to tolerance
    double loss_before = 0.0;
    double loss_after = 0.0;
};

/// One implicit step: minimizes (1/2)||w - w(k)||^2 + eta*L(w) from the warm
/// start w(k). The returned iterate satisfies
/// ||(w(k+1) - w(k)) + eta*grad L(w(k+1))|| <= grad_tol when converged.
std::pair<model::Network, IgdStats> igd_step(const model::Network& net,
                                             const pde::PdeProblem& problem,
                                             const sampler::SampleSet& samples, double eta,
                                             const LbfgsOptions& opts,
                                             double boundary_weight = 1.0);

enum class StepMode { GD, IGD };
enum class TrainStatus { Ok, Diverged, SubsolverFailure };

struct DiagnosticsFlags {
    int record_gram_every = 0;  // -1 never, 0 initial only, N > 0 every N iterations
    bool record_residual_terms = false;
    int panels = 32;
    bool record_timing = false;
};

/// Per-iteration diagnostics. Fields that were not recorded are NaN.
struct TrainRecord {
    int iter = 0;
    double loss = 0.0;
    double loss_interior = 0.0;
    double loss_boundary = 0.0;
    double lambda_min = 0.0;  // of G(k), when recorded
    double envelope = 0.0;    // (1 + eta*lambda0_hat/2)^(-k) * L(0)
    double drift = 0.0;       // max_r ||w_r(k) - w_r(0)||
    double max_w_norm = 0.0;  // max_r ||w_r(k)||
    double i1_norm = 0.0;
    double i2_norm = 0.0;
    int sub_iters = 0;
    double prox_slack = 0.0;
    double wall_ms = 0.0;
};

struct TrainRun {
    std::vector<TrainRecord> records;
    TrainStatus status = TrainStatus::Ok;
    double loss0 = 0.0;
    double loss0_interior = 0.0;
    double loss0_boundary = 0.0;
    double lambda0_hat = 0.0;  // lambda_min(G(0)); NaN when gram recording is off
    int subsolver_failures = 0;
    model::Network net;  // final iterate
};

/// Runs the selected stepper for `iters` iterations with per-iteration
/// instrumentation. Aborts with Diverged status once loss exceeds 1e6*L(0).
/// `on_record`, when set, streams each record as it is produced.
TrainRun train(const pde::PdeProblem& problem, const sampler::SampleSet& samples,
               const model::Network& net0, StepMode mode, double eta, int iters,
               const LbfgsOptions& opts, const DiagnosticsFlags& flags = {},
               double boundary_weight = 1.0,
               const std::function<void(const TrainRecord&)>& on_record = {});

/// Least-squares geometric rate of a loss sequence (slope of log L(k)),
/// fitted over the prefix where the loss stays above a floor relative to
/// L(0). Returns 1.0 for constant-or-empty sequences.
double fitted_rate(const std::vector<double>& losses, double rel_floor = 1e-16);

}  // namespace pinn::optim
