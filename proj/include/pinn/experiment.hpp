#pragma once

#include <string>

#include "pinn/config.hpp"
#include "pinn/errors.hpp"
#include "pinn/diagnostics.hpp"

namespace pinn::exp {

/// Process exit codes; stable interface, documented in the README.
enum ExitCode : int {
    kOk = 0,
    kInternalError = 1,
    kConfigError = 2,
    kDiverged = 3,
    kSubsolverFailure = 4,
    kSamplingFailure = 5,
};

/// Regular evaluation grid over the physical domain with model predictions
/// and exact values (NaN when the problem has no exact solution).
struct EvalGrid {
    Mat points;  // N x dim, physical coordinates
    Vec pred;
    Vec exact;
};

/// sqrt( sum (pred - exact)^2 / sum exact^2 ); rejects an identically-zero
/// exact field.
double relative_l2(const Vec& pred, const Vec& exact);

pde::PdeProblem build_problem(const cfg::Config& config);
sampler::SampleSet build_samples(const pde::PdeProblem& problem, const cfg::Config& config);
model::Network build_network(const pde::PdeProblem& problem, const cfg::Config& config);
EvalGrid evaluate_grid(const pde::PdeProblem& problem, const model::Network& net, int grid_n,
                       int workers);

/// Runs one subcommand (train | toy | gram-study | scaling-study | gradcheck |
/// helmholtz), writing artifacts into out_dir. Returns an ExitCode; never
/// throws for config/runtime conditions covered by the exit-code contract.
int run_experiment(const cfg::Config& config, const std::string& subcommand,
                   const std::string& out_dir);

}  // namespace pinn::exp
