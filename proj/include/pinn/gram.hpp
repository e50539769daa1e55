#pragma once

#include "pinn/residual.hpp"

namespace pinn::gram {

/// Kernel matrix of the residual system: G = D^T D.
struct GramMatrix {
    Mat G;  // (n1+n2) x (n1+n2), symmetric PSD
};

/// Exact product, symmetrized as (G + G^T)/2.
GramMatrix gram(const residual::Jacobian& jac);

/// Smallest eigenvalue by the in-repo Jacobi eigensolver. Rejects matrices
/// that are not symmetric to relative 1e-10.
double min_eigenvalue(const GramMatrix& g);

/// Largest eigenvalue (used for step-size thresholds).
double max_eigenvalue(const GramMatrix& g);

/// Monte-Carlo estimate of the infinite-width kernel: the average of `reps`
/// independent initializations at width m_draw, with entrywise standard
/// errors (zero when reps == 1).
struct McEstimate {
    GramMatrix mean;
    Mat stderr_entries;
};
McEstimate gram_infinity_mc(const pde::PdeProblem& problem, const sampler::SampleSet& samples,
                            act::ActivationKind kind, model::InitScale scale, int m_draw, int reps,
                            Rng& rng, bool bias_augmented = true, double boundary_weight = 1.0);

/// Frobenius norm exactly; spectral norm via the eigensolver on the
/// symmetrized difference.
struct Deviation {
    double frobenius = 0.0;
    double spectral = 0.0;
};
Deviation gram_deviation(const GramMatrix& a, const GramMatrix& b);

}  // namespace pinn::gram
