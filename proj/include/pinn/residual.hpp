#pragma once

#include "pinn/model.hpp"
#include "pinn/pde.hpp"
#include "pinn/sampler.hpp"
#include "pinn/types.hpp"

namespace pinn::residual {

/// Interior and boundary residual vectors and the empirical loss
/// L = (1/2)(||s||^2 + ||h||^2).
struct ResidualSystem {
    Vec s;  // n1 entries, (Lu - f)/sqrt(n1) at interior points
    Vec h;  // n2 entries, sqrt(lambda)*(u - g)/sqrt(n2) at boundary points
    double loss = 0.0;
    double loss_interior = 0.0;
    double loss_boundary = 0.0;
};

/// Dense residual Jacobian: column i is the gradient of residual i w.r.t.
/// the flattened weights (interior columns first).
struct Jacobian {
    Mat D;  // (m * row_len) x (n1 + n2)
};

/// Precomputes everything sample-dependent so that repeated evaluations with
/// changing weights only pay for the weight-dependent work. All heavy paths
/// are tiled over samples and vectorized.
class ResidualEvaluator {
  public:
    ResidualEvaluator(const pde::PdeProblem& problem, const sampler::SampleSet& samples,
                      bool bias_augmented, double boundary_weight = 1.0);

    ResidualSystem residuals(const model::Network& net) const;

    /// Loss and gradient w.r.t. flattened weights; optionally exposes the
    /// residual system of the same evaluation.
    double loss_and_grad(const model::Network& net, Vec& grad, ResidualSystem* rs = nullptr) const;

    /// <d residual_i/dw, v> for every residual, v in flattened layout.
    Vec jacobian_vec_product(const model::Network& net, const Vec& v) const;

    Jacobian jacobian(const model::Network& net) const;

    Eigen::Index n1() const { return xi_.rows(); }
    Eigen::Index n2() const { return xb_.rows(); }
    double boundary_weight() const { return lambda_; }

  private:
    void check(const model::Network& net) const;

    Mat xi_;  // n1 x p, normalized interior points (+ constant coordinate)
    Mat xb_;  // n2 x p
    Vec f_;   // forcing at physical interior points
    Vec g_;   // boundary data at physical boundary points
    double c0_ = 0.0;
    Vec b_;  // network-operator coefficients, zero on the bias coordinate
    Vec A_;
    double lambda_ = 1.0;
    bool augmented_ = false;
    int dim_ = 0;  // raw input dimension d+1
};

/// One-shot wrappers over ResidualEvaluator.
ResidualSystem residuals(const model::Network& net, const pde::PdeProblem& problem,
                         const sampler::SampleSet& samples, double boundary_weight = 1.0);
Jacobian jacobian(const model::Network& net, const pde::PdeProblem& problem,
                  const sampler::SampleSet& samples, double boundary_weight = 1.0);
Vec loss_grad(const model::Network& net, const pde::PdeProblem& problem,
              const sampler::SampleSet& samples, double boundary_weight = 1.0);

/// Residual vectors and loss in CSV (index, kind, value).
void write_residuals_csv(const ResidualSystem& rs, const std::string& path);

}  // namespace pinn::residual
