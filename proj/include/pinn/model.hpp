#pragma once

#include <cstdint>
#include <string>

#include "pinn/activation.hpp"
#include "pinn/pde.hpp"
#include "pinn/rng.hpp"
#include "pinn/types.hpp"

namespace pinn::model {

enum class InitScale { Unit, InvDim };

InitScale scale_from_string(const std::string& name);
std::string to_string(InitScale scale);

/// Two-layer model u(x) = (1/sqrt(m)) sum_r a_r sigma(w_r . x^), where x^ is
/// the input with a constant coordinate 1 appended when bias_augmented.
/// The signs a are frozen after initialization; only w trains.
struct Network {
    int m = 0;  // width
    int d = 0;  // spatial dimension; raw input dimension is d+1
    bool bias_augmented = false;
    act::ActivationKind kind = act::ActivationKind::Tanh;
    InitScale scale = InitScale::Unit;
    std::uint64_t seed = 0;
    Mat w;  // m x row_len
    Vec a;  // entries in {-1, +1}

    int input_dim() const { return d + 1; }
    int row_len() const { return d + 1 + (bias_augmented ? 1 : 0); }
    Eigen::Index param_count() const { return static_cast<Eigen::Index>(m) * row_len(); }

    /// Flattened parameters, neuron-major (row r occupies the r-th block).
    Vec flatten() const;
    void unflatten(const Vec& params);
};

/// Gaussian first layer (covariance I for Unit, I/row_len for InvDim) and
/// uniform signs; deterministic in the generator state.
Network init_network(int m, int d, act::ActivationKind kind, InitScale scale, Rng& rng,
                     bool bias_augmented = false);

/// Network value at a raw point of dimension d+1.
double forward(const Network& net, const Vec& x);

/// Network values at many points (rows of `points`, each of dimension d+1).
Vec forward_batch(const Network& net, const Mat& points);

/// A differential operator applied to the network at x, with the closed-form
/// gradient of that value w.r.t. each neuron's weights.
struct OperatorJet {
    double value = 0.0;
    Mat grad;  // m x row_len, row r = d(value)/d(w_r)
};

/// op has d+1 coordinates (bias coordinate, if any, carries no derivatives).
OperatorJet apply_operator(const Network& net, const pde::LinearOperator& op, const Vec& x);

/// Text serialization: a header line (m, d, kind, scale, seed, bias flag),
/// then the rows of w and the sign vector in CSV.
void save_network(const Network& net, const std::string& path);
Network load_network(const std::string& path);

}  // namespace pinn::model
