#include "pinn/activation.hpp"

#include <cmath>

#include "pinn/errors.hpp"

namespace pinn::act {

ActivationKind kind_from_string(const std::string& name) {
    if (name == "tanh") return ActivationKind::Tanh;
    if (name == "logistic") return ActivationKind::Logistic;
    if (name == "softplus") return ActivationKind::Softplus;
    throw InvalidInput("unknown activation: " + name);
}

std::string to_string(ActivationKind kind) {
    switch (kind) {
        case ActivationKind::Tanh: return "tanh";
        case ActivationKind::Logistic: return "logistic";
        case ActivationKind::Softplus: return "softplus";
    }
    throw InvalidInput("bad activation kind");
}

namespace {

// Overflow-safe logistic; exact limits at +-inf of z.
inline double logistic(double z) {
    if (z >= 0.0) {
        return 1.0 / (1.0 + std::exp(-z));
    }
    const double e = std::exp(z);
    return e / (1.0 + e);
}

inline Jet4 tanh_jet(double z) {
    const double t = std::tanh(z);
    const double d = 1.0 - t * t;  // sech^2
    Jet4 j;
    j.v0 = t;
    j.v1 = d;
    j.v2 = -2.0 * t * d;
    j.v3 = -2.0 * d * (1.0 - 3.0 * t * t);
    return j;
}

inline Jet4 logistic_jet(double z) {
    const double s = logistic(z);
    const double d = s * (1.0 - s);
    Jet4 j;
    j.v0 = s;
    j.v1 = d;
    j.v2 = d * (1.0 - 2.0 * s);
    j.v3 = d * (1.0 - 6.0 * s + 6.0 * s * s);
    return j;
}

inline Jet4 softplus_jet(double z) {
    // softplus(z) = max(z,0) + log1p(exp(-|z|)); stable for |z| up to ~700.
    const double s = logistic(z);
    const double d = s * (1.0 - s);
    Jet4 j;
    j.v0 = (z > 0.0 ? z : 0.0) + std::log1p(std::exp(-std::abs(z)));
    j.v1 = s;
    j.v2 = d;
    j.v3 = d * (1.0 - 2.0 * s);
    return j;
}

}  // namespace

Jet4 eval_jet(ActivationKind kind, double z) {
    if (!std::isfinite(z)) throw InvalidInput("eval_jet: non-finite input");
    switch (kind) {
        case ActivationKind::Tanh: return tanh_jet(z);
        case ActivationKind::Logistic: return logistic_jet(z);
        case ActivationKind::Softplus: return softplus_jet(z);
    }
    throw InvalidInput("bad activation kind");
}

void eval_jets(ActivationKind kind, const Mat& z, Mat& j0, Mat& j1, Mat& j2, Mat& j3) {
    const auto rows = z.rows();
    const auto cols = z.cols();
    j0.resize(rows, cols);
    j1.resize(rows, cols);
    j2.resize(rows, cols);
    j3.resize(rows, cols);
    auto Z = z.array();

    switch (kind) {
        case ActivationKind::Tanh: {
            // u = 1 - tanh(z) = 2/(exp(2z)+1); saturates cleanly at the range ends.
            j0.array() = 2.0 / ((2.0 * Z).exp() + 1.0);             // u
            j1.array() = j0.array() * (2.0 - j0.array());           // (1-t)(1+t)
            j0.array() = 1.0 - j0.array();                          // t
            j2.array() = -2.0 * j0.array() * j1.array();
            j3.array() = -2.0 * j1.array() * (1.0 - 3.0 * j0.array().square());
            break;
        }
        case ActivationKind::Logistic: {
            j0.array() = 1.0 / (1.0 + (-Z).exp());
            j1.array() = j0.array() * (1.0 - j0.array());
            j2.array() = j1.array() * (1.0 - 2.0 * j0.array());
            j3.array() = j1.array() * (1.0 - 6.0 * j0.array() + 6.0 * j0.array().square());
            break;
        }
        case ActivationKind::Softplus: {
            Eigen::ArrayXXd e = (-Z.abs()).exp();
            j0.array() = Z.max(0.0) + (1.0 + e).log();
            j1.array() = (Z >= 0.0).select(1.0 / (1.0 + e), e / (1.0 + e));
            j2.array() = j1.array() * (1.0 - j1.array());
            j3.array() = j2.array() * (1.0 - 2.0 * j1.array());
            break;
        }
    }
}

LipschitzReport check_lipschitz(ActivationKind kind, double zmin, double zmax, long steps) {
    if (!(zmin < zmax)) throw InvalidInput("check_lipschitz: need zmin < zmax");
    if (steps < 2) throw InvalidInput("check_lipschitz: need steps >= 2");

    LipschitzReport rep;
    const double dz = (zmax - zmin) / static_cast<double>(steps - 1);
    Jet4 prev = eval_jet(kind, zmin);
    rep.max_abs_v3 = std::abs(prev.v3);
    for (long i = 1; i < steps; ++i) {
        const double zi = zmin + dz * static_cast<double>(i);
        const Jet4 cur = eval_jet(kind, zi);
        const double inv = 1.0 / dz;
        rep.lipschitz[0] = std::max(rep.lipschitz[0], std::abs(cur.v0 - prev.v0) * inv);
        rep.lipschitz[1] = std::max(rep.lipschitz[1], std::abs(cur.v1 - prev.v1) * inv);
        rep.lipschitz[2] = std::max(rep.lipschitz[2], std::abs(cur.v2 - prev.v2) * inv);
        rep.lipschitz[3] = std::max(rep.lipschitz[3], std::abs(cur.v3 - prev.v3) * inv);
        rep.max_abs_v3 = std::max(rep.max_abs_v3, std::abs(cur.v3));
        prev = cur;
    }
    return rep;
}

}  // namespace pinn::act
