#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pinn/activation.hpp"
#include "pinn/model.hpp"
#include "pinn/optim.hpp"

namespace pinn::cfg {

/// One manufactured-solution term: coef * prod_i sin(omega_i pi x_i + phase_i).
struct TermSpec {
    double coef = 0.0;
    std::vector<double> omega;
    std::vector<double> phase;  // empty means all zero
    bool operator==(const TermSpec&) const = default;
};

/// Flat key=value experiment configuration with dotted sections. Every field
/// has a documented default; unknown keys are rejected.
struct Config {
    std::string problem = "heat";  // heat | helmholtz
    int heat_d = 1;
    double heat_T = 1.0;
    double helmholtz_k = 4.0;

    bool exact_given = false;  // when false, the problem preset default is used
    std::vector<TermSpec> exact_terms;

    int n1 = 50;
    int n2 = 20;

    int m = 512;
    std::string activation = "tanh";   // tanh | logistic | softplus
    std::string init_scale = "unit";   // unit | invdim
    bool bias_augmented = true;

    std::string mode = "igd";  // igd | gd
    double eta = 1.0;
    int iters = 100;

    std::uint64_t seed = 0;
    int workers = 1;
    double boundary_weight = 1.0;

    optim::LbfgsOptions lbfgs;

    int record_gram_every = 0;  // -1 never, 0 initial only, N > 0 every N
    bool record_residual_terms = false;
    int panels = 32;
    bool record_timing = false;

    int grid_n = 101;

    std::vector<int> gram_widths = {256, 1024, 4096};
    int gram_seeds = 10;
    int gram_m_draw = 16384;
    int gram_reps = 32;

    std::vector<int> scaling_widths = {128, 512, 2048, 8192};
    int scaling_seeds = 5;
    int scaling_iters = 20;

    double toy_k1 = 1e-4;
    double toy_k2 = 1e4;
    double toy_eta = 1e-4;
    int toy_steps = 10;
    double toy_theta1 = 0.0;
    double toy_theta2 = 0.0;
    double toy_theta1_star = 1.0;
    double toy_theta2_star = 1.0;

    bool operator==(const Config&) const = default;
};

/// Parses and fully validates; throws ConfigError naming the key on unknown
/// keys, type mismatches and range violations.
Config parse_config(const std::string& text);

Config load_config_file(const std::string& path);

/// Every key, defaults included, in a fixed order; round-trips through
/// parse_config to an equal Config.
std::string serialize_config(const Config& config);

}  // namespace pinn::cfg
