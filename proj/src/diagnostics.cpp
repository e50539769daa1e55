#include "pinn/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "pinn/errors.hpp"
#include "pinn/linalg.hpp"

namespace pinn::diag {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void check_pair(const model::Network& a, const model::Network& b) {
    if (a.m != b.m || a.d != b.d || a.bias_augmented != b.bias_augmented)
        throw InvalidInput("diagnostics: network shapes do not match");
}

// Simpson quadrature of alpha -> D(base + sign*alpha*gL)^T gL - D(base)^T gL
// over [0, eta].
ResidualTerms term_integrals(const model::Network& base, double eta,
                             const pde::PdeProblem& problem, const sampler::SampleSet& samples,
                             int panels, double sign, double boundary_weight) {
    const Eigen::Index n1 = samples.n1();
    const Eigen::Index n2 = samples.n2();
    ResidualTerms out;
    out.i1 = Vec::Zero(n1);
    out.i2 = Vec::Zero(n2);
    if (eta == 0.0) return out;
    if (panels < 2 || panels % 2 != 0)
        throw InvalidInput("residual_terms: panels must be even and >= 2");

    const residual::ResidualEvaluator eval(problem, samples, base.bias_augmented, boundary_weight);
    Vec grad_l;
    eval.loss_and_grad(base, grad_l);
    const Vec base_products = eval.jacobian_vec_product(base, grad_l);

    const Vec w0 = base.flatten();
    model::Network scratch = base;
    const double h = eta / panels;
    Vec acc = Vec::Zero(n1 + n2);
    for (int node = 0; node <= panels; ++node) {
        const double weight = (node == 0 || node == panels) ? 1.0 : (node % 2 == 1 ? 4.0 : 2.0);
        if (node == 0) continue;  // integrand vanishes at alpha = 0
        const double alpha = h * node;
        scratch.unflatten(w0 + (sign * alpha) * grad_l);
        acc += weight * (eval.jacobian_vec_product(scratch, grad_l) - base_products);
    }
    acc *= h / 3.0;
    out.i1 = acc.head(n1);
    out.i2 = acc.tail(n2);
    return out;
}

Vec stack(const residual::ResidualSystem& rs) {
    Vec v(rs.s.size() + rs.h.size());
    v.head(rs.s.size()) = rs.s;
    v.tail(rs.h.size()) = rs.h;
    return v;
}

}  // namespace

ResidualTerms residual_terms(const model::Network& net_k, const model::Network& net_k1, double eta,
                             const pde::PdeProblem& problem, const sampler::SampleSet& samples,
                             int panels, double boundary_weight) {
    check_pair(net_k, net_k1);
    return term_integrals(net_k1, eta, problem, samples, panels, +1.0, boundary_weight);
}

ResidualTerms gd_residual_terms(const model::Network& net_k, const model::Network& net_k1,
                                double eta, const pde::PdeProblem& problem,
                                const sampler::SampleSet& samples, int panels,
                                double boundary_weight) {
    check_pair(net_k, net_k1);
    return term_integrals(net_k, eta, problem, samples, panels, -1.0, boundary_weight);
}

RecursionReport verify_recursion(const model::Network& net_k, const model::Network& net_k1,
                                 double eta, const pde::PdeProblem& problem,
                                 const sampler::SampleSet& samples, int panels,
                                 double boundary_weight) {
    check_pair(net_k, net_k1);
    const residual::ResidualEvaluator eval(problem, samples, net_k.bias_augmented, boundary_weight);
    const Vec stack_k = stack(eval.residuals(net_k));
    const Vec stack_k1 = stack(eval.residuals(net_k1));

    const ResidualTerms terms =
        term_integrals(net_k1, eta, problem, samples, panels, +1.0, boundary_weight);
    Vec rhs = stack_k;
    rhs.head(terms.i1.size()) -= terms.i1;
    rhs.tail(terms.i2.size()) -= terms.i2;

    const gram::GramMatrix g = gram::gram(eval.jacobian(net_k1));
    Mat lhs = eta * g.G;
    lhs.diagonal().array() += 1.0;
    const Vec predicted = linalg::cholesky_solve(lhs, rhs);

    RecursionReport rep;
    rep.defect = (stack_k1 - predicted).norm();
    rep.i1_norm = terms.i1.norm();
    rep.i2_norm = terms.i2.norm();
    rep.quadrature_panels = panels;
    return rep;
}

double gd_recursion_defect(const model::Network& net_k, const model::Network& net_k1, double eta,
                           const pde::PdeProblem& problem, const sampler::SampleSet& samples,
                           int panels, double boundary_weight) {
    check_pair(net_k, net_k1);
    const residual::ResidualEvaluator eval(problem, samples, net_k.bias_augmented, boundary_weight);
    const Vec stack_k = stack(eval.residuals(net_k));
    const Vec stack_k1 = stack(eval.residuals(net_k1));

    const ResidualTerms chi =
        term_integrals(net_k, eta, problem, samples, panels, -1.0, boundary_weight);
    const gram::GramMatrix g = gram::gram(eval.jacobian(net_k));
    Vec predicted = stack_k - eta * (g.G * stack_k);
    predicted.head(chi.i1.size()) -= chi.i1;
    predicted.tail(chi.i2.size()) -= chi.i2;
    return (stack_k1 - predicted).norm();
}

DriftReport weight_drift(const model::Network& net_k, const model::Network& net0) {
    check_pair(net_k, net0);
    const Vec row_drift = (net_k.w - net0.w).rowwise().norm();
    DriftReport rep;
    rep.max_drift = row_drift.maxCoeff();
    rep.mean_drift = row_drift.mean();
    rep.max_norm = net_k.w.rowwise().norm().maxCoeff();
    return rep;
}

ScalingStudyResult residual_scaling_study(const pde::PdeProblem& problem,
                                          const sampler::SampleSet& samples,
                                          act::ActivationKind kind, double eta,
                                          const std::vector<int>& widths, int seeds, int iters,
                                          const optim::LbfgsOptions& opts, Rng& rng,
                                          model::InitScale scale, bool bias_augmented, int panels,
                                          double boundary_weight) {
    if (widths.size() < 2) throw InvalidInput("residual_scaling_study: at least two widths required");
    if (seeds < 1 || iters < 1) throw InvalidInput("residual_scaling_study: seeds, iters >= 1");

    optim::DiagnosticsFlags flags;
    flags.record_gram_every = -1;
    flags.record_residual_terms = true;
    flags.panels = panels;

    ScalingStudyResult result;
    const int d = static_cast<int>(problem.dim()) - 1;
    for (std::size_t wi = 0; wi < widths.size(); ++wi) {
        std::vector<double> max_i1s, max_i2s;
        for (int s = 0; s < seeds; ++s) {
            Rng run_rng = rng.split(wi * 1000003ULL + static_cast<std::uint64_t>(s));
            const model::Network net0 =
                model::init_network(widths[wi], d, kind, scale, run_rng, bias_augmented);
            const optim::TrainRun run = optim::train(problem, samples, net0, optim::StepMode::IGD,
                                                     eta, iters, opts, flags, boundary_weight);
            ScalingRun row;
            row.width = widths[wi];
            row.seed_index = s;
            row.diverged = run.status == optim::TrainStatus::Diverged;
            for (const auto& rec : run.records) {
                row.max_i1 = std::max(row.max_i1, rec.i1_norm);
                row.max_i2 = std::max(row.max_i2, rec.i2_norm);
            }
            result.runs.push_back(row);
            if (row.diverged) {
                ++result.excluded;
            } else {
                max_i1s.push_back(row.max_i1);
                max_i2s.push_back(row.max_i2);
            }
        }
        auto median = [](std::vector<double> v) {
            if (v.empty()) return kNaN;
            std::sort(v.begin(), v.end());
            const std::size_t n = v.size();
            return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
        };
        result.median_i1.push_back(median(max_i1s));
        result.median_i2.push_back(median(max_i2s));
    }

    auto slope = [&](const std::vector<double>& medians) {
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        int count = 0;
        for (std::size_t i = 0; i < widths.size(); ++i) {
            if (!(medians[i] > 0.0) || std::isnan(medians[i])) continue;
            const double x = std::log(static_cast<double>(widths[i]));
            const double y = std::log(medians[i]);
            sx += x; sy += y; sxx += x * x; sxy += x * y;
            ++count;
        }
        if (count < 2) return kNaN;
        return (count * sxy - sx * sy) / (count * sxx - sx * sx);
    };
    result.slope_i1 = slope(result.median_i1);
    result.slope_i2 = slope(result.median_i2);
    return result;
}

std::vector<ToyStep> quadratic_toy(ToyState state, double eta, int steps, optim::StepMode mode) {
    if (!(state.k1 > 0.0) || !(state.k2 > 0.0)) throw InvalidInput("quadratic_toy: K1, K2 > 0 required");
    if (steps < 1) throw InvalidInput("quadratic_toy: steps >= 1 required");

    auto coord_loss = [](double k, double theta, double target) {
        const double e = theta - target;
        return 0.5 * k * e * e;
    };
    std::vector<ToyStep> out;
    out.reserve(steps);
    double l1 = coord_loss(state.k1, state.theta1, state.theta1_star);
    double l2 = coord_loss(state.k2, state.theta2, state.theta2_star);
    for (int k = 1; k <= steps; ++k) {
        if (mode == optim::StepMode::GD) {
            state.theta1 -= eta * state.k1 * (state.theta1 - state.theta1_star);
            state.theta2 -= eta * state.k2 * (state.theta2 - state.theta2_star);
        } else {
            state.theta1 = (state.theta1 + eta * state.k1 * state.theta1_star) / (1.0 + eta * state.k1);
            state.theta2 = (state.theta2 + eta * state.k2 * state.theta2_star) / (1.0 + eta * state.k2);
        }
        const double n1 = coord_loss(state.k1, state.theta1, state.theta1_star);
        const double n2 = coord_loss(state.k2, state.theta2, state.theta2_star);
        ToyStep step;
        step.step = k;
        step.loss = n1 + n2;
        step.converged = (l1 + l2) == 0.0;
        step.ratio_total = step.converged ? kNaN : (n1 + n2) / (l1 + l2);
        step.ratio1 = l1 == 0.0 ? kNaN : n1 / l1;
        step.ratio2 = l2 == 0.0 ? kNaN : n2 / l2;
        out.push_back(step);
        l1 = n1;
        l2 = n2;
    }
    return out;
}

}  // namespace pinn::diag
