#include "pinn/optim.hpp"

#include <chrono>
#include <cmath>
#include <deque>
#include <limits>

#include "pinn/diagnostics.hpp"
#include "pinn/errors.hpp"

namespace pinn::optim {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void validate(const LbfgsOptions& o) {
    if (o.memory < 1) throw InvalidInput("lbfgs: memory >= 1 required");
    if (o.max_iters < 1) throw InvalidInput("lbfgs: max_iters >= 1 required");
    if (!(o.wolfe_c1 > 0.0 && o.wolfe_c1 < o.wolfe_c2 && o.wolfe_c2 < 1.0))
        throw InvalidInput("lbfgs: need 0 < wolfe_c1 < wolfe_c2 < 1");
    if (o.max_line_search < 1) throw InvalidInput("lbfgs: max_line_search >= 1 required");
}

// Minimizer of the cubic Hermite interpolant through (a, fa, da), (b, fb, db).
double cubic_minimizer(double a, double fa, double da, double b, double fb, double db) {
    const double d1 = da + db - 3.0 * (fa - fb) / (a - b);
    const double disc = d1 * d1 - da * db;
    if (!(disc >= 0.0)) return 0.5 * (a + b);
    const double d2 = std::sqrt(disc) * (b > a ? 1.0 : -1.0);
    const double denom = db - da + 2.0 * d2;
    if (denom == 0.0) return 0.5 * (a + b);
    const double t = b - (b - a) * (db + d2 - d1) / denom;
    return t;
}

}  // namespace

std::pair<Vec, LbfgsStats> lbfgs_minimize(const Objective& objective, Vec x0,
                                          const LbfgsOptions& opts) {
    validate(opts);
    const Eigen::Index n = x0.size();
    if (!x0.allFinite()) throw NumericalFailure("lbfgs: non-finite start point");

    Vec x = std::move(x0);
    Vec g(n);
    double f = objective(x, g);
    if (!std::isfinite(f) || !g.allFinite())
        throw NumericalFailure("lbfgs: non-finite objective at start point");

    LbfgsStats stats;
    stats.evaluations = 1;

    struct Pair {
        Vec s, y;
        double rho;
    };
    std::deque<Pair> history;

    Vec best_x = x;
    double best_f = f;

    Vec q(n), d(n), xt(n), gt(n);
    for (int iter = 0; iter < opts.max_iters; ++iter) {
        stats.grad_norm = g.norm();
        if (stats.grad_norm <= opts.grad_tol) {
            stats.converged = true;
            stats.iterations = iter;
            return {x, stats};
        }

        // Two-loop recursion; a failed line search falls back to steepest
        // descent with a fresh budget before giving up.
        bool retried = false;
    retry:
        q = g;
        std::vector<double> alpha(history.size());
        for (std::size_t i = history.size(); i-- > 0;) {
            alpha[i] = history[i].rho * history[i].s.dot(q);
            q -= alpha[i] * history[i].y;
        }
        if (!history.empty()) {
            const auto& last = history.back();
            q *= last.s.dot(last.y) / last.y.squaredNorm();
        }
        for (std::size_t i = 0; i < history.size(); ++i) {
            const double beta = history[i].rho * history[i].y.dot(q);
            q += (alpha[i] - beta) * history[i].s;
        }
        d = -q;
        double dg = d.dot(g);
        if (!(dg < 0.0) || !d.allFinite()) {  // not a descent direction: restart
            history.clear();
            d = -g;
            dg = -g.squaredNorm();
        }

        // Strong-Wolfe line search (bracket + zoom).
        const double f0 = f;
        const double dphi0 = dg;
        int ls_evals = 0;
        auto phi = [&](double t, double& dphi) {
            xt = x + t * d;
            double ft = objective(xt, gt);
            ++ls_evals;
            ++stats.evaluations;
            if (!std::isfinite(ft)) {
                dphi = std::numeric_limits<double>::infinity();
                return std::numeric_limits<double>::infinity();
            }
            dphi = gt.dot(d);
            if (ft < best_f) {
                best_f = ft;
                best_x = xt;
            }
            return ft;
        };

        double accepted = -1.0;
        double f_acc = f0;
        {
            // Once function-value differences fall below rounding noise the
            // Armijo test turns into coin flips; near the floor a point that
            // satisfies the curvature condition and does not increase f beyond
            // noise is accepted (approximate Wolfe).
            const double f_noise = 8.0 * std::numeric_limits<double>::epsilon() * std::abs(f0);
            auto acceptable = [&](double t, double ft, double dt) {
                if (!(std::abs(dt) <= -opts.wolfe_c2 * dphi0)) return false;
                return ft <= f0 + opts.wolfe_c1 * t * dphi0 || ft <= f0 + f_noise;
            };
            double a_prev = 0.0, f_prev = f0, d_prev = dphi0;
            double a = iter == 0 ? std::min(1.0, 1.0 / std::max(1e-12, g.norm())) : 1.0;
            double a_lo = -1.0, f_lo = 0.0, d_lo = 0.0;
            double a_hi = -1.0, f_hi = 0.0, d_hi = 0.0;
            bool zooming = false;
            while (ls_evals < opts.max_line_search) {
                if (!zooming) {
                    double da;
                    const double fa = phi(a, da);
                    if (acceptable(a, fa, da)) {
                        accepted = a; f_acc = fa;
                        break;
                    }
                    if (fa > f0 + opts.wolfe_c1 * a * dphi0 || (ls_evals > 1 && fa >= f_prev)) {
                        a_lo = a_prev; f_lo = f_prev; d_lo = d_prev;
                        a_hi = a; f_hi = fa; d_hi = da;
                        zooming = true;
                        continue;
                    }
                    if (da >= 0.0) {
                        a_lo = a; f_lo = fa; d_lo = da;
                        a_hi = a_prev; f_hi = f_prev; d_hi = d_prev;
                        zooming = true;
                        continue;
                    }
                    a_prev = a; f_prev = fa; d_prev = da;
                    a *= 2.0;
                    if (a > 1e12) break;
                } else {
                    const double width = a_hi - a_lo;
                    double aj = cubic_minimizer(a_lo, f_lo, d_lo, a_hi, f_hi, d_hi);
                    const double lo = std::min(a_lo, a_hi), hi = std::max(a_lo, a_hi);
                    if (!std::isfinite(aj) || aj <= lo + 0.05 * std::abs(width) ||
                        aj >= hi - 0.05 * std::abs(width))
                        aj = 0.5 * (a_lo + a_hi);
                    double dj;
                    const double fj = phi(aj, dj);
                    if (acceptable(aj, fj, dj)) {
                        accepted = aj; f_acc = fj;
                        break;
                    }
                    if (fj > f0 + opts.wolfe_c1 * aj * dphi0 || fj >= f_lo) {
                        a_hi = aj; f_hi = fj; d_hi = dj;
                    } else {
                        if (dj * (a_hi - a_lo) >= 0.0) {
                            a_hi = a_lo; f_hi = f_lo; d_hi = d_lo;
                        }
                        a_lo = aj; f_lo = fj; d_lo = dj;
                    }
                    if (std::abs(a_hi - a_lo) < 1e-16 * std::max(1.0, std::abs(a_lo))) break;
                }
            }
        }

        if (accepted < 0.0) {
            if (!retried && !history.empty()) {
                retried = true;
                history.clear();
                goto retry;
            }
            // Line search failed along steepest descent too: hand back the
            // best point seen.
            stats.iterations = iter;
            stats.converged = false;
            if (best_f < f) {
                Vec gb(n);
                const double fb = objective(best_x, gb);
                ++stats.evaluations;
                stats.grad_norm = gb.allFinite() ? gb.norm() : kNaN;
                (void)fb;
                return {best_x, stats};
            }
            stats.grad_norm = g.norm();
            return {x, stats};
        }

        // xt/gt hold the last evaluated trial point, which is the accepted one
        // (both loops break immediately after the accepting evaluation).
        Vec s = xt - x;
        Vec y = gt - g;
        x.swap(xt);
        g.swap(gt);
        f = f_acc;
        const double sy = s.dot(y);
        if (sy > 1e-10 * s.norm() * y.norm()) {
            history.push_back({std::move(s), std::move(y), 1.0 / sy});
            if (static_cast<int>(history.size()) > opts.memory) history.pop_front();
        }
        stats.iterations = iter + 1;
    }

    stats.grad_norm = g.norm();
    stats.converged = stats.grad_norm <= opts.grad_tol;
    return {x, stats};
}

model::Network gd_step(const model::Network& net, const pde::PdeProblem& problem,
                       const sampler::SampleSet& samples, double eta, double boundary_weight) {
    if (!(eta >= 0.0)) throw InvalidInput("gd_step: eta >= 0 required");
    const residual::ResidualEvaluator eval(problem, samples, net.bias_augmented, boundary_weight);
    Vec grad;
    eval.loss_and_grad(net, grad);
    if (!grad.allFinite()) throw NumericalFailure("gd_step: non-finite gradient");
    model::Network out = net;
    out.unflatten(out.flatten() - eta * grad);
    return out;
}

namespace {

// Proximal step against a prebuilt evaluator; shared by igd_step and train.
IgdStats igd_step_impl(model::Network& net, const residual::ResidualEvaluator& eval, double eta,
                       const LbfgsOptions& opts, double loss_before) {
    const Vec w0 = net.flatten();
    model::Network scratch = net;
    const Objective objective = [&](const Vec& v, Vec& grad) {
        scratch.unflatten(v);
        const double loss = eval.loss_and_grad(scratch, grad);
        grad = eta * grad + (v - w0);
        return 0.5 * (v - w0).squaredNorm() + eta * loss;
    };
    auto [w_next, lstats] = lbfgs_minimize(objective, w0, opts);

    IgdStats stats;
    stats.sub_iterations = lstats.iterations;
    stats.grad_norm = lstats.grad_norm;
    stats.converged = lstats.converged;
    stats.evaluations = lstats.evaluations;
    stats.step_norm = (w_next - w0).norm();
    stats.loss_before = loss_before;
    net.unflatten(w_next);
    stats.loss_after = eval.residuals(net).loss;
    stats.prox_slack = 0.5 * stats.step_norm * stats.step_norm -
                       eta * (stats.loss_before - stats.loss_after);
    return stats;
}

}  // namespace

std::pair<model::Network, IgdStats> igd_step(const model::Network& net,
                                             const pde::PdeProblem& problem,
                                             const sampler::SampleSet& samples, double eta,
                                             const LbfgsOptions& opts, double boundary_weight) {
    if (!(eta >= 0.0)) throw InvalidInput("igd_step: eta >= 0 required");
    const residual::ResidualEvaluator eval(problem, samples, net.bias_augmented, boundary_weight);
    model::Network out = net;
    IgdStats stats = igd_step_impl(out, eval, eta, opts, eval.residuals(net).loss);
    return {std::move(out), stats};
}

TrainRun train(const pde::PdeProblem& problem, const sampler::SampleSet& samples,
               const model::Network& net0, StepMode mode, double eta, int iters,
               const LbfgsOptions& opts, const DiagnosticsFlags& flags, double boundary_weight,
               const std::function<void(const TrainRecord&)>& on_record) {
    if (iters < 1) throw InvalidInput("train: iters >= 1 required");
    if (eta < 0.0) throw InvalidInput("train: eta >= 0 required");
    validate(opts);

    const residual::ResidualEvaluator eval(problem, samples, net0.bias_augmented, boundary_weight);

    TrainRun run;
    run.net = net0;
    const residual::ResidualSystem rs0 = eval.residuals(net0);
    run.loss0 = rs0.loss;
    run.loss0_interior = rs0.loss_interior;
    run.loss0_boundary = rs0.loss_boundary;
    run.lambda0_hat = kNaN;
    if (flags.record_gram_every >= 0)
        run.lambda0_hat = gram::min_eigenvalue(gram::gram(eval.jacobian(net0)));

    const Mat w_init = net0.w;
    model::Network prev = net0;
    double loss_prev = run.loss0;

    run.records.reserve(iters);
    for (int k = 1; k <= iters; ++k) {
        const auto t_start = std::chrono::steady_clock::now();
        TrainRecord rec;
        rec.iter = k;
        rec.lambda_min = kNaN;
        rec.i1_norm = kNaN;
        rec.i2_norm = kNaN;
        rec.prox_slack = kNaN;
        rec.wall_ms = 0.0;

        if (flags.record_residual_terms) prev = run.net;

        if (mode == StepMode::GD) {
            Vec grad;
            eval.loss_and_grad(run.net, grad);
            if (!grad.allFinite()) {
                run.status = TrainStatus::Diverged;
                rec.loss = kNaN;
                rec.loss_interior = kNaN;
                rec.loss_boundary = kNaN;
                rec.envelope = kNaN;
                rec.drift = kNaN;
                rec.max_w_norm = kNaN;
                run.records.push_back(rec);
                if (on_record) on_record(rec);
                break;
            }
            run.net.unflatten(run.net.flatten() - eta * grad);
            const residual::ResidualSystem rs = eval.residuals(run.net);
            rec.loss = rs.loss;
            rec.loss_interior = rs.loss_interior;
            rec.loss_boundary = rs.loss_boundary;
            rec.sub_iters = 0;
        } else {
            IgdStats st;
            if (eta == 0.0) {
                st.loss_before = st.loss_after = loss_prev;
                st.converged = true;
            } else {
                try {
                    st = igd_step_impl(run.net, eval, eta, opts, loss_prev);
                } catch (const NumericalFailure&) {
                    run.status = TrainStatus::SubsolverFailure;
                    ++run.subsolver_failures;
                    break;
                }
            }
            if (!st.converged) ++run.subsolver_failures;
            const residual::ResidualSystem rs = eval.residuals(run.net);
            rec.loss = rs.loss;
            rec.loss_interior = rs.loss_interior;
            rec.loss_boundary = rs.loss_boundary;
            rec.sub_iters = st.sub_iterations;
            rec.prox_slack = st.prox_slack;
        }

        const Mat diff = run.net.w - w_init;
        rec.drift = diff.rowwise().norm().maxCoeff();
        rec.max_w_norm = run.net.w.rowwise().norm().maxCoeff();
        rec.envelope = std::isnan(run.lambda0_hat)
                           ? kNaN
                           : run.loss0 / std::pow(1.0 + eta * run.lambda0_hat / 2.0, k);
        if (flags.record_gram_every > 0 && k % flags.record_gram_every == 0)
            rec.lambda_min = gram::min_eigenvalue(gram::gram(eval.jacobian(run.net)));
        if (flags.record_residual_terms && eta > 0.0) {
            const diag::ResidualTerms terms =
                mode == StepMode::IGD
                    ? diag::residual_terms(prev, run.net, eta, problem, samples, flags.panels,
                                           boundary_weight)
                    : diag::gd_residual_terms(prev, run.net, eta, problem, samples, flags.panels,
                                              boundary_weight);
            rec.i1_norm = terms.i1.norm();
            rec.i2_norm = terms.i2.norm();
        }
        if (flags.record_timing) {
            const auto t_end = std::chrono::steady_clock::now();
            rec.wall_ms = std::chrono::duration<double, std::milli>(t_end - t_start).count();
        }

        loss_prev = rec.loss;
        run.records.push_back(rec);
        if (on_record) on_record(rec);
        if (!std::isfinite(rec.loss) || rec.loss > 1e6 * std::max(run.loss0, 1e-300)) {
            run.status = TrainStatus::Diverged;
            break;
        }
    }
    return run;
}

double fitted_rate(const std::vector<double>& losses, double rel_floor) {
    if (losses.size() < 2) return 1.0;
    const double floor = rel_floor * std::max(losses.front(), 1e-300);
    // Least squares of log L on the iteration index over the pre-floor prefix.
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int count = 0;
    for (std::size_t k = 0; k < losses.size(); ++k) {
        if (!(losses[k] > 0.0) || !std::isfinite(losses[k])) break;
        if (k > 0 && losses[k] < floor) break;
        const double xk = static_cast<double>(k);
        const double yk = std::log(losses[k]);
        sx += xk; sy += yk; sxx += xk * xk; sxy += xk * yk;
        ++count;
    }
    if (count < 2) return 1.0;
    const double denom = count * sxx - sx * sx;
    if (denom == 0.0) return 1.0;
    return std::exp((count * sxy - sx * sy) / denom);
}

}  // namespace pinn::optim
