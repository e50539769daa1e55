#include "pinn/experiment.hpp"

#include <cmath>
#include <cstdio>
#include <algorithm>
#include <filesystem>
#include <limits>
#include <numbers>
#include <sstream>
#include <thread>
#include <vector>

#include "pinn/errors.hpp"

namespace pinn::exp {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct File {
    std::FILE* f = nullptr;
    explicit File(const std::string& path) : f(std::fopen(path.c_str(), "w")) {
        if (!f) throw InvalidInput("cannot open for writing: " + path);
    }
    ~File() {
        if (f) std::fclose(f);
    }
    File(const File&) = delete;
    File& operator=(const File&) = delete;
};

void kv(File& out, const char* key, const std::string& value) {
    std::fprintf(out.f, "%s = %s\n", key, value.c_str());
}
void kv(File& out, const char* key, double value) {
    std::fprintf(out.f, "%s = %.17g\n", key, value);
}
void kv(File& out, const char* key, long long value) {
    std::fprintf(out.f, "%s = %lld\n", key, value);
}

std::string status_name(optim::TrainStatus s) {
    switch (s) {
        case optim::TrainStatus::Ok: return "ok";
        case optim::TrainStatus::Diverged: return "diverged";
        case optim::TrainStatus::SubsolverFailure: return "subsolver_failure";
    }
    return "unknown";
}

}  // namespace

double relative_l2(const Vec& pred, const Vec& exact) {
    if (pred.size() != exact.size()) throw InvalidInput("relative_l2: shape mismatch");
    const double denom = exact.squaredNorm();
    if (denom == 0.0) throw InvalidInput("relative_l2: exact field is identically zero");
    return std::sqrt((pred - exact).squaredNorm() / denom);
}

pde::PdeProblem build_problem(const cfg::Config& c) {
    const std::size_t dims = c.problem == "helmholtz" ? 2 : static_cast<std::size_t>(c.heat_d) + 1;
    pde::SolutionSpec exact;
    if (c.exact_given) {
        for (const auto& t : c.exact_terms) {
            if (t.omega.size() != dims)
                throw ConfigError("exact.terms", "term frequency count must match the problem dimension");
            pde::SolutionSpec::Term term;
            term.coef = t.coef;
            term.omega = Eigen::Map<const Vec>(t.omega.data(), t.omega.size());
            term.phase = t.phase.empty()
                             ? Vec::Zero(dims)
                             : Vec(Eigen::Map<const Vec>(t.phase.data(), t.phase.size()));
            exact.terms.push_back(std::move(term));
        }
    } else {
        exact = c.problem == "helmholtz" ? pde::single_scale_solution()
                                         : pde::default_heat_solution(c.heat_d);
    }
    return c.problem == "helmholtz" ? pde::helmholtz_problem(c.helmholtz_k, std::move(exact))
                                    : pde::heat_problem(c.heat_d, c.heat_T, std::move(exact));
}

sampler::SampleSet build_samples(const pde::PdeProblem& problem, const cfg::Config& c) {
    Rng rng = make_rng(c.seed).split(1);
    return sampler::sample_problem_points(problem, c.n1, c.n2, rng, c.bias_augmented);
}

model::Network build_network(const pde::PdeProblem& problem, const cfg::Config& c) {
    Rng rng = make_rng(c.seed).split(2);
    return model::init_network(c.m, static_cast<int>(problem.dim()) - 1,
                               act::kind_from_string(c.activation),
                               model::scale_from_string(c.init_scale), rng, c.bias_augmented);
}

EvalGrid evaluate_grid(const pde::PdeProblem& problem, const model::Network& net, int grid_n,
                       int workers) {
    const Eigen::Index dim = problem.dim();
    double total = 1.0;
    for (Eigen::Index i = 0; i < dim; ++i) total *= grid_n;
    if (total > 4e6) throw ConfigError("grid.n", "grid too large for this dimension");
    const Eigen::Index n = static_cast<Eigen::Index>(total);

    EvalGrid grid;
    grid.points.resize(n, dim);
    for (Eigen::Index idx = 0; idx < n; ++idx) {
        Eigen::Index rem = idx;
        for (Eigen::Index ax = dim - 1; ax >= 0; --ax) {
            const Eigen::Index step = rem % grid_n;
            rem /= grid_n;
            grid.points(idx, ax) =
                problem.domain.lo(ax) +
                problem.domain.extent(ax) * static_cast<double>(step) / (grid_n - 1);
        }
    }

    grid.pred = model::forward_batch(net, grid.points / problem.scale);

    grid.exact.resize(n);
    auto exact_chunk = [&](Eigen::Index begin, Eigen::Index end) {
        for (Eigen::Index i = begin; i < end; ++i)
            grid.exact(i) = problem.has_exact()
                                ? problem.exact_value(grid.points.row(i).transpose())
                                : kNaN;
    };
    if (workers <= 1 || n < 4096) {
        exact_chunk(0, n);
    } else {
        std::vector<std::thread> pool;
        const Eigen::Index chunk = (n + workers - 1) / workers;
        for (int w = 0; w < workers; ++w) {
            const Eigen::Index b = std::min<Eigen::Index>(w * chunk, n);
            const Eigen::Index e = std::min<Eigen::Index>(b + chunk, n);
            if (b < e) pool.emplace_back(exact_chunk, b, e);
        }
        for (auto& t : pool) t.join();
    }
    return grid;
}

namespace {

void write_history_header(std::FILE* f) {
    std::fprintf(f,
                 "iter,loss,loss_interior,loss_boundary,lambda_min,envelope,drift,max_w_norm,"
                 "i1_norm,i2_norm,sub_iters,prox_slack,wall_ms\n");
}

void write_history_row(std::FILE* f, const optim::TrainRecord& r) {
    std::fprintf(f, "%d,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%d,%.17g,%.17g\n",
                 r.iter, r.loss, r.loss_interior, r.loss_boundary, r.lambda_min, r.envelope,
                 r.drift, r.max_w_norm, r.i1_norm, r.i2_norm, r.sub_iters, r.prox_slack, r.wall_ms);
}

void write_fields(const std::string& path, const EvalGrid& grid) {
    File out(path);
    for (Eigen::Index j = 0; j < grid.points.cols(); ++j)
        std::fprintf(out.f, "x%lld,", static_cast<long long>(j));
    std::fprintf(out.f, "pred,exact\n");
    for (Eigen::Index i = 0; i < grid.points.rows(); ++i) {
        for (Eigen::Index j = 0; j < grid.points.cols(); ++j)
            std::fprintf(out.f, "%.17g,", grid.points(i, j));
        std::fprintf(out.f, "%.17g,%.17g\n", grid.pred(i), grid.exact(i));
    }
}

void write_config_echo(const std::string& path, const cfg::Config& c) {
    File out(path);
    std::fputs(cfg::serialize_config(c).c_str(), out.f);
}

void echo_into_summary(File& out, const cfg::Config& c) {
    std::istringstream in(cfg::serialize_config(c));
    std::string line;
    while (std::getline(in, line)) std::fprintf(out.f, "config.%s\n", line.c_str());
}

int run_train_like(const cfg::Config& c, const std::string& out_dir, bool is_helmholtz) {
    cfg::Config cc = c;
    if (is_helmholtz) cc.problem = "helmholtz";
    const pde::PdeProblem problem = build_problem(cc);
    sampler::SampleSet samples;
    try {
        samples = build_samples(problem, cc);
    } catch (const SamplingFailure& e) {
        std::fprintf(stderr, "sampling failure: %s\n", e.what());
        return kSamplingFailure;
    }
    const model::Network net0 = build_network(problem, cc);

    optim::DiagnosticsFlags flags;
    flags.record_gram_every = cc.record_gram_every;
    flags.record_residual_terms = cc.record_residual_terms;
    flags.panels = cc.panels;
    flags.record_timing = cc.record_timing;

    const optim::StepMode mode = cc.mode == "gd" ? optim::StepMode::GD : optim::StepMode::IGD;
    optim::TrainRun run;
    {
        // Records stream into history.csv as they are produced.
        File history(out_dir + "/history.csv");
        write_history_header(history.f);
        run = optim::train(problem, samples, net0, mode, cc.eta, cc.iters, cc.lbfgs, flags,
                           cc.boundary_weight, [&](const optim::TrainRecord& rec) {
                               write_history_row(history.f, rec);
                               std::fflush(history.f);
                           });
    }
    samples.write_csv(out_dir + "/samples.csv");
    const residual::ResidualSystem rs_final =
        residual::residuals(run.net, problem, samples, cc.boundary_weight);
    residual::write_residuals_csv(rs_final, out_dir + "/residuals.csv");
    const EvalGrid grid = evaluate_grid(problem, run.net, cc.grid_n, cc.workers);
    write_fields(out_dir + "/fields.csv", grid);
    write_config_echo(out_dir + "/config.echo", cc);

    double rel = kNaN;
    if (problem.has_exact() && grid.exact.squaredNorm() > 0.0)
        rel = relative_l2(grid.pred, grid.exact);

    std::vector<double> losses{run.loss0};
    for (const auto& r : run.records) losses.push_back(r.loss);

    File out(out_dir + "/summary.txt");
    kv(out, "status", status_name(run.status));
    kv(out, "iters_run", static_cast<long long>(run.records.size()));
    kv(out, "loss_initial", run.loss0);
    kv(out, "loss_final", run.records.empty() ? run.loss0 : run.records.back().loss);
    kv(out, "lambda_min0", run.lambda0_hat);
    kv(out, "rate_fitted", optim::fitted_rate(losses));
    kv(out, "rate_envelope", std::isnan(run.lambda0_hat)
                                 ? kNaN
                                 : 1.0 / (1.0 + cc.eta * run.lambda0_hat / 2.0));
    kv(out, "drift_final", run.records.empty() ? 0.0 : run.records.back().drift);
    kv(out, "max_w_norm_final", run.records.empty() ? kNaN : run.records.back().max_w_norm);
    kv(out, "subsolver_failures", static_cast<long long>(run.subsolver_failures));
    kv(out, "rel_l2", rel);
    if (is_helmholtz) {
        kv(out, "architecture",
           "two-layer (single hidden layer), width " + std::to_string(cc.m) + ", " + cc.activation);
        kv(out, "architecture_note",
           std::string("wide single-hidden-layer model; deeper multilayer variants are out of scope"));
    }
    echo_into_summary(out, cc);

    switch (run.status) {
        case optim::TrainStatus::Ok: return kOk;
        case optim::TrainStatus::Diverged: return kDiverged;
        case optim::TrainStatus::SubsolverFailure: return kSubsolverFailure;
    }
    return kInternalError;
}

int run_toy(const cfg::Config& c, const std::string& out_dir) {
    diag::ToyState state{c.toy_theta1, c.toy_theta2, c.toy_k1, c.toy_k2,
                         c.toy_theta1_star, c.toy_theta2_star};
    const auto gd = diag::quadratic_toy(state, c.toy_eta, c.toy_steps, optim::StepMode::GD);
    const auto igd = diag::quadratic_toy(state, c.toy_eta, c.toy_steps, optim::StepMode::IGD);

    {
        File out(out_dir + "/toy.csv");
        std::fprintf(out.f, "step,ratio_gd,ratio_igd\n");
        for (std::size_t i = 0; i < gd.size(); ++i)
            std::fprintf(out.f, "%d,%.17g,%.17g\n", gd[i].step, gd[i].ratio_total,
                         igd[i].ratio_total);
    }
    File out(out_dir + "/summary.txt");
    kv(out, "status", std::string("ok"));
    kv(out, "gd_ratio1_step1", gd.front().ratio1);
    kv(out, "gd_ratio2_step1", gd.front().ratio2);
    kv(out, "gd_d_step1", gd.front().ratio_total);
    kv(out, "igd_ratio1_step1", igd.front().ratio1);
    kv(out, "igd_ratio2_step1", igd.front().ratio2);
    kv(out, "igd_d_step1", igd.front().ratio_total);
    kv(out, "gd_loss_final", gd.back().loss);
    kv(out, "igd_loss_final", igd.back().loss);
    echo_into_summary(out, c);
    write_config_echo(out_dir + "/config.echo", c);
    return kOk;
}

int run_gram_study(const cfg::Config& c, const std::string& out_dir) {
    const pde::PdeProblem problem = build_problem(c);
    sampler::SampleSet samples;
    try {
        samples = build_samples(problem, c);
    } catch (const SamplingFailure& e) {
        std::fprintf(stderr, "sampling failure: %s\n", e.what());
        return kSamplingFailure;
    }
    const act::ActivationKind kind = act::kind_from_string(c.activation);
    const model::InitScale scale = model::scale_from_string(c.init_scale);
    const int d = static_cast<int>(problem.dim()) - 1;

    Rng mc_rng = make_rng(c.seed).split(3);
    const gram::McEstimate ginf =
        gram::gram_infinity_mc(problem, samples, kind, scale, c.gram_m_draw, c.gram_reps, mc_rng,
                               c.bias_augmented, c.boundary_weight);

    const residual::ResidualEvaluator eval(problem, samples, c.bias_augmented, c.boundary_weight);
    File csv(out_dir + "/gram_study.csv");
    std::fprintf(csv.f, "m,seed,lambda_min,dev_frobenius,dev_spectral\n");
    std::vector<double> medians;
    double min_lambda = std::numeric_limits<double>::infinity();
    for (std::size_t wi = 0; wi < c.gram_widths.size(); ++wi) {
        std::vector<double> devs;
        for (int s = 0; s < c.gram_seeds; ++s) {
            Rng rng = make_rng(c.seed).split(100 + wi * 1000 + s);
            const model::Network net =
                model::init_network(c.gram_widths[wi], d, kind, scale, rng, c.bias_augmented);
            const gram::GramMatrix g0 = gram::gram(eval.jacobian(net));
            const double lmin = gram::min_eigenvalue(g0);
            const gram::Deviation dev = gram::gram_deviation(g0, ginf.mean);
            std::fprintf(csv.f, "%d,%d,%.17g,%.17g,%.17g\n", c.gram_widths[wi], s, lmin,
                         dev.frobenius, dev.spectral);
            devs.push_back(dev.frobenius);
            min_lambda = std::min(min_lambda, lmin);
        }
        std::sort(devs.begin(), devs.end());
        const std::size_t n = devs.size();
        medians.push_back(n % 2 == 1 ? devs[n / 2] : 0.5 * (devs[n / 2 - 1] + devs[n / 2]));
    }

    File out(out_dir + "/summary.txt");
    kv(out, "status", std::string("ok"));
    kv(out, "lambda_min_over_all_runs", min_lambda);
    kv(out, "ginf_lambda_min", gram::min_eigenvalue(ginf.mean));
    kv(out, "ginf_stderr_max", ginf.stderr_entries.maxCoeff());
    for (std::size_t wi = 0; wi < medians.size(); ++wi) {
        const std::string key = "dev_frobenius_median_m" + std::to_string(c.gram_widths[wi]);
        kv(out, key.c_str(), medians[wi]);
        if (wi > 0) {
            const std::string rkey = "dev_ratio_m" + std::to_string(c.gram_widths[wi - 1]) + "_to_m" +
                                     std::to_string(c.gram_widths[wi]);
            kv(out, rkey.c_str(), medians[wi - 1] / medians[wi]);
        }
    }
    echo_into_summary(out, c);
    write_config_echo(out_dir + "/config.echo", c);
    return kOk;
}

int run_scaling_study(const cfg::Config& c, const std::string& out_dir) {
    const pde::PdeProblem problem = build_problem(c);
    sampler::SampleSet samples;
    try {
        samples = build_samples(problem, c);
    } catch (const SamplingFailure& e) {
        std::fprintf(stderr, "sampling failure: %s\n", e.what());
        return kSamplingFailure;
    }
    Rng rng = make_rng(c.seed).split(4);
    const diag::ScalingStudyResult res = diag::residual_scaling_study(
        problem, samples, act::kind_from_string(c.activation), c.eta, c.scaling_widths,
        c.scaling_seeds, c.scaling_iters, c.lbfgs, rng, model::scale_from_string(c.init_scale),
        c.bias_augmented, c.panels, c.boundary_weight);

    {
        File csv(out_dir + "/scaling.csv");
        std::fprintf(csv.f, "width,seed,max_i1,max_i2\n");
        for (const auto& row : res.runs)
            if (!row.diverged)
                std::fprintf(csv.f, "%d,%d,%.17g,%.17g\n", row.width, row.seed_index, row.max_i1,
                             row.max_i2);
    }
    File out(out_dir + "/summary.txt");
    kv(out, "status", std::string("ok"));
    kv(out, "slope_i1", res.slope_i1);
    kv(out, "slope_i2", res.slope_i2);
    kv(out, "excluded_diverged_runs", static_cast<long long>(res.excluded));
    for (std::size_t i = 0; i < c.scaling_widths.size(); ++i) {
        const std::string k1 = "median_max_i1_m" + std::to_string(c.scaling_widths[i]);
        const std::string k2 = "median_max_i2_m" + std::to_string(c.scaling_widths[i]);
        kv(out, k1.c_str(), res.median_i1[i]);
        kv(out, k2.c_str(), res.median_i2[i]);
    }
    echo_into_summary(out, c);
    write_config_echo(out_dir + "/config.echo", c);
    return kOk;
}

int run_gradcheck(const cfg::Config& c, const std::string& out_dir) {
    // Central finite differences of the residual vector and loss w.r.t. every
    // weight, against the assembled Jacobian and gradient.
    Rng rng = make_rng(c.seed).split(5);
    const char* kinds[] = {"tanh", "logistic", "softplus"};
    double worst_col = 0.0, worst_grad = 0.0;
    File csv(out_dir + "/gradcheck.csv");
    std::fprintf(csv.f, "instance,activation,jacobian_rel_err,grad_rel_err\n");
    const int instances = 50;
    for (int inst = 0; inst < instances; ++inst) {
        const act::ActivationKind kind = act::kind_from_string(kinds[inst % 3]);
        const int d = 1 + static_cast<int>(rng.next_u64() % 3);
        const int m = 2 + static_cast<int>(rng.next_u64() % 7);
        const pde::PdeProblem problem = pde::heat_problem(d, 1.0, pde::default_heat_solution(d));
        sampler::SampleSet samples = sampler::sample_problem_points(problem, 2, 2, rng, true);
        model::Network net = model::init_network(m, d, kind, model::InitScale::Unit, rng, true);

        const residual::ResidualEvaluator eval(problem, samples, true, c.boundary_weight);
        const residual::Jacobian jac = eval.jacobian(net);
        Vec grad;
        eval.loss_and_grad(net, grad);

        const double h = 1e-5;
        Vec w = net.flatten();
        model::Network scratch = net;
        Mat fd(jac.D.rows(), jac.D.cols());
        Vec fd_grad(w.size());
        for (Eigen::Index i = 0; i < w.size(); ++i) {
            const double keep = w(i);
            w(i) = keep + h;
            scratch.unflatten(w);
            const residual::ResidualSystem plus = eval.residuals(scratch);
            w(i) = keep - h;
            scratch.unflatten(w);
            const residual::ResidualSystem minus = eval.residuals(scratch);
            w(i) = keep;
            for (Eigen::Index p = 0; p < plus.s.size(); ++p)
                fd(i, p) = (plus.s(p) - minus.s(p)) / (2 * h);
            for (Eigen::Index q = 0; q < plus.h.size(); ++q)
                fd(i, plus.s.size() + q) = (plus.h(q) - minus.h(q)) / (2 * h);
            fd_grad(i) = (plus.loss - minus.loss) / (2 * h);
        }
        scratch.unflatten(w);
        const double col_err = (fd - jac.D).norm() / std::max(jac.D.norm(), 1e-12);
        const double grad_err = (fd_grad - grad).norm() / std::max(grad.norm(), 1e-12);
        std::fprintf(csv.f, "%d,%s,%.17g,%.17g\n", inst, kinds[inst % 3], col_err, grad_err);
        worst_col = std::max(worst_col, col_err);
        worst_grad = std::max(worst_grad, grad_err);
    }
    File out(out_dir + "/summary.txt");
    const bool pass = worst_col < 1e-5 && worst_grad < 1e-5;
    kv(out, "status", std::string(pass ? "ok" : "failed"));
    kv(out, "jacobian_rel_err_max", worst_col);
    kv(out, "grad_rel_err_max", worst_grad);
    kv(out, "instances", static_cast<long long>(instances));
    echo_into_summary(out, c);
    write_config_echo(out_dir + "/config.echo", c);
    return pass ? kOk : kInternalError;
}

}  // namespace

int run_experiment(const cfg::Config& config, const std::string& subcommand,
                   const std::string& out_dir) {
    try {
        std::filesystem::create_directories(out_dir);
        if (subcommand == "train") return run_train_like(config, out_dir, false);
        if (subcommand == "helmholtz") return run_train_like(config, out_dir, true);
        if (subcommand == "toy") return run_toy(config, out_dir);
        if (subcommand == "gram-study") return run_gram_study(config, out_dir);
        if (subcommand == "scaling-study") return run_scaling_study(config, out_dir);
        if (subcommand == "gradcheck") return run_gradcheck(config, out_dir);
        std::fprintf(stderr, "unknown subcommand: %s\n", subcommand.c_str());
        return kConfigError;
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kConfigError;
    } catch (const SamplingFailure& e) {
        std::fprintf(stderr, "sampling failure: %s\n", e.what());
        return kSamplingFailure;
    } catch (const NumericalFailure& e) {
        std::fprintf(stderr, "numerical failure: %s\n", e.what());
        return kSubsolverFailure;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kInternalError;
    }
}

}  // namespace pinn::exp
