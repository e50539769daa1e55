#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "pinn/config.hpp"
#include "pinn/errors.hpp"
#include "pinn/experiment.hpp"

namespace py = pybind11;
using namespace pinn;

PYBIND11_MODULE(pinnprox, mod) {
    mod.doc() = "Two-layer PDE-residual networks trained by explicit or implicit (proximal) "
                "gradient descent, with kernel-spectrum instrumentation";

    py::register_exception<InvalidInput>(mod, "InvalidInput", PyExc_ValueError);
    py::register_exception<NumericalFailure>(mod, "NumericalFailure", PyExc_ArithmeticError);
    py::register_exception<SamplingFailure>(mod, "SamplingFailure", PyExc_RuntimeError);
    py::register_exception<InconsistentProblem>(mod, "InconsistentProblem", PyExc_ValueError);
    py::register_exception<ConfigError>(mod, "ConfigError", PyExc_ValueError);

    mod.def("eval_jet", [](const std::string& kind, double z) {
        const act::Jet4 j = act::eval_jet(act::kind_from_string(kind), z);
        return py::make_tuple(j.v0, j.v1, j.v2, j.v3);
    }, py::arg("kind"), py::arg("z"), "Activation value and first three derivatives");

    py::class_<Rng>(mod, "Rng")
        .def(py::init<std::uint64_t>(), py::arg("seed") = 0)
        .def("next_u64", &Rng::next_u64)
        .def("uniform", py::overload_cast<>(&Rng::uniform))
        .def("normal", &Rng::normal)
        .def("split", &Rng::split, py::arg("tag"));

    py::class_<pde::PdeProblem>(mod, "PdeProblem")
        .def_property_readonly("dim", &pde::PdeProblem::dim)
        .def_readonly("scale", &pde::PdeProblem::scale)
        .def("forcing", &pde::PdeProblem::forcing, py::arg("x_phys"))
        .def("boundary_data", &pde::PdeProblem::boundary_data, py::arg("x_phys"))
        .def("exact_value", &pde::PdeProblem::exact_value, py::arg("x_phys"));

    mod.def("heat_problem", [](int d, double T) {
        return pde::heat_problem(d, T, pde::default_heat_solution(d));
    }, py::arg("d") = 1, py::arg("T") = 1.0);
    mod.def("helmholtz_problem", [](double k, bool multi_scale) {
        return pde::helmholtz_problem(
            k, multi_scale ? pde::multi_scale_solution() : pde::single_scale_solution());
    }, py::arg("k") = 4.0, py::arg("multi_scale") = false);

    py::class_<sampler::SampleSet>(mod, "SampleSet")
        .def_readonly("interior", &sampler::SampleSet::interior)
        .def_readonly("boundary", &sampler::SampleSet::boundary)
        .def("write_csv", &sampler::SampleSet::write_csv);

    mod.def("sample_problem_points",
            [](const pde::PdeProblem& problem, int n1, int n2, std::uint64_t seed, bool augmented) {
                Rng rng(seed);
                return sampler::sample_problem_points(problem, n1, n2, rng, augmented);
            },
            py::arg("problem"), py::arg("n1"), py::arg("n2"), py::arg("seed") = 0,
            py::arg("augmented") = true);

    py::class_<model::Network>(mod, "Network")
        .def_readonly("m", &model::Network::m)
        .def_readonly("d", &model::Network::d)
        .def_readwrite("w", &model::Network::w)
        .def_readonly("a", &model::Network::a)
        .def_readonly("bias_augmented", &model::Network::bias_augmented);

    mod.def("init_network",
            [](int m, int d, const std::string& kind, const std::string& scale, std::uint64_t seed,
               bool bias_augmented) {
                Rng rng(seed);
                return model::init_network(m, d, act::kind_from_string(kind),
                                           model::scale_from_string(scale), rng, bias_augmented);
            },
            py::arg("m"), py::arg("d"), py::arg("kind") = "tanh", py::arg("scale") = "unit",
            py::arg("seed") = 0, py::arg("bias_augmented") = false);

    mod.def("forward", &model::forward, py::arg("net"), py::arg("x"));
    mod.def("forward_batch", &model::forward_batch, py::arg("net"), py::arg("points"));

    mod.def("residual_loss",
            [](const model::Network& net, const pde::PdeProblem& problem,
               const sampler::SampleSet& samples) {
                const residual::ResidualSystem rs = residual::residuals(net, problem, samples);
                return py::make_tuple(rs.loss, rs.s, rs.h);
            },
            py::arg("net"), py::arg("problem"), py::arg("samples"));
    mod.def("loss_grad", &residual::loss_grad, py::arg("net"), py::arg("problem"),
            py::arg("samples"), py::arg("boundary_weight") = 1.0);

    mod.def("gram_matrix",
            [](const model::Network& net, const pde::PdeProblem& problem,
               const sampler::SampleSet& samples) {
                return gram::gram(residual::jacobian(net, problem, samples)).G;
            });
    mod.def("min_eigenvalue", [](const Mat& g) { return gram::min_eigenvalue({g}); });

    py::class_<optim::LbfgsOptions>(mod, "LbfgsOptions")
        .def(py::init<>())
        .def_readwrite("memory", &optim::LbfgsOptions::memory)
        .def_readwrite("max_iters", &optim::LbfgsOptions::max_iters)
        .def_readwrite("grad_tol", &optim::LbfgsOptions::grad_tol)
        .def_readwrite("wolfe_c1", &optim::LbfgsOptions::wolfe_c1)
        .def_readwrite("wolfe_c2", &optim::LbfgsOptions::wolfe_c2)
        .def_readwrite("max_line_search", &optim::LbfgsOptions::max_line_search);

    mod.def("lbfgs_minimize",
            [](const std::function<std::pair<double, Vec>(const Vec&)>& objective, Vec x0,
               const optim::LbfgsOptions& opts) {
                const optim::Objective obj = [&](const Vec& x, Vec& grad) {
                    auto [value, g] = objective(x);
                    grad = g;
                    return value;
                };
                auto [x, stats] = optim::lbfgs_minimize(obj, std::move(x0), opts);
                return py::make_tuple(x, stats.iterations, stats.grad_norm, stats.converged);
            },
            py::arg("objective"), py::arg("x0"), py::arg("opts") = optim::LbfgsOptions{});

    mod.def("gd_step", &optim::gd_step, py::arg("net"), py::arg("problem"), py::arg("samples"),
            py::arg("eta"), py::arg("boundary_weight") = 1.0);
    mod.def("igd_step",
            [](const model::Network& net, const pde::PdeProblem& problem,
               const sampler::SampleSet& samples, double eta, const optim::LbfgsOptions& opts) {
                auto [out, stats] = optim::igd_step(net, problem, samples, eta, opts);
                py::dict d;
                d["sub_iterations"] = stats.sub_iterations;
                d["grad_norm"] = stats.grad_norm;
                d["converged"] = stats.converged;
                d["loss_before"] = stats.loss_before;
                d["loss_after"] = stats.loss_after;
                d["prox_slack"] = stats.prox_slack;
                return py::make_tuple(out, d);
            },
            py::arg("net"), py::arg("problem"), py::arg("samples"), py::arg("eta"),
            py::arg("opts") = optim::LbfgsOptions{});

    mod.def("train",
            [](const pde::PdeProblem& problem, const sampler::SampleSet& samples,
               const model::Network& net0, const std::string& mode, double eta, int iters,
               const optim::LbfgsOptions& opts) {
                const optim::TrainRun run =
                    optim::train(problem, samples, net0, mode == "gd" ? optim::StepMode::GD
                                                                      : optim::StepMode::IGD,
                                 eta, iters, opts);
                std::vector<double> losses;
                for (const auto& r : run.records) losses.push_back(r.loss);
                py::dict d;
                d["losses"] = losses;
                d["loss0"] = run.loss0;
                d["lambda0"] = run.lambda0_hat;
                d["status"] = run.status == optim::TrainStatus::Ok ? "ok"
                              : run.status == optim::TrainStatus::Diverged ? "diverged"
                                                                           : "subsolver_failure";
                return d;
            },
            py::arg("problem"), py::arg("samples"), py::arg("net0"), py::arg("mode"),
            py::arg("eta"), py::arg("iters"), py::arg("opts") = optim::LbfgsOptions{});

    mod.def("quadratic_toy",
            [](double theta1, double theta2, double k1, double k2, double t1s, double t2s,
               double eta, int steps, const std::string& mode) {
                const auto out = diag::quadratic_toy({theta1, theta2, k1, k2, t1s, t2s}, eta, steps,
                                                     mode == "gd" ? optim::StepMode::GD
                                                                  : optim::StepMode::IGD);
                py::list rows;
                for (const auto& s : out)
                    rows.append(py::make_tuple(s.step, s.ratio_total, s.ratio1, s.ratio2, s.loss));
                return rows;
            },
            py::arg("theta1"), py::arg("theta2"), py::arg("k1"), py::arg("k2"),
            py::arg("theta1_star"), py::arg("theta2_star"), py::arg("eta"), py::arg("steps"),
            py::arg("mode"));

    mod.def("relative_l2", &exp::relative_l2, py::arg("pred"), py::arg("exact"));
}
