"""Smoke tests for the python module; run with PYTHONPATH pointing at the
built extension (ctest wires this up automatically)."""
import math
import sys

import pinnprox as pp


def check(cond, label):
    if not cond:
        print(f"FAIL: {label}")
        sys.exit(1)
    print(f"ok: {label}")


def main():
    v0, v1, v2, v3 = pp.eval_jet("tanh", 0.0)
    check((v0, v1, v2, v3) == (0.0, 1.0, 0.0, -2.0), "tanh jet at zero")

    v0, _, _, _ = pp.eval_jet("softplus", 0.0)
    check(abs(v0 - math.log(2.0)) < 1e-15, "softplus value at zero")

    r1, r2 = pp.Rng(0), pp.Rng(0)
    check(all(r1.next_u64() == r2.next_u64() for _ in range(100)), "generator determinism")

    problem = pp.heat_problem(d=1, T=1.0)
    samples = pp.sample_problem_points(problem, n1=10, n2=5, seed=3)
    check(samples.interior.shape == (10, 2), "interior sample shape")

    net = pp.init_network(m=64, d=1, kind="tanh", seed=4, bias_augmented=True)
    loss0, s, h = pp.residual_loss(net, problem, samples)
    check(loss0 > 0 and len(s) == 10 and len(h) == 5, "residual system shapes")

    grad = pp.loss_grad(net, problem, samples)
    check(grad.shape == (64 * 3,), "gradient shape")

    lam = pp.min_eigenvalue(pp.gram_matrix(net, problem, samples))
    check(lam > -1e-9, "kernel matrix is positive semidefinite")

    opts = pp.LbfgsOptions()
    opts.grad_tol = 1e-9
    run = pp.train(problem, samples, net, mode="igd", eta=1.0, iters=5, opts=opts)
    losses = run["losses"]
    check(run["status"] == "ok", "training status")
    check(all(b <= a + 1e-8 for a, b in zip([run["loss0"]] + losses, losses)),
          "implicit steps decrease the loss")

    rows = pp.quadratic_toy(0.0, 0.0, 1e-4, 1e4, 1.0, 1.0, 1e-4, 3, "gd")
    check(abs(rows[0][2] - (1 - 1e-8) ** 2) < 1e-12, "explicit toy ratio")
    check(rows[0][3] == 0.0, "stiff coordinate lands exactly")

    def rosenbrock(x):
        a, b = x[0], x[1]
        g = [-2 * (1 - a) - 400 * a * (b - a * a), 200 * (b - a * a)]
        return (1 - a) ** 2 + 100 * (b - a * a) ** 2, g

    opts2 = pp.LbfgsOptions()
    opts2.max_iters = 200
    opts2.grad_tol = 1e-9
    x, iters, gnorm, converged = pp.lbfgs_minimize(rosenbrock, [-1.2, 1.0], opts2)
    check(converged and abs(x[0] - 1) < 1e-6 and abs(x[1] - 1) < 1e-6, "rosenbrock solve")

    print("python smoke tests passed")


if __name__ == "__main__":
    main()
