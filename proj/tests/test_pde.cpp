#include <doctest.h>

#include <cmath>
#include <numbers>

#include "pinn/errors.hpp"
#include "pinn/pde.hpp"
#include "pinn/rng.hpp"

using namespace pinn;

namespace {
constexpr double kPi = std::numbers::pi;

// Independent second-order central-difference application of the operator.
double fd_operator(const pde::LinearOperator& op, const pde::SolutionSpec& u, const Vec& x,
                   double h = 1e-4) {
    double out = op.c0 * u.value(x);
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        Vec xp = x, xm = x;
        xp(i) += h;
        xm(i) -= h;
        if (op.b(i) != 0.0) out += op.b(i) * (u.value(xp) - u.value(xm)) / (2 * h);
        if (op.A(i) != 0.0)
            out += op.A(i) * (u.value(xp) - 2.0 * u.value(x) + u.value(xm)) / (h * h);
    }
    return out;
}
}  // namespace

TEST_CASE("heat preset wiring") {
    const pde::PdeProblem p = pde::heat_problem(1, 1.0, pde::default_heat_solution(1));
    CHECK(p.op.c0 == 0.0);
    CHECK(p.op.b(0) == 1.0);
    CHECK(p.op.b(1) == 0.0);
    CHECK(p.op.A(0) == 0.0);
    CHECK(p.op.A(1) == -1.0);
    CHECK(p.domain.time_axis);
    CHECK(p.scale == doctest::Approx(std::sqrt(2.0)));

    // Boundary membership: {0} x Omega and [0,T] x dOmega, nothing else.
    Vec a(2), b(2), c(2), d(2);
    a << 0.0, 0.3;
    b << 0.7, 0.0;
    c << 0.5, 0.5;
    d << 1.0, 0.5;  // terminal face is not part of the data set
    CHECK(p.domain.on_boundary(a));
    CHECK(p.domain.on_boundary(b));
    CHECK_FALSE(p.domain.on_boundary(c));
    CHECK_FALSE(p.domain.on_boundary(d));

    // Face measures: initial face 1, two side faces of measure T each.
    const auto faces = p.domain.boundary_faces();
    CHECK(faces.size() == 3);
    double total = 0;
    for (const auto& f : faces) total += f.measure;
    CHECK(total == doctest::Approx(3.0));

    CHECK_THROWS_AS(pde::heat_problem(0, 1.0, {}), InvalidInput);
    CHECK_THROWS_AS(pde::heat_problem(1, 0.0, {}), InvalidInput);
}

TEST_CASE("zero exact solution gives zero data") {
    const pde::PdeProblem p = pde::heat_problem(2, 1.0, pde::SolutionSpec{});
    Vec x(3);
    x << 0.3, 0.4, 0.5;
    CHECK(p.forcing(x) == 0.0);
    CHECK(p.boundary_data(x) == 0.0);
    CHECK_FALSE(p.has_exact());
}

TEST_CASE("manufactured forcing matches a finite-difference oracle") {
    Rng rng(31);
    for (int rep = 0; rep < 10; ++rep) {
        pde::SolutionSpec u;
        const int terms = 1 + static_cast<int>(rng.next_u64() % 3);
        for (int t = 0; t < terms; ++t) {
            pde::SolutionSpec::Term term;
            term.coef = rng.uniform(-2.0, 2.0);
            term.omega = Vec(3);
            term.phase = Vec(3);
            for (int i = 0; i < 3; ++i) {
                term.omega(i) = rng.uniform(0.0, 3.0);
                term.phase(i) = rng.uniform(0.0, 2 * kPi);
            }
            u.terms.push_back(term);
        }
        pde::LinearOperator op;
        op.c0 = rng.uniform(-2.0, 2.0);
        op.b = Vec(3);
        op.A = Vec(3);
        for (int i = 0; i < 3; ++i) {
            op.b(i) = rng.uniform(-1.0, 1.0);
            op.A(i) = rng.uniform(-1.0, 1.0);
        }
        Vec x(3);
        for (int i = 0; i < 3; ++i) x(i) = rng.uniform(0.1, 0.9);
        const double closed = pde::manufactured_forcing(op, u, x);
        const double fd = fd_operator(op, u, x);
        CHECK(std::abs(closed - fd) <= 1e-6 * std::max(1.0, std::abs(fd)));
    }

    const pde::LinearOperator zero = pde::zero_operator(2);
    Vec x2(2);
    x2 << 0.3, 0.7;
    CHECK(pde::manufactured_forcing(zero, pde::single_scale_solution(), x2) == 0.0);
}

TEST_CASE("helmholtz preset and its forcing") {
    const pde::PdeProblem p = pde::helmholtz_problem(4.0, pde::multi_scale_solution());
    CHECK(p.op.c0 == 16.0);
    CHECK(p.op.A(0) == 1.0);
    CHECK(p.op.A(1) == 1.0);
    CHECK_FALSE(p.domain.time_axis);

    Vec c(2);
    c << 0.5, 0.5;
    CHECK(p.forcing(c) == doctest::Approx(16.0 - 2.0 * kPi * kPi).epsilon(1e-12));

    // Closed form of the multi-scale forcing, verified pointwise.
    Rng rng(5);
    for (int i = 0; i < 50; ++i) {
        Vec x(2);
        x << rng.uniform(), rng.uniform();
        const double expected =
            (16.0 - 2.0 * kPi * kPi) * std::sin(kPi * x(0)) * std::sin(kPi * x(1)) +
            0.1 * (16.0 - 200.0 * kPi * kPi) * std::sin(10 * kPi * x(0)) * std::sin(10 * kPi * x(1));
        CHECK(p.forcing(x) == doctest::Approx(expected).epsilon(1e-10));
    }

    // Zero exact solution is fine (f = 0); one that misses u = 0 on the
    // boundary is rejected.
    const pde::PdeProblem z = pde::helmholtz_problem(4.0, pde::SolutionSpec{});
    CHECK(z.forcing(c) == 0.0);

    pde::SolutionSpec bad;  // sin(0.5 pi x) sin(0.5 pi y) = 1 at (1,1)
    bad.terms.push_back({1.0, Vec::Constant(2, 0.5), Vec::Zero(2)});
    CHECK_THROWS_AS(pde::helmholtz_problem(4.0, bad), InconsistentProblem);
}

TEST_CASE("preset consistency: operator applied to exact equals forcing") {
    Rng rng(13);
    const pde::PdeProblem heat = pde::heat_problem(1, 1.0, pde::default_heat_solution(1));
    const pde::PdeProblem helm = pde::helmholtz_problem(4.0, pde::multi_scale_solution());
    for (const pde::PdeProblem& p : {heat, helm}) {
        for (int i = 0; i < 100; ++i) {
            Vec x(p.dim());
            for (Eigen::Index j = 0; j < p.dim(); ++j)
                x(j) = rng.uniform(p.domain.lo(j), p.domain.hi(j));
            const double lhs = pde::manufactured_forcing(p.op, p.exact, x);
            CHECK(std::abs(lhs - p.forcing(x)) < 1e-8);
        }
    }
}

TEST_CASE("boundary data equals the exact solution on the boundary") {
    Rng rng(41);
    const pde::PdeProblem p = pde::heat_problem(1, 1.0, pde::default_heat_solution(1));
    const auto faces = p.domain.boundary_faces();
    for (int i = 0; i < 100; ++i) {
        const auto& face = faces[rng.next_u64() % faces.size()];
        Vec y(2);
        for (int j = 0; j < 2; ++j) y(j) = rng.uniform(p.domain.lo(j), p.domain.hi(j));
        y(face.axis) = face.value;
        CHECK(std::abs(p.boundary_data(y) - p.exact_value(y)) < 1e-12);
    }
}

TEST_CASE("network operator rescales derivative coefficients") {
    const pde::PdeProblem p = pde::helmholtz_problem(4.0, pde::single_scale_solution());
    const pde::LinearOperator nop = p.network_operator();
    CHECK(nop.c0 == 16.0);
    CHECK(nop.A(0) == doctest::Approx(0.5).epsilon(1e-15));  // 1/scale^2 with scale = sqrt(2)
    const pde::PdeProblem h = pde::heat_problem(1, 1.0, pde::default_heat_solution(1));
    const pde::LinearOperator nh = h.network_operator();
    CHECK(nh.b(0) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-15));
    CHECK(nh.A(1) == doctest::Approx(-0.5).epsilon(1e-15));
}
