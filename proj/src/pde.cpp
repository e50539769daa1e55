#include "pinn/pde.hpp"

#include <cmath>
#include <numbers>

#include "pinn/errors.hpp"

namespace pinn::pde {

namespace {
constexpr double kPi = std::numbers::pi;
}

bool LinearOperator::is_zero() const {
    return c0 == 0.0 && (b.size() == 0 || b.isZero(0.0)) && (A.size() == 0 || A.isZero(0.0));
}

LinearOperator zero_operator(Eigen::Index dim) {
    return {0.0, Vec::Zero(dim), Vec::Zero(dim)};
}

LinearOperator identity_operator(Eigen::Index dim) {
    return {1.0, Vec::Zero(dim), Vec::Zero(dim)};
}

double Domain::corner_norm() const {
    double sum = 0.0;
    for (Eigen::Index i = 0; i < dim(); ++i)
        sum += std::max(lo(i) * lo(i), hi(i) * hi(i));
    return std::sqrt(sum);
}

bool Domain::contains(const Vec& x) const {
    if (x.size() != dim()) return false;
    for (Eigen::Index i = 0; i < dim(); ++i)
        if (x(i) < lo(i) || x(i) > hi(i)) return false;
    return true;
}

bool Domain::strictly_inside(const Vec& x) const {
    if (x.size() != dim()) return false;
    for (Eigen::Index i = 0; i < dim(); ++i)
        if (!(x(i) > lo(i) && x(i) < hi(i))) return false;
    return true;
}

bool Domain::on_boundary(const Vec& x) const {
    if (!contains(x)) return false;
    for (const auto& face : boundary_faces())
        if (x(face.axis) == face.value) return true;
    return false;
}

std::vector<Domain::Face> Domain::boundary_faces() const {
    std::vector<Face> faces;
    const Eigen::Index n = dim();
    auto face_measure = [&](Eigen::Index axis) {
        double m = 1.0;
        for (Eigen::Index j = 0; j < n; ++j)
            if (j != axis) m *= extent(j);
        return m;
    };
    if (time_axis) {
        faces.push_back({0, lo(0), face_measure(0)});
        for (Eigen::Index i = 1; i < n; ++i) {
            faces.push_back({i, lo(i), face_measure(i)});
            faces.push_back({i, hi(i), face_measure(i)});
        }
    } else {
        for (Eigen::Index i = 0; i < n; ++i) {
            faces.push_back({i, lo(i), face_measure(i)});
            faces.push_back({i, hi(i), face_measure(i)});
        }
    }
    return faces;
}

double SolutionSpec::value(const Vec& x) const {
    double sum = 0.0;
    for (const Term& t : terms) {
        double prod = t.coef;
        for (Eigen::Index i = 0; i < x.size(); ++i)
            prod *= std::sin(t.omega(i) * kPi * x(i) + t.phase(i));
        sum += prod;
    }
    return sum;
}

double SolutionSpec::d1(const Vec& x, Eigen::Index axis) const {
    double sum = 0.0;
    for (const Term& t : terms) {
        double prod = t.coef;
        for (Eigen::Index i = 0; i < x.size(); ++i) {
            const double arg = t.omega(i) * kPi * x(i) + t.phase(i);
            prod *= (i == axis) ? t.omega(i) * kPi * std::cos(arg) : std::sin(arg);
        }
        sum += prod;
    }
    return sum;
}

double SolutionSpec::d2(const Vec& x, Eigen::Index axis) const {
    double sum = 0.0;
    for (const Term& t : terms) {
        const double w = t.omega(axis) * kPi;
        double prod = -t.coef * w * w;
        for (Eigen::Index i = 0; i < x.size(); ++i)
            prod *= std::sin(t.omega(i) * kPi * x(i) + t.phase(i));
        sum += prod;
    }
    return sum;
}

double manufactured_forcing(const LinearOperator& op, const SolutionSpec& exact, const Vec& x) {
    if (exact.empty()) return 0.0;
    double out = op.c0 != 0.0 ? op.c0 * exact.value(x) : 0.0;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        if (op.b(i) != 0.0) out += op.b(i) * exact.d1(x, i);
        if (op.A(i) != 0.0) out += op.A(i) * exact.d2(x, i);
    }
    return out;
}

double PdeProblem::forcing(const Vec& x_phys) const {
    return manufactured_forcing(op, exact, x_phys);
}

double PdeProblem::boundary_data(const Vec& x_phys) const {
    return exact.empty() ? 0.0 : exact.value(x_phys);
}

LinearOperator PdeProblem::network_operator() const {
    LinearOperator nop = op;
    nop.b /= scale;
    nop.A /= scale * scale;
    return nop;
}

PdeProblem heat_problem(int d, double T, SolutionSpec exact) {
    if (d < 1) throw InvalidInput("heat_problem: d >= 1 required");
    if (!(T > 0.0)) throw InvalidInput("heat_problem: T > 0 required");
    const Eigen::Index n = d + 1;
    PdeProblem p;
    p.op.c0 = 0.0;
    p.op.b = Vec::Zero(n);
    p.op.b(0) = 1.0;
    p.op.A = Vec::Constant(n, -1.0);
    p.op.A(0) = 0.0;
    p.domain.lo = Vec::Zero(n);
    p.domain.hi = Vec::Ones(n);
    p.domain.hi(0) = T;
    p.domain.time_axis = true;
    p.exact = std::move(exact);
    p.scale = p.domain.corner_norm();
    return p;
}

PdeProblem helmholtz_problem(double k, SolutionSpec exact) {
    PdeProblem p;
    p.op.c0 = k * k;
    p.op.b = Vec::Zero(2);
    p.op.A = Vec::Ones(2);
    p.domain.lo = Vec::Zero(2);
    p.domain.hi = Vec::Ones(2);
    p.domain.time_axis = false;
    p.exact = std::move(exact);
    p.scale = p.domain.corner_norm();

    // The preset prescribes u = 0 on the boundary; reject solutions that
    // cannot satisfy it.
    for (const auto& face : p.domain.boundary_faces()) {
        for (int i = 0; i <= 16; ++i) {
            Vec y(2);
            y(face.axis) = face.value;
            y(1 - face.axis) = static_cast<double>(i) / 16.0;
            if (std::abs(p.boundary_data(y)) > 1e-12)
                throw InconsistentProblem("helmholtz_problem: exact solution does not vanish on the boundary");
        }
    }
    return p;
}

SolutionSpec default_heat_solution(int d) {
    // cos(pi t / 2) * prod_i sin(pi x_i): nonzero initial data, zero sides.
    SolutionSpec s;
    SolutionSpec::Term t;
    t.coef = 1.0;
    t.omega = Vec::Ones(d + 1);
    t.omega(0) = 0.5;
    t.phase = Vec::Zero(d + 1);
    t.phase(0) = kPi / 2.0;
    s.terms.push_back(std::move(t));
    return s;
}

SolutionSpec single_scale_solution() {
    SolutionSpec s;
    s.terms.push_back({1.0, Vec::Ones(2), Vec::Zero(2)});
    return s;
}

SolutionSpec multi_scale_solution() {
    SolutionSpec s = single_scale_solution();
    s.terms.push_back({0.1, Vec::Constant(2, 10.0), Vec::Zero(2)});
    return s;
}

}  // namespace pinn::pde
