#include "pinn/residual.hpp"

#include <cmath>
#include <cstdio>

#include "pinn/errors.hpp"

namespace pinn::residual {

namespace {
constexpr Eigen::Index kTile = 256;
using RowArr = Eigen::Array<double, 1, Eigen::Dynamic>;
}  // namespace

ResidualEvaluator::ResidualEvaluator(const pde::PdeProblem& problem,
                                     const sampler::SampleSet& samples, bool bias_augmented,
                                     double boundary_weight)
    : lambda_(boundary_weight), augmented_(bias_augmented), dim_(static_cast<int>(problem.dim())) {
    if (samples.dim() != problem.dim()) throw InvalidInput("ResidualEvaluator: sample dimension mismatch");
    if (!(boundary_weight >= 0.0)) throw InvalidInput("ResidualEvaluator: boundary_weight >= 0 required");

    const Eigen::Index p = problem.dim() + (bias_augmented ? 1 : 0);
    auto load = [&](const Mat& pts, Mat& out) {
        out.resize(pts.rows(), p);
        out.leftCols(problem.dim()) = pts;
        if (bias_augmented) out.col(problem.dim()).setOnes();
    };
    load(samples.interior, xi_);
    load(samples.boundary, xb_);

    f_.resize(samples.n1());
    for (Eigen::Index i = 0; i < samples.n1(); ++i)
        f_(i) = problem.forcing(problem.to_physical(samples.interior.row(i).transpose()));
    g_.resize(samples.n2());
    for (Eigen::Index j = 0; j < samples.n2(); ++j)
        g_(j) = problem.boundary_data(problem.to_physical(samples.boundary.row(j).transpose()));

    const pde::LinearOperator nop = problem.network_operator();
    c0_ = nop.c0;
    b_ = Vec::Zero(p);
    A_ = Vec::Zero(p);
    b_.head(problem.dim()) = nop.b;
    A_.head(problem.dim()) = nop.A;
}

void ResidualEvaluator::check(const model::Network& net) const {
    if (net.input_dim() != dim_ || net.bias_augmented != augmented_)
        throw InvalidInput("ResidualEvaluator: network shape does not match evaluator");
}

ResidualSystem ResidualEvaluator::residuals(const model::Network& net) const {
    check(net);
    const double inv_sqrt_m = 1.0 / std::sqrt(static_cast<double>(net.m));
    const Vec aq0 = net.a * (c0_ * inv_sqrt_m);
    const Vec q1 = net.w * b_;
    const Vec q2 = (net.w.array().square().matrix()) * A_;
    const Vec aq1 = net.a.cwiseProduct(q1) * inv_sqrt_m;
    const Vec aq2 = net.a.cwiseProduct(q2) * inv_sqrt_m;

    ResidualSystem rs;
    rs.s.resize(n1());
    rs.h.resize(n2());

    Mat z, j0, j1, j2, j3;
    for (Eigen::Index c = 0; c < n1(); c += kTile) {
        const Eigen::Index t = std::min(kTile, n1() - c);
        z.noalias() = net.w * xi_.middleRows(c, t).transpose();
        act::eval_jets(net.kind, z, j0, j1, j2, j3);
        Vec v = j1.transpose() * aq1 + j2.transpose() * aq2;
        if (c0_ != 0.0) v.noalias() += j0.transpose() * aq0;
        rs.s.segment(c, t) = (v - f_.segment(c, t)) / std::sqrt(static_cast<double>(n1()));
    }
    const double wb = std::sqrt(lambda_ / static_cast<double>(std::max<Eigen::Index>(n2(), 1)));
    for (Eigen::Index c = 0; c < n2(); c += kTile) {
        const Eigen::Index t = std::min(kTile, n2() - c);
        z.noalias() = net.w * xb_.middleRows(c, t).transpose();
        act::eval_jets(net.kind, z, j0, j1, j2, j3);
        const Vec v = j0.transpose() * (net.a * inv_sqrt_m);
        rs.h.segment(c, t) = wb * (v - g_.segment(c, t));
    }
    rs.loss_interior = 0.5 * rs.s.squaredNorm();
    rs.loss_boundary = 0.5 * rs.h.squaredNorm();
    rs.loss = rs.loss_interior + rs.loss_boundary;
    return rs;
}

double ResidualEvaluator::loss_and_grad(const model::Network& net, Vec& grad,
                                        ResidualSystem* out_rs) const {
    check(net);
    const Eigen::Index p = net.row_len();
    const double inv_sqrt_m = 1.0 / std::sqrt(static_cast<double>(net.m));
    const Vec q1 = net.w * b_;
    const Vec q2 = (net.w.array().square().matrix()) * A_;
    const Vec aq0 = net.a * (c0_ * inv_sqrt_m);
    const Vec aq1 = net.a.cwiseProduct(q1) * inv_sqrt_m;
    const Vec aq2 = net.a.cwiseProduct(q2) * inv_sqrt_m;

    ResidualSystem rs;
    rs.s.resize(n1());
    rs.h.resize(n2());

    Mat g = Mat::Zero(net.m, p);  // d(loss)/d(w), missing the a_r/sqrt(m) row factor
    Vec u1_total = Vec::Zero(net.m);
    Vec u2_total = Vec::Zero(net.m);

    Mat z, j0, j1, j2, j3, pmat;
    for (Eigen::Index c = 0; c < n1(); c += kTile) {
        const Eigen::Index t = std::min(kTile, n1() - c);
        const auto xt = xi_.middleRows(c, t);
        z.noalias() = net.w * xt.transpose();
        act::eval_jets(net.kind, z, j0, j1, j2, j3);
        Vec v = j1.transpose() * aq1 + j2.transpose() * aq2;
        if (c0_ != 0.0) v.noalias() += j0.transpose() * aq0;
        const Vec resid = v - f_.segment(c, t);
        rs.s.segment(c, t) = resid / std::sqrt(static_cast<double>(n1()));

        const RowArr cw = resid.transpose().array() / static_cast<double>(n1());
        u1_total.noalias() += j1 * cw.matrix().transpose();
        u2_total.noalias() += j2 * cw.matrix().transpose();

        pmat = c0_ * j1;
        pmat.array() += j2.array().colwise() * q1.array();
        pmat.array() += j3.array().colwise() * q2.array();
        pmat.array().rowwise() *= cw;
        g.noalias() += pmat * xt;
    }
    // Deferred rank-structured pieces: sum_p c_p*sigma'*b and 2*sum_p c_p*sigma''*(A o w_r).
    g.noalias() += u1_total * b_.transpose();
    Mat aw = net.w;
    aw.array().rowwise() *= A_.transpose().array();
    aw.array().colwise() *= (2.0 * u2_total).array();
    g += aw;

    const double wb2 = lambda_ / static_cast<double>(std::max<Eigen::Index>(n2(), 1));
    for (Eigen::Index c = 0; c < n2(); c += kTile) {
        const Eigen::Index t = std::min(kTile, n2() - c);
        const auto yt = xb_.middleRows(c, t);
        z.noalias() = net.w * yt.transpose();
        act::eval_jets(net.kind, z, j0, j1, j2, j3);
        const Vec v = j0.transpose() * (net.a * inv_sqrt_m);
        const Vec resid = v - g_.segment(c, t);
        rs.h.segment(c, t) = std::sqrt(wb2) * resid;

        const RowArr cw = resid.transpose().array() * wb2;
        j1.array().rowwise() *= cw;
        g.noalias() += j1 * yt;
    }

    // Common per-neuron factor.
    g.array().colwise() *= net.a.array() * inv_sqrt_m;

    grad.resize(net.param_count());
    for (int r = 0; r < net.m; ++r) grad.segment(static_cast<Eigen::Index>(r) * p, p) = g.row(r).transpose();

    rs.loss_interior = 0.5 * rs.s.squaredNorm();
    rs.loss_boundary = 0.5 * rs.h.squaredNorm();
    rs.loss = rs.loss_interior + rs.loss_boundary;
    if (out_rs) *out_rs = rs;
    return rs.loss;
}

Vec ResidualEvaluator::jacobian_vec_product(const model::Network& net, const Vec& v) const {
    check(net);
    if (v.size() != net.param_count()) throw InvalidInput("jacobian_vec_product: bad vector size");
    const Eigen::Index p = net.row_len();
    Mat vm(net.m, p);
    for (int r = 0; r < net.m; ++r) vm.row(r) = v.segment(static_cast<Eigen::Index>(r) * p, p).transpose();

    const double inv_sqrt_m = 1.0 / std::sqrt(static_cast<double>(net.m));
    const Vec q1 = net.w * b_;
    const Vec q2 = (net.w.array().square().matrix()) * A_;
    const Vec e1 = vm * b_;
    const Vec e2 = 2.0 * ((net.w.array() * vm.array()).rowwise() * A_.transpose().array())
                             .rowwise()
                             .sum()
                             .matrix();

    Vec out(n1() + n2());
    Mat z, j0, j1, j2, j3, pmat, xv;
    const double ci = inv_sqrt_m / std::sqrt(static_cast<double>(n1()));
    for (Eigen::Index c = 0; c < n1(); c += kTile) {
        const Eigen::Index t = std::min(kTile, n1() - c);
        const auto xt = xi_.middleRows(c, t);
        z.noalias() = net.w * xt.transpose();
        act::eval_jets(net.kind, z, j0, j1, j2, j3);
        xv.noalias() = vm * xt.transpose();
        pmat = c0_ * j1;
        pmat.array() += j2.array().colwise() * q1.array();
        pmat.array() += j3.array().colwise() * q2.array();
        pmat.array() *= xv.array();
        pmat.array() += j1.array().colwise() * e1.array();
        pmat.array() += j2.array().colwise() * e2.array();
        out.segment(c, t) = ci * (pmat.transpose() * net.a);
    }
    const double cb =
        inv_sqrt_m * std::sqrt(lambda_ / static_cast<double>(std::max<Eigen::Index>(n2(), 1)));
    for (Eigen::Index c = 0; c < n2(); c += kTile) {
        const Eigen::Index t = std::min(kTile, n2() - c);
        const auto yt = xb_.middleRows(c, t);
        z.noalias() = net.w * yt.transpose();
        act::eval_jets(net.kind, z, j0, j1, j2, j3);
        xv.noalias() = vm * yt.transpose();
        j1.array() *= xv.array();
        out.segment(n1() + c, t) = cb * (j1.transpose() * net.a);
    }
    return out;
}

Jacobian ResidualEvaluator::jacobian(const model::Network& net) const {
    check(net);
    Jacobian jac;
    jac.D.resize(net.param_count(), n1() + n2());

    pde::LinearOperator nop;
    nop.c0 = c0_;
    nop.b = b_.head(dim_);
    nop.A = A_.head(dim_);
    const double ci = 1.0 / std::sqrt(static_cast<double>(n1()));
    for (Eigen::Index i = 0; i < n1(); ++i) {
        const Vec x = xi_.row(i).head(dim_).transpose();
        const model::OperatorJet jet = model::apply_operator(net, nop, x);
        for (int r = 0; r < net.m; ++r)
            jac.D.col(i).segment(static_cast<Eigen::Index>(r) * net.row_len(), net.row_len()) =
                ci * jet.grad.row(r).transpose();
    }
    const pde::LinearOperator id = pde::identity_operator(dim_);
    const double cb = std::sqrt(lambda_ / static_cast<double>(std::max<Eigen::Index>(n2(), 1)));
    for (Eigen::Index j = 0; j < n2(); ++j) {
        const Vec y = xb_.row(j).head(dim_).transpose();
        const model::OperatorJet jet = model::apply_operator(net, id, y);
        for (int r = 0; r < net.m; ++r)
            jac.D.col(n1() + j).segment(static_cast<Eigen::Index>(r) * net.row_len(), net.row_len()) =
                cb * jet.grad.row(r).transpose();
    }
    return jac;
}

ResidualSystem residuals(const model::Network& net, const pde::PdeProblem& problem,
                         const sampler::SampleSet& samples, double boundary_weight) {
    return ResidualEvaluator(problem, samples, net.bias_augmented, boundary_weight).residuals(net);
}

Jacobian jacobian(const model::Network& net, const pde::PdeProblem& problem,
                  const sampler::SampleSet& samples, double boundary_weight) {
    return ResidualEvaluator(problem, samples, net.bias_augmented, boundary_weight).jacobian(net);
}

Vec loss_grad(const model::Network& net, const pde::PdeProblem& problem,
              const sampler::SampleSet& samples, double boundary_weight) {
    Vec grad;
    ResidualEvaluator(problem, samples, net.bias_augmented, boundary_weight).loss_and_grad(net, grad);
    return grad;
}

void write_residuals_csv(const ResidualSystem& rs, const std::string& path) {
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (!f) throw InvalidInput("cannot open " + path);
    std::fprintf(f, "index,kind,value\n");
    for (Eigen::Index i = 0; i < rs.s.size(); ++i)
        std::fprintf(f, "%lld,interior,%.17g\n", static_cast<long long>(i), rs.s(i));
    for (Eigen::Index j = 0; j < rs.h.size(); ++j)
        std::fprintf(f, "%lld,boundary,%.17g\n", static_cast<long long>(j), rs.h(j));
    std::fprintf(f, "loss,,%.17g\n", rs.loss);
    std::fclose(f);
}

}  // namespace pinn::residual
