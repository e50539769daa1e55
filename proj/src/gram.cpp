#include "pinn/gram.hpp"

#include <cmath>

#include "pinn/errors.hpp"
#include "pinn/linalg.hpp"

namespace pinn::gram {

GramMatrix gram(const residual::Jacobian& jac) {
    if (!jac.D.allFinite()) throw InvalidInput("gram: non-finite Jacobian");
    Mat g = jac.D.transpose() * jac.D;
    g = 0.5 * (g + g.transpose()).eval();
    return {std::move(g)};
}

namespace {

void require_symmetric(const Mat& g) {
    if (g.rows() != g.cols()) throw InvalidInput("gram: square matrix required");
    const double scale = std::max(g.cwiseAbs().maxCoeff(), 1e-300);
    const double asym = (g - g.transpose()).cwiseAbs().maxCoeff();
    if (asym > 1e-10 * scale) throw InvalidInput("gram: matrix not symmetric");
}

}  // namespace

double min_eigenvalue(const GramMatrix& g) {
    require_symmetric(g.G);
    const Vec eig = linalg::symmetric_eigenvalues(g.G);
    return eig(0);
}

double max_eigenvalue(const GramMatrix& g) {
    require_symmetric(g.G);
    const Vec eig = linalg::symmetric_eigenvalues(g.G);
    return eig(eig.size() - 1);
}

McEstimate gram_infinity_mc(const pde::PdeProblem& problem, const sampler::SampleSet& samples,
                            act::ActivationKind kind, model::InitScale scale, int m_draw, int reps,
                            Rng& rng, bool bias_augmented, double boundary_weight) {
    if (m_draw < 1 || reps < 1) throw InvalidInput("gram_infinity_mc: m_draw, reps >= 1 required");
    const residual::ResidualEvaluator eval(problem, samples, bias_augmented, boundary_weight);
    const Eigen::Index n = samples.total();
    Mat sum = Mat::Zero(n, n);
    Mat sumsq = Mat::Zero(n, n);
    for (int rep = 0; rep < reps; ++rep) {
        const model::Network net = model::init_network(m_draw, static_cast<int>(problem.dim()) - 1,
                                                       kind, scale, rng, bias_augmented);
        const GramMatrix g0 = gram(eval.jacobian(net));
        sum += g0.G;
        sumsq.array() += g0.G.array().square();
    }
    McEstimate est;
    est.mean.G = sum / static_cast<double>(reps);
    if (reps > 1) {
        Mat var = (sumsq - sum.cwiseProduct(sum) / static_cast<double>(reps)) /
                  static_cast<double>(reps - 1);
        est.stderr_entries = (var.cwiseMax(0.0) / static_cast<double>(reps)).cwiseSqrt();
    } else {
        est.stderr_entries = Mat::Zero(n, n);
    }
    return est;
}

Deviation gram_deviation(const GramMatrix& a, const GramMatrix& b) {
    if (a.G.rows() != b.G.rows() || a.G.cols() != b.G.cols())
        throw InvalidInput("gram_deviation: shape mismatch");
    const Mat diff = a.G - b.G;
    Deviation dev;
    dev.frobenius = diff.norm();
    dev.spectral = linalg::spectral_norm_sym(0.5 * (diff + diff.transpose()));
    return dev;
}

}  // namespace pinn::gram
