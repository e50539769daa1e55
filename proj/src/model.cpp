#include "pinn/model.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <vector>

#include "pinn/errors.hpp"

namespace pinn::model {

InitScale scale_from_string(const std::string& name) {
    if (name == "unit") return InitScale::Unit;
    if (name == "invdim") return InitScale::InvDim;
    throw InvalidInput("unknown init scale: " + name);
}

std::string to_string(InitScale scale) {
    return scale == InitScale::Unit ? "unit" : "invdim";
}

Vec Network::flatten() const {
    Vec out(param_count());
    const int p = row_len();
    for (int r = 0; r < m; ++r) out.segment(static_cast<Eigen::Index>(r) * p, p) = w.row(r).transpose();
    return out;
}

void Network::unflatten(const Vec& params) {
    if (params.size() != param_count()) throw InvalidInput("unflatten: size mismatch");
    const int p = row_len();
    for (int r = 0; r < m; ++r) w.row(r) = params.segment(static_cast<Eigen::Index>(r) * p, p).transpose();
}

Network init_network(int m, int d, act::ActivationKind kind, InitScale scale, Rng& rng,
                     bool bias_augmented) {
    if (m < 1 || d < 1) throw InvalidInput("init_network: m, d >= 1 required");
    Network net;
    net.m = m;
    net.d = d;
    net.bias_augmented = bias_augmented;
    net.kind = kind;
    net.scale = scale;
    net.seed = rng.state();
    const int p = net.row_len();
    const double sd = scale == InitScale::Unit ? 1.0 : 1.0 / std::sqrt(static_cast<double>(p));
    net.w.resize(m, p);
    for (int r = 0; r < m; ++r)
        for (int j = 0; j < p; ++j) net.w(r, j) = sd * rng.normal();
    net.a.resize(m);
    for (int r = 0; r < m; ++r) net.a(r) = rng.sign();
    return net;
}

namespace {

// Input with the constant coordinate appended when the model uses one.
Vec augment(const Network& net, const Vec& x) {
    if (x.size() != net.input_dim()) throw InvalidInput("model: input dimension mismatch");
    if (!net.bias_augmented) return x;
    Vec xa(x.size() + 1);
    xa.head(x.size()) = x;
    xa(x.size()) = 1.0;
    return xa;
}

}  // namespace

double forward(const Network& net, const Vec& x) {
    const Vec xa = augment(net, x);
    const Vec z = net.w * xa;
    double sum = 0.0;
    for (int r = 0; r < net.m; ++r)
        sum += net.a(r) * act::eval_jet(net.kind, z(r)).v0;
    return sum / std::sqrt(static_cast<double>(net.m));
}

Vec forward_batch(const Network& net, const Mat& points) {
    if (points.cols() != net.input_dim()) throw InvalidInput("forward_batch: input dimension mismatch");
    const Eigen::Index n = points.rows();
    Mat xa(n, net.row_len());
    xa.leftCols(net.input_dim()) = points;
    if (net.bias_augmented) xa.col(net.input_dim()).setOnes();

    const Vec am = net.a / std::sqrt(static_cast<double>(net.m));
    Vec out(n);
    Mat z, j0, j1, j2, j3;
    constexpr Eigen::Index tile = 512;
    for (Eigen::Index c = 0; c < n; c += tile) {
        const Eigen::Index t = std::min(tile, n - c);
        z.noalias() = net.w * xa.middleRows(c, t).transpose();
        act::eval_jets(net.kind, z, j0, j1, j2, j3);
        out.segment(c, t) = j0.transpose() * am;
    }
    return out;
}

OperatorJet apply_operator(const Network& net, const pde::LinearOperator& op, const Vec& x) {
    if (op.dim() != net.input_dim()) throw InvalidInput("apply_operator: operator dimension mismatch");
    const Vec xa = augment(net, x);
    const int p = net.row_len();

    // Coefficients extended with a zero entry for the bias coordinate.
    Vec b = Vec::Zero(p);
    Vec A = Vec::Zero(p);
    b.head(op.dim()) = op.b;
    A.head(op.dim()) = op.A;

    const double inv_sqrt_m = 1.0 / std::sqrt(static_cast<double>(net.m));
    OperatorJet out;
    out.grad.resize(net.m, p);
    double sum = 0.0;
    for (int r = 0; r < net.m; ++r) {
        const Vec wr = net.w.row(r).transpose();
        const double z = wr.dot(xa);
        const act::Jet4 j = act::eval_jet(net.kind, z);
        const double q1 = b.dot(wr);
        const double q2 = A.dot(wr.cwiseProduct(wr));
        sum += net.a(r) * (op.c0 * j.v0 + j.v1 * q1 + j.v2 * q2);
        const double xcoef = op.c0 * j.v1 + j.v2 * q1 + j.v3 * q2;
        out.grad.row(r) = (net.a(r) * inv_sqrt_m) *
                          (xcoef * xa + j.v1 * b + 2.0 * j.v2 * A.cwiseProduct(wr)).transpose();
    }
    out.value = sum * inv_sqrt_m;
    return out;
}

void save_network(const Network& net, const std::string& path) {
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (!f) throw InvalidInput("cannot open " + path);
    std::fprintf(f, "%d,%d,%s,%s,%llu,%d\n", net.m, net.d, act::to_string(net.kind).c_str(),
                 to_string(net.scale).c_str(), static_cast<unsigned long long>(net.seed),
                 net.bias_augmented ? 1 : 0);
    for (int r = 0; r < net.m; ++r) {
        for (int j = 0; j < net.row_len(); ++j)
            std::fprintf(f, j + 1 == net.row_len() ? "%.17g\n" : "%.17g,", net.w(r, j));
    }
    for (int r = 0; r < net.m; ++r)
        std::fprintf(f, r + 1 == net.m ? "%d\n" : "%d,", net.a(r) > 0 ? 1 : -1);
    std::fclose(f);
}

Network load_network(const std::string& path) {
    std::FILE* f = std::fopen(path.c_str(), "r");
    if (!f) throw InvalidInput("cannot open " + path);
    char kind_buf[32], scale_buf[32];
    Network net;
    unsigned long long seed = 0;
    int bias = 0;
    if (std::fscanf(f, "%d,%d,%31[^,],%31[^,],%llu,%d\n", &net.m, &net.d, kind_buf, scale_buf,
                    &seed, &bias) != 6) {
        std::fclose(f);
        throw InvalidInput("load_network: bad header in " + path);
    }
    net.kind = act::kind_from_string(kind_buf);
    net.scale = scale_from_string(scale_buf);
    net.seed = seed;
    net.bias_augmented = bias != 0;
    const int p = net.row_len();
    net.w.resize(net.m, p);
    net.a.resize(net.m);
    for (int r = 0; r < net.m; ++r)
        for (int j = 0; j < p; ++j)
            if (std::fscanf(f, j + 1 == p ? "%lf\n" : "%lf,", &net.w(r, j)) != 1) {
                std::fclose(f);
                throw InvalidInput("load_network: bad weight row in " + path);
            }
    for (int r = 0; r < net.m; ++r) {
        int s = 0;
        if (std::fscanf(f, r + 1 == net.m ? "%d\n" : "%d,", &s) != 1 || (s != 1 && s != -1)) {
            std::fclose(f);
            throw InvalidInput("load_network: bad sign vector in " + path);
        }
        net.a(r) = s;
    }
    std::fclose(f);
    return net;
}

}  // namespace pinn::model
