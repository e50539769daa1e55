#include "pinn/sampler.hpp"

#include <cmath>
#include <cstdio>
#include <vector>

#include "pinn/errors.hpp"

namespace pinn::sampler {

Vec SampleSet::point(Eigen::Index i) const {
    if (i < n1()) return interior.row(i).transpose();
    return boundary.row(i - n1()).transpose();
}

void SampleSet::write_csv(const std::string& path) const {
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (!f) throw InvalidInput("cannot open " + path);
    for (Eigen::Index j = 0; j < dim(); ++j) std::fprintf(f, "x%lld,", static_cast<long long>(j));
    std::fprintf(f, "flag\n");
    auto dump = [&](const Mat& pts, const char* flag) {
        for (Eigen::Index i = 0; i < pts.rows(); ++i) {
            for (Eigen::Index j = 0; j < pts.cols(); ++j)
                std::fprintf(f, "%.17g,", pts(i, j));
            std::fprintf(f, "%s\n", flag);
        }
    };
    dump(interior, "interior");
    dump(boundary, "boundary");
    std::fclose(f);
}

bool check_nonparallel(const Mat& points, double tol) {
    if (!(tol > 0.0)) throw InvalidInput("check_nonparallel: tol > 0 required");
    const Eigen::Index n = points.rows();
    Vec norms(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        norms(i) = points.row(i).norm();
        if (norms(i) == 0.0) throw InvalidInput("check_nonparallel: zero-norm point");
    }
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = i + 1; j < n; ++j) {
            const double c = std::abs(points.row(i).dot(points.row(j))) / (norms(i) * norms(j));
            if (!(1.0 - c > tol)) return false;
        }
    return true;
}

namespace {

// Cosine-distance check of one candidate row against rows [0, count).
bool clears_existing(const Mat& pts, Eigen::Index count, const Vec& cand, double tol) {
    const double cn = cand.norm();
    if (cn == 0.0) return false;
    for (Eigen::Index i = 0; i < count; ++i) {
        const double c = std::abs(pts.row(i).dot(cand)) / (pts.row(i).norm() * cn);
        if (!(1.0 - c > tol)) return false;
    }
    return true;
}

Vec draw_interior(const pde::Domain& dom, Rng& rng) {
    const Eigen::Index n = dom.dim();
    Vec x(n);
    for (int attempt = 0; attempt < 64; ++attempt) {
        for (Eigen::Index i = 0; i < n; ++i) x(i) = rng.uniform(dom.lo(i), dom.hi(i));
        if (dom.strictly_inside(x)) return x;
    }
    throw SamplingFailure("interior sampling failed (degenerate domain?)");
}

Vec draw_boundary(const pde::Domain& dom, const std::vector<pde::Domain::Face>& faces,
                  const std::vector<double>& cumulative, Rng& rng) {
    const double r = rng.uniform() * cumulative.back();
    std::size_t pick = 0;
    while (pick + 1 < cumulative.size() && r >= cumulative[pick]) ++pick;
    const auto& face = faces[pick];
    Vec y(dom.dim());
    for (Eigen::Index i = 0; i < dom.dim(); ++i)
        y(i) = (i == face.axis) ? face.value : rng.uniform(dom.lo(i), dom.hi(i));
    return y;
}

}  // namespace

SampleSet sample_problem_points(const pde::PdeProblem& problem, int n1, int n2, Rng& rng,
                                bool augmented, double tol) {
    if (n1 < 1 || n2 < 1) throw InvalidInput("sample_problem_points: n1, n2 >= 1 required");
    const pde::Domain& dom = problem.domain;
    for (Eigen::Index i = 0; i < dom.dim(); ++i)
        if (!(dom.extent(i) > 0.0)) throw InvalidInput("sample_problem_points: zero-measure domain");

    const auto faces = dom.boundary_faces();
    std::vector<double> cumulative;
    double total = 0.0;
    for (const auto& f : faces) {
        total += f.measure;
        cumulative.push_back(total);
    }
    if (!(total > 0.0)) throw InvalidInput("sample_problem_points: zero-measure boundary");

    const double s = problem.scale;
    const Eigen::Index dim = dom.dim();
    const Eigen::Index acols = augmented ? dim + 1 : dim;
    Mat seen(n1 + n2, acols);  // normalized (+ constant coordinate) for the parallel check

    auto as_checked = [&](const Vec& x_phys) {
        Vec v(acols);
        v.head(dim) = x_phys / s;
        if (augmented) v(dim) = 1.0;
        return v;
    };

    SampleSet set;
    set.interior.resize(n1, dim);
    set.boundary.resize(n2, dim);

    long budget = 1000L * (n1 + n2) + 1000L;
    Eigen::Index count = 0;
    for (int i = 0; i < n1 + n2; ++i) {
        const bool is_boundary = i >= n1;
        while (true) {
            if (--budget < 0) throw SamplingFailure("sample_problem_points: resampling budget exhausted");
            const Vec x = is_boundary ? draw_boundary(dom, faces, cumulative, rng)
                                      : draw_interior(dom, rng);
            const Vec v = as_checked(x);
            if (!clears_existing(seen, count, v, tol)) continue;
            seen.row(count++) = v;
            if (is_boundary)
                set.boundary.row(i - n1) = x.transpose() / s;
            else
                set.interior.row(i) = x.transpose() / s;
            break;
        }
    }
    return set;
}

}  // namespace pinn::sampler
