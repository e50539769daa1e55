#pragma once

#include <string>

#include "pinn/pde.hpp"
#include "pinn/rng.hpp"
#include "pinn/types.hpp"

namespace pinn::sampler {

/// Collocation points in normalized coordinates (norms at most 1); rows are
/// points. Physical coordinates are recovered via problem.to_physical.
struct SampleSet {
    Mat interior;  // n1 x dim
    Mat boundary;  // n2 x dim

    Eigen::Index n1() const { return interior.rows(); }
    Eigen::Index n2() const { return boundary.rows(); }
    Eigen::Index dim() const { return interior.cols(); }
    Eigen::Index total() const { return n1() + n2(); }

    /// Row i of the union (interior first, then boundary).
    Vec point(Eigen::Index i) const;

    /// One point per row: x0..xd, flag (interior|boundary).
    void write_csv(const std::string& path) const;
};

/// True iff every pair (u, v) satisfies 1 - |<u,v>| / (||u|| ||v||) > tol.
/// Rows of `points` are the vectors. Throws on zero-norm rows.
bool check_nonparallel(const Mat& points, double tol);

/// Uniform interior and boundary samples for the problem, rescaled so every
/// stored point has norm at most 1. Boundary points are allocated to faces
/// proportionally to face measure, and satisfy the face predicate exactly
/// before rescaling.
///
/// The non-parallel condition is enforced on the vectors the model will see:
/// with `augmented` the constant coordinate 1 is appended for the check (so
/// parallel means equal), otherwise the raw points are checked. Violating
/// draws are rejected and redrawn; a drained budget raises SamplingFailure.
SampleSet sample_problem_points(const pde::PdeProblem& problem, int n1, int n2, Rng& rng,
                                bool augmented = true, double tol = 1e-12);

}  // namespace pinn::sampler
