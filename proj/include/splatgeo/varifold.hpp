#pragma once

#include <vector>

#include "splatgeo/core.hpp"
#include "splatgeo/kdtree.hpp"
#include "splatgeo/manifold.hpp"

namespace splatgeo {

/// Weak second fundamental form in the tangent basis [u1 u2] of a point.
struct WsffMatrix {
  Mat2 b = Mat2::Zero();
  bool flagged = false;  // empty effective kernel support
};

std::vector<std::string> validate(const WsffMatrix& w);

/// Compactly supported bump profile: exp(-1/(1-(r/eps)^2)) for r < eps,
/// 0 from eps on.
double kernel_chi(double r, double eps);

/// Pair kernel: 3/2 times the bump. The constant makes the (chi, upsilon)
/// pair consistent, i.e. the weighted sum below converges to the shape
/// operator itself on smooth surfaces (with upsilon = chi it converges to
/// 2/3 of it).
double kernel_upsilon(double r, double eps);

/// Exact analytic derivative of kernel_upsilon in r.
double kernel_upsilon_prime(double r, double eps);

/// Per-pair term contracted into i's tangent basis:
///   2 (P_j U)^T sym(n_i d^T) (P_j U) - (d^T P_j n_i) (U^T P_j U - I)
/// with d = mu_i - mu_j, P_j = I - n_j n_j^T the neighbor's tangent
/// projector and U = [u1_i u2_i].
Mat2 wsff_pair_term(const Vec3& mu_i, const Vec3& mu_j, const LocalFrame& frame_i,
                    const LocalFrame& frame_j);

/// Un-simplified route: the length-scaled tensor contraction the pair term
/// was reduced from. Kept as the algebra oracle for wsff_pair_term.
Mat2 wsff_pair_term_tensor(const Vec3& mu_i, const Vec3& mu_j,
                           const LocalFrame& frame_i, const LocalFrame& frame_j);

/// Kernel-weighted normalized sum of pair terms over the neighbors. Flags the
/// point when no neighbor lies inside the support.
WsffMatrix wsff_matrix(const std::vector<Vec3>& positions, int i,
                       const NeighborList& neighbors,
                       const std::vector<LocalFrame>& frames,
                       const std::vector<double>& masses, double eps);

/// Eigendecomposition of the WSFF; eigenvectors realigned to ambient space.
CurvatureInfo curvatures_from_wsff(const WsffMatrix& w, const LocalFrame& frame);

/// Batch driver. Consumes precomputed frames (this method estimates
/// curvature only). Neighbors are gathered by radius query at the resolved
/// eps so the whole kernel support contributes. Deterministic; per-point
/// failures flagged.
EstimationResult estimate_all_varifold(const PointCloud& cloud,
                                       const std::vector<LocalFrame>& frames,
                                       const EstimatorConfig& config);

/// Resolved auto support radius: 2 * mean distance to the k-th neighbor over
/// an evenly strided 1% subsample.
double resolve_eps(const KdTree& tree, int k, double requested);

}  // namespace splatgeo
