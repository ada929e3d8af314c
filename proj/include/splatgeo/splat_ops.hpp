#pragma once

#include <vector>

#include "splatgeo/core.hpp"
#include "splatgeo/kdtree.hpp"

namespace splatgeo {

/// |tau| values clamped to [xi_min, xi_max], ordered t1 >= t2.
struct ClampedCurvature {
  double t1 = 0.0;
  double t2 = 0.0;
};

ClampedCurvature clamp_curvature(double tau1, double tau2, double xi_min,
                                 double xi_max);

/// Average distance to the k nearest neighbors. Throws on an isolated point.
double neighbor_scale(const KdTree& index, int i, int k);

/// Mean absolute curvature (|tau1| + |tau2|) / 2.
double mac(const CurvatureInfo& curv);

/// Curvature-guided covariance warm-up: columns of R are (dir2, dir1, normal)
/// re-orthonormalized with determinant fixed to +1; scales are
/// ((s_nbr/2) sqrt(t1/t2), (s_nbr/2) sqrt(t2/t1), xi_min) with the clamped
/// curvature magnitudes. s1 s2 = (s_nbr/2)^2 and s1/s2 = t1/t2 hold exactly.
void warmup_covariance(const LocalFrame& frame, const CurvatureInfo& curv,
                       double s_nbr, double xi_min, double xi_max, Mat3* rotation,
                       Vec3* scales);

struct UpsampledPoint {
  Vec3 position;
  Vec3 color;       // midpointed when the cloud has colors
  int source_a = 0;  // the flat point
  int source_b = 0;  // its neighbor
};

/// Midpoint upsampling of flat regions: every point whose MAC is below
/// xi_min emits midpoints with its k nearest neighbors; coinciding midpoints
/// (within 1e-9) are deduplicated.
std::vector<UpsampledPoint> upsample_flat_regions(const PointCloud& cloud,
                                                  const std::vector<CurvatureInfo>& curvatures,
                                                  double xi_min, int k);

/// mu - omega * (g_tangential + min(xi_min/||g_normal||, 1) * g_normal).
/// A zero normal component passes through unchanged (factor treated as 1).
Vec3 truncated_gradient_step(const Vec3& mu, const Vec3& grad, const LocalFrame& frame,
                             double omega, double xi_min);

/// Clone placement: mu + g_tangential + min(xi_min/||g_normal||, 1) * g_normal.
Vec3 clone_primitive(const Vec3& mu, const Vec3& accum_grad, const LocalFrame& frame,
                     double xi_min);

/// Split placement: mu + (rho2/t2) dir2 + (rho1/t1) dir1 + rho3 xi_min normal,
/// with clamped curvature magnitudes in the denominators.
Vec3 split_primitive(const Vec3& mu, const LocalFrame& frame,
                     const ClampedCurvature& curv, const CurvatureInfo& dirs,
                     const Vec3& rho, double xi_min);

struct RegularizerResult {
  double loss = 0.0;
  Vec3 grad_scales = Vec3::Zero();
  Mat3 grad_rotation = Mat3::Zero();  // column d = d(loss)/d(r_d)
};

/// Hinge penalty max(0, s1/s2 - t1/t2 - xi_min) + s3^2 with analytic
/// gradient in (s1, s2, s3); the hinge subgradient at the kink is 0.
RegularizerResult scale_regularizer(double s1, double s2, double s3,
                                    const ClampedCurvature& curv, double xi_min);

/// Alignment penalty sum_d (1 - <r_d, ref_d>)^2 with references
/// (dir2, dir1, normal). Reference signs are canonicalized to a nonnegative
/// inner product with the matched column first: principal directions and
/// normals are only defined up to sign.
RegularizerResult rotation_regularizer(const Mat3& rotation, const LocalFrame& frame,
                                       const CurvatureInfo& curv);

/// mean + 3*std of |tau| over a batch; the auto rule for xi_max. Floored at
/// 2*xi_min so the clamp interval never collapses on flat clouds.
double resolve_xi_max(const std::vector<CurvatureInfo>& curvatures, double xi_min);

}  // namespace splatgeo
