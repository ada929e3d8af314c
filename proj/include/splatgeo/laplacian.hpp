#pragma once

#include <vector>

#include "splatgeo/core.hpp"
#include "splatgeo/kdtree.hpp"

namespace splatgeo {

/// Row-normalized kernel weights over one point's neighbors, together with
/// the bandwidth they were built with.
struct KernelWeights {
  int center_id = -1;
  std::vector<int> neighbor_ids;
  std::vector<double> weights;  // sum to 1
  double bandwidth = 0.0;

  std::size_t size() const { return neighbor_ids.size(); }
};

std::vector<std::string> validate(const KernelWeights& w);

/// A scalar function sampled at a point and its neighbors, paired with some
/// KernelWeights of the same length.
struct LocalFunction {
  double value_at_center = 0.0;
  std::vector<double> values_at_neighbors;
};

/// weights ~ exp(-||q_i - q_j||^2 / t), normalized. Throws when every
/// neighbor coincides with the center (duplicate points).
KernelWeights gaussian_kernel_weights(const std::vector<Vec3>& positions, int i,
                                      const NeighborList& neighbors, double t);

/// Covariance-adaptive variant: the per-pair bandwidth matrix is
/// t * sym(Sigma_i Sigma_j) + xi_min * I. Throws if that matrix is not
/// positive definite after symmetrization and jitter.
KernelWeights adaptive_kernel_weights(const std::vector<Vec3>& positions, int i,
                                      const NeighborList& neighbors, double t,
                                      const std::vector<Mat3>& covariances,
                                      double xi_min);

/// Uncalibrated pointwise operator value (1/t) * sum_j w_j (f_j - f_center).
/// The unknown overall constant is fixed downstream by the calibration scale.
double apply_laplacian(const LocalFunction& f, const KernelWeights& w);

/// Leibniz defect in product form: (1/t) * sum_j w_j (f_j - f0)(h_j - h0).
/// Algebraically identical to L[f h] - f0 L[h] - h0 L[f] but numerically
/// stable (a weighted sum of products of differences).
double leibniz_defect(const LocalFunction& f, const LocalFunction& h,
                      const KernelWeights& w);

/// Three-Laplacian form of the defect, kept as the cross-check oracle for
/// the product form.
double leibniz_defect_via_laplacians(const LocalFunction& f, const LocalFunction& h,
                                     const KernelWeights& w);

/// Coordinate d of positions relative to an origin, sampled over w's center
/// and neighbors. The origin may differ from w's center point.
LocalFunction coordinate_function(const std::vector<Vec3>& positions,
                                  const Vec3& origin, const KernelWeights& w, int d);

/// Height <normal, q' - origin>, sampled over w's center and neighbors.
LocalFunction height_function(const std::vector<Vec3>& positions, const Vec3& origin,
                              const Vec3& normal, const KernelWeights& w);

}  // namespace splatgeo
