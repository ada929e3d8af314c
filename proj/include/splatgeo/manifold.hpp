#pragma once

#include <string>
#include <vector>

#include "splatgeo/core.hpp"
#include "splatgeo/kdtree.hpp"
#include "splatgeo/laplacian.hpp"

namespace splatgeo {

/// 3x3 matrix of metric pairings of the coordinate functions, eigenvalues
/// descending. Tangent eigenvectors carry (near-)equal positive eigenvalues,
/// the normal eigenvector a (near-)zero one.
struct TangentialKernelMatrix {
  Mat3 m = Mat3::Zero();
  Vec3 eigenvalues = Vec3::Zero();   // descending
  Mat3 eigenvectors = Mat3::Identity();  // columns, matching eigenvalue order
};

std::vector<std::string> validate(const TangentialKernelMatrix& km);

struct ShapeOperatorMatrix {
  Mat3 s_full = Mat3::Zero();
  Mat2 s_tangent = Mat2::Zero();
};

/// Per-point second-moment matrix M = (1/t) sum_j w_j d_j d_j^T with
/// d_j = q_j - q_center. Every entry of the kernel matrix and of the nested
/// operator below reduces to contractions of these.
Mat3 second_moment(const std::vector<Vec3>& positions, const KernelWeights& w);

/// K[d1][d2] = (1/2) * leibniz_defect(phi_d1, phi_d2) = M/2, symmetrized and
/// eigendecomposed. Throws with fewer than 4 neighbors.
TangentialKernelMatrix tangential_kernel_matrix(const std::vector<Vec3>& positions,
                                                const KernelWeights& w);

/// (lambda1 + lambda2)/2 — the factor that maps the two tangent eigenvalues
/// to their theoretical value 1. Throws when lambda1 <= 0.
double calibration_scale(const TangentialKernelMatrix& km);

/// Leading two eigenvectors become the tangent pair, the trailing one the
/// normal; dimension = #(calibrated eigenvalues > threshold).
struct FrameEstimate {
  LocalFrame frame;
  int estimated_dimension = 2;
};
FrameEstimate local_frame_from_kernel(const TangentialKernelMatrix& km, double c,
                                      double dim_threshold = 0.5);

/// Nested-defect shape operator at point i. `moments` holds second_moment for
/// every point (the inner defect is a function over the manifold, evaluated
/// at i's neighbors through their own pass-1 weights).
ShapeOperatorMatrix shape_operator_full(const std::vector<Vec3>& positions, int i,
                                        const LocalFrame& frame,
                                        const KernelWeights& w,
                                        const std::vector<Mat3>& moments);

/// Eigendecomposition of s_tangent / c^2 (two nested operator applications
/// scale quadratically in the calibration factor); eigenvectors realigned to
/// ambient space through the tangent basis.
CurvatureInfo principal_curvatures(const ShapeOperatorMatrix& so,
                                   const LocalFrame& frame, double c);

struct PointDiagnostics {
  Vec3 eigenvalues = Vec3::Zero();  // uncalibrated, descending
  double calibration = 0.0;
  int estimated_dimension = 0;
  bool flagged = false;
  std::string flag_reason;
};

struct EstimationResult {
  std::vector<LocalFrame> frames;
  std::vector<CurvatureInfo> curvatures;
  std::vector<PointDiagnostics> diagnostics;
  double bandwidth_t = 0.0;  // resolved
  double eps = 0.0;          // resolved (varifold runs only)
  double seconds_index = 0.0;
  double seconds_pass1 = 0.0;
  double seconds_pass2 = 0.0;

  std::size_t size() const { return frames.size(); }
};

/// Batch driver. Pass 1 estimates frames and calibration for every point,
/// pass 2 the shape operators and curvatures. Per-point failures are flagged,
/// never fatal. Deterministic for a fixed config, independent of threads.
EstimationResult estimate_all(const PointCloud& cloud, const EstimatorConfig& config);

/// Resolved auto bandwidth: (mean distance to the k-th neighbor over an
/// evenly strided 1% subsample)^2.
double resolve_bandwidth(const KdTree& tree, int k, double requested);

namespace reference {

/// Literal nested-Leibniz composition of the shape operator, built from
/// LocalFunction objects and leibniz_defect calls only. Slow; differential
/// tests pin the production path against it.
ShapeOperatorMatrix shape_operator_nested(const std::vector<Vec3>& positions, int i,
                                          const LocalFrame& frame,
                                          const std::vector<KernelWeights>& weights);

/// Single-threaded estimate_all built on brute-force neighbor scans and the
/// nested reference above.
EstimationResult estimate_all_serial(const PointCloud& cloud,
                                     const EstimatorConfig& config);

}  // namespace reference

}  // namespace splatgeo
