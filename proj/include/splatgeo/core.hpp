#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <cmath>
#include <limits>
#include <string>
#include <vector>

namespace splatgeo {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat2 = Eigen::Matrix2d;
using Mat3 = Eigen::Matrix3d;

constexpr double kInf = std::numeric_limits<double>::infinity();

/// One anisotropic Gaussian splat: position, rotation (columns are the
/// principal axes), per-axis scales, opacity and color.
struct GaussianPrimitive {
  Vec3 position = Vec3::Zero();
  Mat3 rotation = Mat3::Identity();
  Vec3 scales = Vec3::Ones();
  double opacity = 1.0;
  Vec3 color = Vec3::Constant(0.5);
};

/// Orthonormal tangent pair plus unit normal at a point.
struct LocalFrame {
  Vec3 u1 = Vec3::UnitX();
  Vec3 u2 = Vec3::UnitY();
  Vec3 normal = Vec3::UnitZ();

  Vec3 project_tangent(const Vec3& v) const {
    return u1.dot(v) * u1 + u2.dot(v) * u2;
  }
  Vec3 project_normal(const Vec3& v) const { return normal.dot(v) * normal; }
};

/// Signed principal curvatures with |tau1| >= |tau2|, their ambient-space
/// directions, and the mean absolute curvature (|tau1|+|tau2|)/2.
struct CurvatureInfo {
  double tau1 = 0.0;
  double tau2 = 0.0;
  Vec3 dir1 = Vec3::UnitX();
  Vec3 dir2 = Vec3::UnitY();
  double mac = 0.0;
};

/// Builds CurvatureInfo from an unordered eigenpair set; reorders so that
/// |tau1| >= |tau2| and keeps directions paired with their curvature.
CurvatureInfo make_curvature_info(double tau_a, double tau_b, const Vec3& dir_a,
                                  const Vec3& dir_b);

struct EstimatorConfig {
  int k_neighbors = 20;
  double bandwidth_t = 0.0;   // <= 0 resolves to (mean k-th neighbor distance)^2
  double varifold_eps = 0.0;  // <= 0 resolves to 2 * mean k-th neighbor distance
  double xi_min = 1e-3;
  double xi_max = 0.0;        // <= 0 resolves to mean + 3*std of |tau| over the batch
  bool adaptive_kernel = false;
  std::vector<double> masses;  // empty -> uniform 1
  int threads = 0;             // 0 -> hardware concurrency; 1 -> serial path
  double dim_threshold = 0.5;
};

std::vector<std::string> validate(const EstimatorConfig& cfg);

/// Raw point set with optional attributes. Ground-truth arrays are filled by
/// the analytic samplers only and drive the error statistics of benchmarks.
struct PointCloud {
  std::vector<Vec3> positions;
  std::vector<Vec3> colors;       // empty or same size, components in [0,1]
  std::vector<Mat3> covariances;  // empty or same size, symmetric PSD

  std::vector<LocalFrame> truth_frames;
  std::vector<Vec2> truth_curvatures;        // (tau1, tau2), |tau1| >= |tau2|
  std::vector<Vec3> truth_directions;        // direction of tau1
  std::vector<double> boundary_distance;     // +inf on closed surfaces

  std::size_t size() const { return positions.size(); }
  bool has_colors() const { return colors.size() == positions.size(); }
  bool has_covariances() const { return covariances.size() == positions.size(); }
  bool has_ground_truth() const {
    return truth_frames.size() == positions.size() &&
           truth_curvatures.size() == positions.size();
  }
};

std::vector<std::string> validate(const PointCloud& cloud);

/// Sigma = R diag(s^2) R^T. Total on valid primitives.
Mat3 primitive_covariance(const GaussianPrimitive& p);

std::vector<std::string> validate(const GaussianPrimitive& p);
std::vector<std::string> validate(const LocalFrame& f);
std::vector<std::string> validate(const CurvatureInfo& c,
                                  const LocalFrame* frame = nullptr);

/// Gram-Schmidt on (u1, u2, normal); normal rebuilt as u1 x u2.
LocalFrame orthonormalized(const LocalFrame& f);

inline double angle_between_lines_deg(const Vec3& a, const Vec3& b) {
  const double c =
      std::abs(a.normalized().dot(b.normalized()));
  return std::acos(std::min(1.0, c)) * 180.0 / M_PI;
}

}  // namespace splatgeo
