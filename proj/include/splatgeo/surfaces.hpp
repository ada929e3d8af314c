#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "splatgeo/core.hpp"
#include "splatgeo/kdtree.hpp"

namespace splatgeo {

enum class SurfaceKind { Plane, Sphere, Cylinder, Torus, Helicoid };

/// Parametric ground-truth surface with a rigid pose. Open surfaces carry
/// patch extents so samples can report their distance to the boundary.
struct AnalyticSurface {
  SurfaceKind kind = SurfaceKind::Sphere;
  double radius = 1.0;        // sphere R, cylinder r, torus r_minor
  double major_radius = 2.0;  // torus R_major
  double pitch = 1.0;         // helicoid
  double half_extent = 1.0;   // plane half side
  double length = 2.0;        // cylinder length
  double rho_min = 0.5;       // helicoid radial band
  double rho_max = 1.5;
  Mat3 pose_rotation = Mat3::Identity();
  Vec3 pose_translation = Vec3::Zero();

  static AnalyticSurface plane(double half = 1.0);
  static AnalyticSurface sphere(double R);
  static AnalyticSurface cylinder(double r, double length = 0.0);  // 0 -> 4r
  static AnalyticSurface torus(double R_major, double r_minor);
  static AnalyticSurface helicoid(double pitch);
};

std::vector<std::string> validate(const AnalyticSurface& s);

/// "sphere:1.0", "cylinder:0.5", "torus:2.0,0.5", "helicoid:1.0", "plane".
AnalyticSurface parse_surface_spec(const std::string& spec);
std::string surface_spec_string(const AnalyticSurface& s);

/// n area-uniform samples with exact per-point frame and principal
/// curvatures recorded before noise; isotropic Gaussian noise of std
/// noise_sigma is then added to positions. Deterministic per seed.
PointCloud sample_surface(const AnalyticSurface& surface, int n, std::uint64_t seed,
                          double noise_sigma);

struct SurfacePointInfo {
  LocalFrame frame;
  double tau1 = 0.0;  // |tau1| >= |tau2|
  double tau2 = 0.0;
  Vec3 dir1 = Vec3::UnitX();
  Vec3 dir2 = Vec3::UnitY();
};

/// Exact frame and curvatures at a point lying on the surface (within 1e-9);
/// throws for off-surface points.
SurfacePointInfo analytic_curvature(const AnalyticSurface& surface, const Vec3& point);

/// Local-PCA baseline: eigen-decomposition of the centered neighbor
/// covariance; the smallest-eigenvalue direction is the normal. Throws on
/// rank-deficient neighborhoods.
LocalFrame pca_baseline_frame(const KdTree& index, int i, int k);

}  // namespace splatgeo
