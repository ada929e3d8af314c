#include "splatgeo/surfaces.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <random>
#include <stdexcept>

namespace splatgeo {

namespace {

constexpr double kGolden = 0.6180339887498949;  // 1/phi
constexpr double kTwoPi = 2.0 * M_PI;

// engine-independent uniform double in [0, 1)
struct Rng {
  explicit Rng(std::uint64_t seed) : engine(seed) {}
  double uniform() {
    return static_cast<double>(engine() >> 11) * 0x1.0p-53;
  }
  double normal() {
    // Box-Muller, one value per call (the spare is dropped to keep the
    // stream layout simple and reproducible)
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(kTwoPi * u2);
  }
  std::mt19937_64 engine;
};

double frac(double x) { return x - std::floor(x); }

// jittered grid over the unit square: n cells spread over rows by largest
// remainder, one uniform point per cell
void jittered_unit_square(int n, double aspect, Rng& rng, std::vector<Vec2>* out) {
  out->clear();
  out->reserve(n);
  int rows = std::max(1, static_cast<int>(std::llround(std::sqrt(n / std::max(aspect, 1e-12)))));
  rows = std::min(rows, n);
  std::vector<int> quota(rows, 0);
  int assigned = 0;
  for (int j = 0; j < rows; ++j) {
    quota[j] = static_cast<int>((static_cast<long long>(n) * (j + 1)) / rows -
                                (static_cast<long long>(n) * j) / rows);
    assigned += quota[j];
  }
  (void)assigned;
  for (int j = 0; j < rows; ++j) {
    const int cols = quota[j];
    for (int c = 0; c < cols; ++c) {
      const double v = (j + rng.uniform()) / rows;
      const double u = (c + rng.uniform()) / cols;
      out->push_back({u, v});
    }
  }
}

struct Sample {
  Vec3 position = Vec3::Zero();
  LocalFrame frame;
  double tau1 = 0.0;
  double tau2 = 0.0;
  Vec3 dir1 = Vec3::UnitX();
  Vec3 dir2 = Vec3::UnitY();
  double boundary_distance = kInf;
};

Sample plane_sample(const AnalyticSurface& s, const Vec2& uv) {
  Sample p;
  const double x = (2.0 * uv.x() - 1.0) * s.half_extent;
  const double y = (2.0 * uv.y() - 1.0) * s.half_extent;
  p.position = {x, y, 0.0};
  p.frame = LocalFrame{};
  p.tau1 = p.tau2 = 0.0;
  p.dir1 = Vec3::UnitX();
  p.dir2 = Vec3::UnitY();
  p.boundary_distance = s.half_extent - std::max(std::abs(x), std::abs(y));
  return p;
}

Sample sphere_sample_at(const AnalyticSurface& s, double z_unit, double phi) {
  Sample p;
  const double rho = std::sqrt(std::max(0.0, 1.0 - z_unit * z_unit));
  const Vec3 n(rho * std::cos(phi), rho * std::sin(phi), z_unit);
  p.position = s.radius * n;
  p.frame.normal = n;
  p.frame.u1 = std::abs(n.z()) < 0.9 ? Vec3(Vec3::UnitZ().cross(n)).normalized()
                                     : Vec3(Vec3::UnitX().cross(n)).normalized();
  p.frame.u2 = n.cross(p.frame.u1);
  p.tau1 = p.tau2 = 1.0 / s.radius;
  p.dir1 = p.frame.u1;
  p.dir2 = p.frame.u2;
  p.boundary_distance = kInf;
  return p;
}

Sample cylinder_sample(const AnalyticSurface& s, const Vec2& uv) {
  Sample p;
  const double phi = kTwoPi * uv.x();
  const double z = (uv.y() - 0.5) * s.length;
  const Vec3 n(std::cos(phi), std::sin(phi), 0.0);
  p.position = Vec3(s.radius * n.x(), s.radius * n.y(), z);
  p.frame.normal = n;
  p.frame.u1 = Vec3(-std::sin(phi), std::cos(phi), 0.0);
  p.frame.u2 = Vec3::UnitZ();
  p.tau1 = 1.0 / s.radius;
  p.tau2 = 0.0;
  p.dir1 = p.frame.u1;
  p.dir2 = p.frame.u2;
  p.boundary_distance = 0.5 * s.length - std::abs(z);
  return p;
}

// CDF of the torus tube angle under the area measure (R + r cos theta)
double torus_theta_from_cdf(double R, double r, double v) {
  double lo = 0.0, hi = kTwoPi;
  for (int it = 0; it < 60; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double cdf = (R * mid + r * std::sin(mid)) / (kTwoPi * R);
    (cdf < v ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

Sample torus_sample(const AnalyticSurface& s, const Vec2& uv) {
  Sample p;
  const double phi = kTwoPi * uv.x();
  const double theta = torus_theta_from_cdf(s.major_radius, s.radius, uv.y());
  const double ct = std::cos(theta), st = std::sin(theta);
  const double cp = std::cos(phi), sp = std::sin(phi);
  p.position = Vec3((s.major_radius + s.radius * ct) * cp,
                    (s.major_radius + s.radius * ct) * sp, s.radius * st);
  p.frame.normal = Vec3(ct * cp, ct * sp, st);
  p.dir1 = Vec3(-st * cp, -st * sp, ct);  // around the tube
  p.dir2 = Vec3(-sp, cp, 0.0);            // around the ring
  p.frame.u1 = p.dir1;
  p.frame.u2 = p.dir2;
  p.tau1 = 1.0 / s.radius;
  p.tau2 = ct / (s.major_radius + s.radius * ct);
  p.boundary_distance = kInf;
  return p;
}

// CDF of the helicoid radial coordinate under sqrt(rho^2 + c^2) d rho
double helicoid_rho_from_cdf(const AnalyticSurface& s, double v) {
  const double c = s.pitch;
  auto F = [&](double y) {
    const double w = std::sqrt(y * y + c * c);
    return 0.5 * (y * w + c * c * std::log(y + w));
  };
  const double flo = F(s.rho_min), fhi = F(s.rho_max);
  double lo = s.rho_min, hi = s.rho_max;
  for (int it = 0; it < 60; ++it) {
    const double mid = 0.5 * (lo + hi);
    ((F(mid) - flo) / (fhi - flo) < v ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

Sample helicoid_sample(const AnalyticSurface& s, const Vec2& uv) {
  Sample p;
  const double c = s.pitch;
  const double rho = helicoid_rho_from_cdf(s, uv.x());
  const double phi = (uv.y() - 0.5) * kTwoPi;
  const double cp = std::cos(phi), sp = std::sin(phi);
  p.position = Vec3(rho * cp, rho * sp, c * phi);
  const double den = std::sqrt(rho * rho + c * c);
  p.frame.normal = Vec3(c * sp, -c * cp, rho) / den;
  const Vec3 e1(cp, sp, 0.0);
  const Vec3 e2 = Vec3(-rho * sp, rho * cp, c) / den;
  const double kappa = c / (rho * rho + c * c);
  p.tau1 = kappa;
  p.tau2 = -kappa;
  p.dir1 = ((e1 - e2) / std::sqrt(2.0)).normalized();
  p.dir2 = ((e1 + e2) / std::sqrt(2.0)).normalized();
  p.frame.u1 = e1;
  p.frame.u2 = e2;
  const double edge_rho = std::min(rho - s.rho_min, s.rho_max - rho);
  const double edge_phi = (M_PI - std::abs(phi)) * den;
  p.boundary_distance = std::min(edge_rho, edge_phi);
  return p;
}

void append(PointCloud* cloud, const AnalyticSurface& s, const Sample& raw) {
  Sample p = raw;
  const Mat3& rot = s.pose_rotation;
  p.position = rot * p.position + s.pose_translation;
  p.frame.u1 = rot * p.frame.u1;
  p.frame.u2 = rot * p.frame.u2;
  p.frame.normal = rot * p.frame.normal;
  p.dir1 = rot * p.dir1;
  p.dir2 = rot * p.dir2;
  cloud->positions.push_back(p.position);
  cloud->truth_frames.push_back(p.frame);
  if (std::abs(p.tau1) >= std::abs(p.tau2)) {
    cloud->truth_curvatures.push_back({p.tau1, p.tau2});
    cloud->truth_directions.push_back(p.dir1);
  } else {
    cloud->truth_curvatures.push_back({p.tau2, p.tau1});
    cloud->truth_directions.push_back(p.dir2);
  }
  cloud->boundary_distance.push_back(p.boundary_distance);
}

}  // namespace

AnalyticSurface AnalyticSurface::plane(double half) {
  AnalyticSurface s;
  s.kind = SurfaceKind::Plane;
  s.half_extent = half;
  return s;
}

AnalyticSurface AnalyticSurface::sphere(double R) {
  AnalyticSurface s;
  s.kind = SurfaceKind::Sphere;
  s.radius = R;
  return s;
}

AnalyticSurface AnalyticSurface::cylinder(double r, double length) {
  AnalyticSurface s;
  s.kind = SurfaceKind::Cylinder;
  s.radius = r;
  s.length = length > 0.0 ? length : 4.0 * r;
  return s;
}

AnalyticSurface AnalyticSurface::torus(double R_major, double r_minor) {
  AnalyticSurface s;
  s.kind = SurfaceKind::Torus;
  s.major_radius = R_major;
  s.radius = r_minor;
  return s;
}

AnalyticSurface AnalyticSurface::helicoid(double pitch) {
  AnalyticSurface s;
  s.kind = SurfaceKind::Helicoid;
  s.pitch = pitch;
  return s;
}

std::vector<std::string> validate(const AnalyticSurface& s) {
  std::vector<std::string> v;
  if (!(s.radius > 0.0)) v.push_back("radius not positive");
  if (s.kind == SurfaceKind::Torus && !(s.major_radius > s.radius))
    v.push_back("torus major radius must exceed minor radius");
  if (s.kind == SurfaceKind::Helicoid && !(s.pitch > 0.0))
    v.push_back("helicoid pitch not positive");
  const Mat3 rtr = s.pose_rotation.transpose() * s.pose_rotation;
  if ((rtr - Mat3::Identity()).cwiseAbs().maxCoeff() > 1e-9)
    v.push_back("pose rotation not orthonormal");
  return v;
}

AnalyticSurface parse_surface_spec(const std::string& spec) {
  const auto colon = spec.find(':');
  const std::string name = spec.substr(0, colon);
  std::vector<double> args;
  if (colon != std::string::npos) {
    std::string rest = spec.substr(colon + 1);
    std::size_t pos = 0;
    while (pos < rest.size()) {
      std::size_t next = rest.find(',', pos);
      if (next == std::string::npos) next = rest.size();
      args.push_back(std::stod(rest.substr(pos, next - pos)));
      pos = next + 1;
    }
  }
  if (name == "plane") return AnalyticSurface::plane(args.empty() ? 1.0 : args[0]);
  if (name == "sphere") return AnalyticSurface::sphere(args.empty() ? 1.0 : args[0]);
  if (name == "cylinder")
    return AnalyticSurface::cylinder(args.empty() ? 0.5 : args[0],
                                     args.size() > 1 ? args[1] : 0.0);
  if (name == "torus")
    return AnalyticSurface::torus(args.empty() ? 2.0 : args[0],
                                  args.size() > 1 ? args[1] : 0.5);
  if (name == "helicoid")
    return AnalyticSurface::helicoid(args.empty() ? 1.0 : args[0]);
  throw std::invalid_argument("unknown surface spec: " + spec);
}

std::string surface_spec_string(const AnalyticSurface& s) {
  switch (s.kind) {
    case SurfaceKind::Plane: return "plane:" + std::to_string(s.half_extent);
    case SurfaceKind::Sphere: return "sphere:" + std::to_string(s.radius);
    case SurfaceKind::Cylinder:
      return "cylinder:" + std::to_string(s.radius) + "," + std::to_string(s.length);
    case SurfaceKind::Torus:
      return "torus:" + std::to_string(s.major_radius) + "," + std::to_string(s.radius);
    case SurfaceKind::Helicoid: return "helicoid:" + std::to_string(s.pitch);
  }
  return "?";
}

PointCloud sample_surface(const AnalyticSurface& surface, int n, std::uint64_t seed,
                          double noise_sigma) {
  if (n < 1) throw std::invalid_argument("sample_surface: n < 1");
  {
    const auto issues = validate(surface);
    if (!issues.empty())
      throw std::invalid_argument("sample_surface: " + issues.front());
  }
  Rng rng(seed);
  PointCloud cloud;
  cloud.positions.reserve(n);
  cloud.truth_frames.reserve(n);
  cloud.truth_curvatures.reserve(n);
  cloud.truth_directions.reserve(n);
  cloud.boundary_distance.reserve(n);

  if (surface.kind == SurfaceKind::Sphere) {
    // golden-spiral lattice with a seeded toroidal shift; low discrepancy
    // keeps neighborhood second moments isotropic at small k
    const double u1 = rng.uniform(), u2 = rng.uniform();
    for (int i = 0; i < n; ++i) {
      const double z = 1.0 - 2.0 * frac((i + 0.5) / n + u1);
      const double phi = kTwoPi * frac(i * kGolden + u2);
      append(&cloud, surface, sphere_sample_at(surface, z, phi));
    }
  } else {
    double aspect = 1.0;  // u-extent over v-extent, for near-square cells
    switch (surface.kind) {
      case SurfaceKind::Plane: aspect = 1.0; break;
      case SurfaceKind::Cylinder:
        aspect = kTwoPi * surface.radius / surface.length;
        break;
      case SurfaceKind::Torus:
        aspect = surface.major_radius / surface.radius;
        break;
      case SurfaceKind::Helicoid:
        aspect = (surface.rho_max - surface.rho_min) /
                 (kTwoPi * 0.5 * (surface.rho_min + surface.rho_max));
        break;
      default: break;
    }
    std::vector<Vec2> uv;
    jittered_unit_square(n, aspect, rng, &uv);
    for (const Vec2& p : uv) {
      switch (surface.kind) {
        case SurfaceKind::Plane: append(&cloud, surface, plane_sample(surface, p)); break;
        case SurfaceKind::Cylinder:
          append(&cloud, surface, cylinder_sample(surface, p));
          break;
        case SurfaceKind::Torus: append(&cloud, surface, torus_sample(surface, p)); break;
        case SurfaceKind::Helicoid:
          append(&cloud, surface, helicoid_sample(surface, p));
          break;
        default: break;
      }
    }
  }

  if (noise_sigma > 0.0) {
    for (Vec3& p : cloud.positions)
      p += noise_sigma * Vec3(rng.normal(), rng.normal(), rng.normal());
  }
  return cloud;
}

SurfacePointInfo analytic_curvature(const AnalyticSurface& surface, const Vec3& point) {
  const Vec3 local =
      surface.pose_rotation.transpose() * (point - surface.pose_translation);
  Sample s;
  switch (surface.kind) {
    case SurfaceKind::Plane: {
      if (std::abs(local.z()) > 1e-9)
        throw std::invalid_argument("analytic_curvature: point off plane");
      Vec2 uv((local.x() / surface.half_extent + 1.0) / 2.0,
              (local.y() / surface.half_extent + 1.0) / 2.0);
      s = plane_sample(surface, uv);
      s.position = local;
      break;
    }
    case SurfaceKind::Sphere: {
      if (std::abs(local.norm() - surface.radius) > 1e-9)
        throw std::invalid_argument("analytic_curvature: point off sphere");
      const Vec3 n = local.normalized();
      s = sphere_sample_at(surface, n.z(), std::atan2(n.y(), n.x()));
      break;
    }
    case SurfaceKind::Cylinder: {
      const double rho = std::hypot(local.x(), local.y());
      if (std::abs(rho - surface.radius) > 1e-9)
        throw std::invalid_argument("analytic_curvature: point off cylinder");
      Vec2 uv(std::atan2(local.y(), local.x()) / kTwoPi + 0.5,
              local.z() / surface.length + 0.5);
      s = cylinder_sample(surface, {frac(uv.x()), uv.y()});
      break;
    }
    case SurfaceKind::Torus: {
      const double ring = std::hypot(local.x(), local.y());
      const double tube =
          std::hypot(ring - surface.major_radius, local.z());
      if (std::abs(tube - surface.radius) > 1e-9)
        throw std::invalid_argument("analytic_curvature: point off torus");
      const double phi = std::atan2(local.y(), local.x());
      const double theta = std::atan2(local.z(), ring - surface.major_radius);
      const double ct = std::cos(theta), st = std::sin(theta);
      const double cp = std::cos(phi), sp = std::sin(phi);
      s.position = local;
      s.frame.normal = Vec3(ct * cp, ct * sp, st);
      s.dir1 = Vec3(-st * cp, -st * sp, ct);
      s.dir2 = Vec3(-sp, cp, 0.0);
      s.frame.u1 = s.dir1;
      s.frame.u2 = s.dir2;
      s.tau1 = 1.0 / surface.radius;
      s.tau2 = ct / (surface.major_radius + surface.radius * ct);
      break;
    }
    case SurfaceKind::Helicoid: {
      const double c = surface.pitch;
      const double phi = local.z() / c;
      const Vec3 radial(std::cos(phi), std::sin(phi), 0.0);
      const double rho = local.head<2>().dot(radial.head<2>());
      const Vec3 expect(rho * std::cos(phi), rho * std::sin(phi), c * phi);
      if ((expect - local).norm() > 1e-9)
        throw std::invalid_argument("analytic_curvature: point off helicoid");
      const double den = std::sqrt(rho * rho + c * c);
      const double cp = std::cos(phi), sp = std::sin(phi);
      s.position = local;
      s.frame.normal = Vec3(c * sp, -c * cp, rho) / den;
      const Vec3 e1(cp, sp, 0.0);
      const Vec3 e2 = Vec3(-rho * sp, rho * cp, c) / den;
      const double kappa = c / (rho * rho + c * c);
      s.tau1 = kappa;
      s.tau2 = -kappa;
      s.dir1 = ((e1 - e2) / std::sqrt(2.0)).normalized();
      s.dir2 = ((e1 + e2) / std::sqrt(2.0)).normalized();
      s.frame.u1 = e1;
      s.frame.u2 = e2;
      break;
    }
  }
  SurfacePointInfo out;
  const Mat3& rot = surface.pose_rotation;
  out.frame.u1 = rot * s.frame.u1;
  out.frame.u2 = rot * s.frame.u2;
  out.frame.normal = rot * s.frame.normal;
  if (std::abs(s.tau1) >= std::abs(s.tau2)) {
    out.tau1 = s.tau1;
    out.tau2 = s.tau2;
    out.dir1 = rot * s.dir1;
    out.dir2 = rot * s.dir2;
  } else {
    out.tau1 = s.tau2;
    out.tau2 = s.tau1;
    out.dir1 = rot * s.dir2;
    out.dir2 = rot * s.dir1;
  }
  return out;
}

LocalFrame pca_baseline_frame(const KdTree& index, int i, int k) {
  if (k < 3) throw std::invalid_argument("pca_baseline_frame: k < 3");
  const NeighborList nb = index.knn(i, k);
  if (nb.size() < 3)
    throw std::runtime_error("pca_baseline_frame: not enough neighbors");
  Vec3 mean = Vec3::Zero();
  for (int idx : nb.indices) mean += index.points()[idx];
  mean /= static_cast<double>(nb.size());
  Mat3 cov = Mat3::Zero();
  for (int idx : nb.indices) {
    const Vec3 d = index.points()[idx] - mean;
    cov.noalias() += d * d.transpose();
  }
  Eigen::SelfAdjointEigenSolver<Mat3> es(cov);
  if (es.eigenvalues()[1] <= 1e-300)
    throw std::runtime_error("pca_baseline_frame: rank-deficient neighborhood");
  LocalFrame f;
  f.normal = es.eigenvectors().col(0);
  f.u1 = es.eigenvectors().col(2);
  f.u2 = es.eigenvectors().col(1);
  return orthonormalized(f);
}

}  // namespace splatgeo
