#include "splatgeo/core.hpp"

#include <Eigen/Dense>

#include <cmath>

namespace splatgeo {

namespace {

bool finite(const Vec3& v) {
  return std::isfinite(v.x()) && std::isfinite(v.y()) && std::isfinite(v.z());
}

bool finite(const Mat3& m) {
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c)
      if (!std::isfinite(m(r, c))) return false;
  return true;
}

}  // namespace

CurvatureInfo make_curvature_info(double tau_a, double tau_b, const Vec3& dir_a,
                                  const Vec3& dir_b) {
  CurvatureInfo out;
  if (std::abs(tau_a) >= std::abs(tau_b)) {
    out.tau1 = tau_a;
    out.tau2 = tau_b;
    out.dir1 = dir_a.normalized();
    out.dir2 = dir_b.normalized();
  } else {
    out.tau1 = tau_b;
    out.tau2 = tau_a;
    out.dir1 = dir_b.normalized();
    out.dir2 = dir_a.normalized();
  }
  out.mac = 0.5 * (std::abs(out.tau1) + std::abs(out.tau2));
  return out;
}

Mat3 primitive_covariance(const GaussianPrimitive& p) {
  const Mat3 cov = p.rotation *
                   p.scales.cwiseProduct(p.scales).asDiagonal() *
                   p.rotation.transpose();
  return 0.5 * (cov + cov.transpose());
}

std::vector<std::string> validate(const GaussianPrimitive& p) {
  std::vector<std::string> v;
  if (!finite(p.position)) v.push_back("position not finite");
  if (!finite(p.rotation)) v.push_back("rotation not finite");
  const Mat3 rtr = p.rotation.transpose() * p.rotation;
  if ((rtr - Mat3::Identity()).cwiseAbs().maxCoeff() > 1e-9)
    v.push_back("rotation not orthonormal");
  else if (p.rotation.determinant() < 0.0)
    v.push_back("rotation determinant negative");
  if (!(p.scales.x() >= p.scales.y()))
    v.push_back("scales not ordered (s1 >= s2)");
  if (!(p.scales.y() > 0.0) || !(p.scales.z() > 0.0) || !(p.scales.x() > 0.0))
    v.push_back("scales not positive");
  if (!(p.opacity >= 0.0 && p.opacity <= 1.0)) v.push_back("opacity outside [0,1]");
  if (p.color.minCoeff() < 0.0 || p.color.maxCoeff() > 1.0)
    v.push_back("color outside [0,1]^3");
  return v;
}

std::vector<std::string> validate(const LocalFrame& f) {
  std::vector<std::string> v;
  const Vec3* vecs[3] = {&f.u1, &f.u2, &f.normal};
  const char* names[3] = {"u1", "u2", "normal"};
  for (int i = 0; i < 3; ++i) {
    if (!finite(*vecs[i])) v.push_back(std::string(names[i]) + " not finite");
    if (std::abs(vecs[i]->norm() - 1.0) > 1e-9)
      v.push_back(std::string(names[i]) + " not unit length");
  }
  for (int i = 0; i < 3; ++i)
    for (int j = i + 1; j < 3; ++j)
      if (std::abs(vecs[i]->dot(*vecs[j])) > 1e-9)
        v.push_back(std::string(names[i]) + " not orthogonal to " + names[j]);
  return v;
}

std::vector<std::string> validate(const CurvatureInfo& c, const LocalFrame* frame) {
  std::vector<std::string> v;
  if (std::abs(c.tau1) < std::abs(c.tau2))
    v.push_back("curvatures not ordered by magnitude");
  if (std::abs(c.dir1.dot(c.dir2)) > 1e-6)
    v.push_back("principal directions not orthogonal");
  const double want_mac = 0.5 * (std::abs(c.tau1) + std::abs(c.tau2));
  if (c.mac != want_mac) v.push_back("mac != (|tau1|+|tau2|)/2");
  if (frame) {
    if (std::abs(c.dir1.dot(frame->normal)) > 1e-6)
      v.push_back("dir1 not in tangent plane");
    if (std::abs(c.dir2.dot(frame->normal)) > 1e-6)
      v.push_back("dir2 not in tangent plane");
  }
  return v;
}

std::vector<std::string> validate(const EstimatorConfig& cfg) {
  std::vector<std::string> v;
  if (cfg.k_neighbors < 4) v.push_back("k_neighbors < 4");
  if (cfg.bandwidth_t < 0.0 && cfg.bandwidth_t != 0.0)
    v.push_back("bandwidth_t negative");
  if (cfg.xi_min <= 0.0) v.push_back("xi_min not positive");
  if (cfg.xi_max > 0.0 && cfg.xi_min >= cfg.xi_max)
    v.push_back("xi_min >= xi_max");
  for (double m : cfg.masses)
    if (!(m > 0.0)) {
      v.push_back("non-positive mass");
      break;
    }
  return v;
}

std::vector<std::string> validate(const PointCloud& cloud) {
  std::vector<std::string> v;
  for (const Vec3& p : cloud.positions)
    if (!finite(p)) {
      v.push_back("non-finite position");
      break;
    }
  if (!cloud.colors.empty() && cloud.colors.size() != cloud.positions.size())
    v.push_back("color count mismatch");
  if (!cloud.covariances.empty()) {
    if (cloud.covariances.size() != cloud.positions.size())
      v.push_back("covariance count mismatch");
    for (const Mat3& c : cloud.covariances) {
      if ((c - c.transpose()).cwiseAbs().maxCoeff() > 1e-9) {
        v.push_back("covariance not symmetric");
        break;
      }
      Eigen::SelfAdjointEigenSolver<Mat3> es(c);
      if (es.eigenvalues().minCoeff() < -1e-9) {
        v.push_back("covariance not PSD");
        break;
      }
    }
  }
  return v;
}

LocalFrame orthonormalized(const LocalFrame& f) {
  LocalFrame out;
  out.u1 = f.u1.normalized();
  out.u2 = (f.u2 - f.u2.dot(out.u1) * out.u1).normalized();
  out.normal = out.u1.cross(out.u2);
  if (out.normal.dot(f.normal) < 0.0) out.normal = -out.normal;
  return out;
}

}  // namespace splatgeo
