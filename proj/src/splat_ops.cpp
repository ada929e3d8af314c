#include "splatgeo/splat_ops.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_map>

namespace splatgeo {

ClampedCurvature clamp_curvature(double tau1, double tau2, double xi_min,
                                 double xi_max) {
  if (!(xi_min < xi_max))
    throw std::invalid_argument("clamp_curvature: xi_min >= xi_max");
  auto clamp = [&](double tau) {
    return std::min(std::max(std::abs(tau), xi_min), xi_max);
  };
  ClampedCurvature out{clamp(tau1), clamp(tau2)};
  if (out.t1 < out.t2) std::swap(out.t1, out.t2);
  return out;
}

double neighbor_scale(const KdTree& index, int i, int k) {
  if (k < 1) throw std::invalid_argument("neighbor_scale: k < 1");
  const NeighborList nb = index.knn(i, k);
  if (nb.distances.empty())
    throw std::runtime_error("neighbor_scale: isolated point");
  double acc = 0.0;
  for (double d : nb.distances) acc += d;
  return acc / static_cast<double>(nb.distances.size());
}

double mac(const CurvatureInfo& curv) {
  return 0.5 * (std::abs(curv.tau1) + std::abs(curv.tau2));
}

void warmup_covariance(const LocalFrame& frame, const CurvatureInfo& curv,
                       double s_nbr, double xi_min, double xi_max, Mat3* rotation,
                       Vec3* scales) {
  if (!(s_nbr > 0.0)) throw std::invalid_argument("warmup_covariance: s_nbr <= 0");
  // CurvatureInfo keeps |tau1| >= |tau2| paired with (dir1, dir2); clamping
  // preserves the order, so t1 stays with dir1.
  const ClampedCurvature t = clamp_curvature(curv.tau1, curv.tau2, xi_min, xi_max);

  LocalFrame cols;
  cols.u1 = curv.dir2;
  cols.u2 = curv.dir1;
  cols.normal = frame.normal;
  cols = orthonormalized(cols);
  Mat3 r;
  r.col(0) = cols.u1;
  r.col(1) = cols.u2;
  r.col(2) = cols.normal;
  if (r.determinant() < 0.0) r.col(2) = -r.col(2);
  *rotation = r;

  const double half = 0.5 * s_nbr;
  (*scales)[0] = half * std::sqrt(t.t1 / t.t2);
  (*scales)[1] = half * std::sqrt(t.t2 / t.t1);
  (*scales)[2] = xi_min;
}

std::vector<UpsampledPoint> upsample_flat_regions(
    const PointCloud& cloud, const std::vector<CurvatureInfo>& curvatures,
    double xi_min, int k) {
  if (curvatures.size() != cloud.size())
    throw std::invalid_argument("upsample_flat_regions: curvature count mismatch");
  if (k < 1) throw std::invalid_argument("upsample_flat_regions: k < 1");
  std::vector<UpsampledPoint> out;
  if (cloud.size() < 2) return out;
  const KdTree tree(cloud.positions);

  // dedup on coordinates quantized to the 1e-9 tolerance
  struct KeyHash {
    std::size_t operator()(const std::array<long long, 3>& k) const {
      std::size_t h = 1469598103934665603ull;
      for (long long v : k) {
        h ^= static_cast<std::size_t>(v);
        h *= 1099511628211ull;
      }
      return h;
    }
  };
  std::unordered_map<std::array<long long, 3>, int, KeyHash> seen;
  auto key_of = [](const Vec3& p) {
    return std::array<long long, 3>{static_cast<long long>(std::llround(p.x() * 1e9)),
                                    static_cast<long long>(std::llround(p.y() * 1e9)),
                                    static_cast<long long>(std::llround(p.z() * 1e9))};
  };

  for (std::size_t i = 0; i < cloud.size(); ++i) {
    if (!(mac(curvatures[i]) < xi_min)) continue;
    const NeighborList nb = tree.knn(static_cast<int>(i), k);
    for (std::size_t j = 0; j < nb.size(); ++j) {
      UpsampledPoint p;
      p.position = 0.5 * (cloud.positions[i] + cloud.positions[nb.indices[j]]);
      p.color = cloud.has_colors()
                    ? Vec3(0.5 * (cloud.colors[i] + cloud.colors[nb.indices[j]]))
                    : Vec3::Constant(0.5);
      p.source_a = static_cast<int>(i);
      p.source_b = nb.indices[j];
      if (seen.emplace(key_of(p.position), 1).second) out.push_back(p);
    }
  }
  return out;
}

namespace {

Vec3 truncated_displacement(const Vec3& grad, const LocalFrame& frame, double xi_min) {
  const Vec3 tangential = frame.project_tangent(grad);
  const Vec3 normal = frame.project_normal(grad);
  const double norm = normal.norm();
  const double factor = norm > 0.0 ? std::min(xi_min / norm, 1.0) : 1.0;
  return tangential + factor * normal;
}

}  // namespace

Vec3 truncated_gradient_step(const Vec3& mu, const Vec3& grad, const LocalFrame& frame,
                             double omega, double xi_min) {
  if (!(omega > 0.0)) throw std::invalid_argument("truncated_gradient_step: omega <= 0");
  return mu - omega * truncated_displacement(grad, frame, xi_min);
}

Vec3 clone_primitive(const Vec3& mu, const Vec3& accum_grad, const LocalFrame& frame,
                     double xi_min) {
  return mu + truncated_displacement(accum_grad, frame, xi_min);
}

Vec3 split_primitive(const Vec3& mu, const LocalFrame& frame,
                     const ClampedCurvature& curv, const CurvatureInfo& dirs,
                     const Vec3& rho, double xi_min) {
  return mu + (rho[1] / curv.t2) * dirs.dir2 + (rho[0] / curv.t1) * dirs.dir1 +
         rho[2] * xi_min * frame.normal;
}

RegularizerResult scale_regularizer(double s1, double s2, double s3,
                                    const ClampedCurvature& curv, double xi_min) {
  if (!(s1 > 0.0) || !(s2 > 0.0))
    throw std::invalid_argument("scale_regularizer: main scales must be positive");
  RegularizerResult out;
  const double hinge = s1 / s2 - curv.t1 / curv.t2 - xi_min;
  out.loss = std::max(0.0, hinge) + s3 * s3;
  if (hinge > 0.0) {
    out.grad_scales[0] = 1.0 / s2;
    out.grad_scales[1] = -s1 / (s2 * s2);
  }
  out.grad_scales[2] = 2.0 * s3;
  return out;
}

RegularizerResult rotation_regularizer(const Mat3& rotation, const LocalFrame& frame,
                                       const CurvatureInfo& curv) {
  RegularizerResult out;
  const Vec3 refs_raw[3] = {curv.dir2, curv.dir1, frame.normal};
  for (int d = 0; d < 3; ++d) {
    const Vec3 col = rotation.col(d);
    const Vec3 ref = col.dot(refs_raw[d]) >= 0.0 ? refs_raw[d] : Vec3(-refs_raw[d]);
    const double gap = 1.0 - col.dot(ref);
    out.loss += gap * gap;
    out.grad_rotation.col(d) = -2.0 * gap * ref;
  }
  return out;
}

double resolve_xi_max(const std::vector<CurvatureInfo>& curvatures,
                      double xi_min) {
  if (curvatures.empty())
    throw std::invalid_argument("resolve_xi_max: empty batch");
  double mean = 0.0;
  std::size_t count = 0;
  for (const CurvatureInfo& c : curvatures) {
    mean += std::abs(c.tau1) + std::abs(c.tau2);
    count += 2;
  }
  mean /= static_cast<double>(count);
  double var = 0.0;
  for (const CurvatureInfo& c : curvatures) {
    var += (std::abs(c.tau1) - mean) * (std::abs(c.tau1) - mean);
    var += (std::abs(c.tau2) - mean) * (std::abs(c.tau2) - mean);
  }
  var /= static_cast<double>(count);
  return std::max(mean + 3.0 * std::sqrt(var), 2.0 * xi_min);
}

}  // namespace splatgeo
