#include "splatgeo/manifold.hpp"

#include <Eigen/Dense>

#include <chrono>
#include <cmath>
#include <stdexcept>

#include "splatgeo/parallel.hpp"

namespace splatgeo {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

void eigendecompose_descending(const Mat3& m, Vec3* values, Mat3* vectors) {
  Eigen::SelfAdjointEigenSolver<Mat3> es(m);  // ascending
  for (int d = 0; d < 3; ++d) {
    (*values)[d] = es.eigenvalues()[2 - d];
    vectors->col(d) = es.eigenvectors().col(2 - d);
  }
}

}  // namespace

std::vector<std::string> validate(const TangentialKernelMatrix& km) {
  std::vector<std::string> v;
  if ((km.m - km.m.transpose()).cwiseAbs().maxCoeff() > 1e-9)
    v.push_back("matrix not symmetric");
  if (km.eigenvalues[0] < km.eigenvalues[1] || km.eigenvalues[1] < km.eigenvalues[2])
    v.push_back("eigenvalues not descending");
  if (km.eigenvalues[2] < -1e-6) v.push_back("negative eigenvalue beyond tolerance");
  return v;
}

Mat3 second_moment(const std::vector<Vec3>& positions, const KernelWeights& w) {
  Mat3 m = Mat3::Zero();
  const Vec3& center = positions[w.center_id];
  for (std::size_t j = 0; j < w.size(); ++j) {
    const Vec3 d = positions[w.neighbor_ids[j]] - center;
    m.noalias() += w.weights[j] * d * d.transpose();
  }
  return m / w.bandwidth;
}

TangentialKernelMatrix tangential_kernel_matrix(const std::vector<Vec3>& positions,
                                                const KernelWeights& w) {
  if (w.size() < 4)
    throw std::invalid_argument("tangential_kernel_matrix: fewer than 4 neighbors");
  TangentialKernelMatrix out;
  const Mat3 m = 0.5 * second_moment(positions, w);
  out.m = 0.5 * (m + m.transpose());
  eigendecompose_descending(out.m, &out.eigenvalues, &out.eigenvectors);
  return out;
}

double calibration_scale(const TangentialKernelMatrix& km) {
  if (!(km.eigenvalues[0] > 0.0))
    throw std::runtime_error("calibration_scale: degenerate neighborhood");
  return 0.5 * (km.eigenvalues[0] + km.eigenvalues[1]);
}

FrameEstimate local_frame_from_kernel(const TangentialKernelMatrix& km, double c,
                                      double dim_threshold) {
  if (!(c > 0.0)) throw std::invalid_argument("local_frame_from_kernel: c <= 0");
  FrameEstimate out;
  int dim = 0;
  for (int d = 0; d < 3; ++d)
    if (km.eigenvalues[d] / c > dim_threshold) ++dim;
  out.estimated_dimension = dim;
  LocalFrame f;
  f.u1 = km.eigenvectors.col(0);
  f.u2 = km.eigenvectors.col(1);
  f.normal = km.eigenvectors.col(2);
  out.frame = orthonormalized(f);
  return out;
}

ShapeOperatorMatrix shape_operator_full(const std::vector<Vec3>& positions, int i,
                                        const LocalFrame& frame,
                                        const KernelWeights& w,
                                        const std::vector<Mat3>& moments) {
  // Inner defects reduce to the per-point second moments:
  //   Lbnz[eta, phi_d](p)    = (M(p) n)_d
  //   Lbnz[phi_a, phi_b](p)  = M(p)[a][b]
  // with n the normal at i and all functions relative to q_i. The outer
  // defect at i then contracts the neighbor-vs-center differences of those
  // values against the offsets.
  const Vec3 n = frame.normal;
  const Vec3& qi = positions[i];
  const Mat3& mi = moments[i];

  Mat3 a1 = Mat3::Zero();  // A[phi_d1, eta, phi_d2]
  Mat3 a3 = Mat3::Zero();  // A[eta, phi_d1, phi_d2]
  for (std::size_t j = 0; j < w.size(); ++j) {
    const Vec3 d = positions[w.neighbor_ids[j]] - qi;
    const Mat3 dm = moments[w.neighbor_ids[j]] - mi;
    const Vec3 h = dm * n;
    a1.noalias() += w.weights[j] * d * h.transpose();
    a3.noalias() += (w.weights[j] * n.dot(d)) * dm;
  }
  a1 /= w.bandwidth;
  a3 /= w.bandwidth;

  ShapeOperatorMatrix out;
  const Mat3 s = (a1 + a1.transpose() - a3) / 8.0;
  out.s_full = 0.5 * (s + s.transpose());
  Eigen::Matrix<double, 3, 2> basis;
  basis.col(0) = frame.u1;
  basis.col(1) = frame.u2;
  const Mat2 st = basis.transpose() * out.s_full * basis;
  out.s_tangent = 0.5 * (st + st.transpose());
  return out;
}

CurvatureInfo principal_curvatures(const ShapeOperatorMatrix& so,
                                   const LocalFrame& frame, double c) {
  if (!(c > 0.0)) throw std::invalid_argument("principal_curvatures: c <= 0");
  const Mat2 s = so.s_tangent / (c * c);
  Eigen::SelfAdjointEigenSolver<Mat2> es(s);
  const Vec3 dir_a = es.eigenvectors()(0, 0) * frame.u1 + es.eigenvectors()(1, 0) * frame.u2;
  const Vec3 dir_b = es.eigenvectors()(0, 1) * frame.u1 + es.eigenvectors()(1, 1) * frame.u2;
  return make_curvature_info(es.eigenvalues()[0], es.eigenvalues()[1], dir_a, dir_b);
}

double resolve_bandwidth(const KdTree& tree, int k, double requested) {
  if (requested > 0.0) return requested;
  const int n = tree.size();
  const int samples = std::max(1, n / 100);
  const int stride = std::max(1, n / samples);
  double acc = 0.0;
  int count = 0;
  for (int i = 0; i < n; i += stride) {
    const NeighborList nb = tree.knn(i, k);
    if (!nb.distances.empty()) {
      acc += nb.distances.back();
      ++count;
    }
  }
  if (count == 0 || acc <= 0.0)
    throw std::runtime_error("resolve_bandwidth: degenerate point set");
  const double mean = acc / count;
  return mean * mean;
}

namespace {

struct Pass1Caches {
  std::vector<KernelWeights> weights;
  std::vector<Mat3> moments;
};

void run_point_pass1(const PointCloud& cloud, const KdTree& tree,
                     const EstimatorConfig& cfg, double t, int i,
                     Pass1Caches* caches, EstimationResult* out) {
  PointDiagnostics& diag = out->diagnostics[i];
  try {
    const NeighborList nb = tree.knn(i, cfg.k_neighbors);
    if (static_cast<int>(nb.size()) < 4)
      throw std::runtime_error("insufficient neighbors");
    KernelWeights w =
        cfg.adaptive_kernel
            ? adaptive_kernel_weights(cloud.positions, i, nb, t, cloud.covariances,
                                      cfg.xi_min)
            : gaussian_kernel_weights(cloud.positions, i, nb, t);
    const TangentialKernelMatrix km = tangential_kernel_matrix(cloud.positions, w);
    const double c = calibration_scale(km);
    const FrameEstimate fe = local_frame_from_kernel(km, c, cfg.dim_threshold);
    out->frames[i] = fe.frame;
    diag.eigenvalues = km.eigenvalues;
    diag.calibration = c;
    diag.estimated_dimension = fe.estimated_dimension;
    caches->moments[i] = second_moment(cloud.positions, w);
    caches->weights[i] = std::move(w);
  } catch (const std::exception& e) {
    diag.flagged = true;
    diag.flag_reason = e.what();
    out->frames[i] = LocalFrame{};
    caches->moments[i] = Mat3::Zero();
    caches->weights[i] = KernelWeights{};
    caches->weights[i].center_id = i;
  }
}

void run_point_pass2(const PointCloud& cloud, const Pass1Caches& caches, int i,
                     EstimationResult* out) {
  PointDiagnostics& diag = out->diagnostics[i];
  if (diag.flagged) {
    out->curvatures[i] = CurvatureInfo{};
    return;
  }
  try {
    const ShapeOperatorMatrix so = shape_operator_full(
        cloud.positions, i, out->frames[i], caches.weights[i], caches.moments);
    out->curvatures[i] =
        principal_curvatures(so, out->frames[i], diag.calibration);
  } catch (const std::exception& e) {
    diag.flagged = true;
    diag.flag_reason = e.what();
    out->curvatures[i] = CurvatureInfo{};
  }
}

}  // namespace

EstimationResult estimate_all(const PointCloud& cloud, const EstimatorConfig& cfg) {
  if (cloud.size() == 0) throw std::invalid_argument("estimate_all: empty cloud");
  if (cfg.adaptive_kernel && !cloud.has_covariances())
    throw std::invalid_argument(
        "estimate_all: adaptive kernel requires per-point covariances");
  const auto n = static_cast<std::int64_t>(cloud.size());
  EstimationResult out;
  out.frames.resize(n);
  out.curvatures.resize(n);
  out.diagnostics.resize(n);

  auto t0 = Clock::now();
  const KdTree tree(cloud.positions);
  out.seconds_index = seconds_since(t0);

  t0 = Clock::now();
  double t = 0.0;
  try {
    t = resolve_bandwidth(tree, cfg.k_neighbors, cfg.bandwidth_t);
  } catch (const std::exception& e) {
    for (std::int64_t i = 0; i < n; ++i) {
      out.diagnostics[i].flagged = true;
      out.diagnostics[i].flag_reason = e.what();
    }
    return out;
  }
  out.bandwidth_t = t;
  Pass1Caches caches;
  caches.weights.resize(n);
  caches.moments.resize(n);
  parallel_for(n, cfg.threads, [&](std::int64_t i) {
    run_point_pass1(cloud, tree, cfg, t, static_cast<int>(i), &caches, &out);
  });
  out.seconds_pass1 = seconds_since(t0);

  t0 = Clock::now();
  parallel_for(n, cfg.threads, [&](std::int64_t i) {
    run_point_pass2(cloud, caches, static_cast<int>(i), &out);
  });
  out.seconds_pass2 = seconds_since(t0);
  return out;
}

namespace reference {

ShapeOperatorMatrix shape_operator_nested(const std::vector<Vec3>& positions, int i,
                                          const LocalFrame& frame,
                                          const std::vector<KernelWeights>& weights) {
  const Vec3& qi = positions[i];
  const Vec3 n = frame.normal;
  const KernelWeights& wi = weights[i];

  // inner defect Lbnz[f2, f3] as a LocalFunction over i's neighborhood,
  // each value computed at that point through its own weights
  auto inner_defect = [&](int f2_coord, int f3_coord, bool f2_is_height) {
    auto value_at = [&](int p) {
      const KernelWeights& wp = weights[p];
      if (wp.size() == 0 || !(wp.bandwidth > 0.0)) return 0.0;
      const LocalFunction f2 =
          f2_is_height ? height_function(positions, qi, n, wp)
                       : coordinate_function(positions, qi, wp, f2_coord);
      const LocalFunction f3 = coordinate_function(positions, qi, wp, f3_coord);
      return leibniz_defect(f2, f3, wp);
    };
    LocalFunction out;
    out.value_at_center = value_at(i);
    out.values_at_neighbors.resize(wi.size());
    for (std::size_t j = 0; j < wi.size(); ++j)
      out.values_at_neighbors[j] = value_at(wi.neighbor_ids[j]);
    return out;
  };

  auto outer_defect = [&](const LocalFunction& f1, const LocalFunction& inner) {
    return leibniz_defect(f1, inner, wi);
  };

  Mat3 s = Mat3::Zero();
  const LocalFunction eta_i = height_function(positions, qi, n, wi);
  for (int d1 = 0; d1 < 3; ++d1) {
    const LocalFunction phi1 = coordinate_function(positions, qi, wi, d1);
    for (int d2 = 0; d2 < 3; ++d2) {
      const LocalFunction phi2 = coordinate_function(positions, qi, wi, d2);
      const double a_1 = outer_defect(phi1, inner_defect(-1, d2, true));
      const double a_2 = outer_defect(phi2, inner_defect(-1, d1, true));
      const double a_3 = outer_defect(eta_i, inner_defect(d1, d2, false));
      s(d1, d2) = (a_1 + a_2 - a_3) / 8.0;
    }
  }

  ShapeOperatorMatrix out;
  out.s_full = 0.5 * (s + s.transpose());
  Eigen::Matrix<double, 3, 2> basis;
  basis.col(0) = frame.u1;
  basis.col(1) = frame.u2;
  const Mat2 st = basis.transpose() * out.s_full * basis;
  out.s_tangent = 0.5 * (st + st.transpose());
  return out;
}

EstimationResult estimate_all_serial(const PointCloud& cloud,
                                     const EstimatorConfig& cfg) {
  if (cloud.size() == 0)
    throw std::invalid_argument("estimate_all_serial: empty cloud");
  if (cfg.adaptive_kernel && !cloud.has_covariances())
    throw std::invalid_argument(
        "estimate_all_serial: adaptive kernel requires per-point covariances");
  const int n = static_cast<int>(cloud.size());
  EstimationResult out;
  out.frames.resize(n);
  out.curvatures.resize(n);
  out.diagnostics.resize(n);

  // brute-force bandwidth resolution mirroring resolve_bandwidth
  double t = cfg.bandwidth_t;
  if (t <= 0.0) {
    const int samples = std::max(1, n / 100);
    const int stride = std::max(1, n / samples);
    double acc = 0.0;
    int count = 0;
    for (int i = 0; i < n; i += stride) {
      const NeighborList nb =
          brute_force_knn(cloud.positions, cloud.positions[i], cfg.k_neighbors, i);
      if (!nb.distances.empty()) {
        acc += nb.distances.back();
        ++count;
      }
    }
    if (count == 0 || acc <= 0.0)
      throw std::runtime_error("estimate_all_serial: degenerate point set");
    t = (acc / count) * (acc / count);
  }
  out.bandwidth_t = t;

  std::vector<KernelWeights> weights(n);
  for (int i = 0; i < n; ++i) {
    PointDiagnostics& diag = out.diagnostics[i];
    try {
      const NeighborList nb =
          brute_force_knn(cloud.positions, cloud.positions[i], cfg.k_neighbors, i);
      if (static_cast<int>(nb.size()) < 4)
        throw std::runtime_error("insufficient neighbors");
      weights[i] = cfg.adaptive_kernel
                       ? adaptive_kernel_weights(cloud.positions, i, nb, t,
                                                 cloud.covariances, cfg.xi_min)
                       : gaussian_kernel_weights(cloud.positions, i, nb, t);
      const TangentialKernelMatrix km =
          tangential_kernel_matrix(cloud.positions, weights[i]);
      const double c = calibration_scale(km);
      const FrameEstimate fe = local_frame_from_kernel(km, c, cfg.dim_threshold);
      out.frames[i] = fe.frame;
      diag.eigenvalues = km.eigenvalues;
      diag.calibration = c;
      diag.estimated_dimension = fe.estimated_dimension;
    } catch (const std::exception& e) {
      diag.flagged = true;
      diag.flag_reason = e.what();
      out.frames[i] = LocalFrame{};
      weights[i] = KernelWeights{};
      weights[i].center_id = i;
    }
  }
  for (int i = 0; i < n; ++i) {
    if (out.diagnostics[i].flagged) continue;
    try {
      const ShapeOperatorMatrix so =
          shape_operator_nested(cloud.positions, i, out.frames[i], weights);
      out.curvatures[i] =
          principal_curvatures(so, out.frames[i], out.diagnostics[i].calibration);
    } catch (const std::exception& e) {
      out.diagnostics[i].flagged = true;
      out.diagnostics[i].flag_reason = e.what();
    }
  }
  return out;
}

}  // namespace reference

}  // namespace splatgeo
