// Acceptance suite: every criterion prints one [PASS]/[FAIL] line with the
// measured value and its pinned threshold.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <Eigen/Geometry>

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <random>
#include <thread>

#include "splatgeo/bench.hpp"
#include "splatgeo/io.hpp"
#include "splatgeo/manifold.hpp"
#include "splatgeo/splat_ops.hpp"
#include "splatgeo/surfaces.hpp"
#include "splatgeo/varifold.hpp"

using namespace splatgeo;

namespace {

double now_s() {
  return std::chrono::duration<double>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

bool line(int criterion, const char* name, bool pass, const std::string& detail) {
  std::printf("[%s] criterion %2d: %-34s %s\n", pass ? "PASS" : "FAIL", criterion,
              name, detail.c_str());
  std::fflush(stdout);
  return pass;
}

std::string fmt(const char* pattern, double a, double b) {
  char buf[160];
  std::snprintf(buf, sizeof(buf), pattern, a, b);
  return buf;
}

double median_of(std::vector<double> v) {
  REQUIRE(!v.empty());
  std::sort(v.begin(), v.end());
  return v[v.size() / 2];
}

LocalFrame random_frame(std::mt19937_64& rng) {
  std::normal_distribution<double> gauss;
  Eigen::Quaterniond q(gauss(rng), gauss(rng), gauss(rng), gauss(rng));
  q.normalize();
  const Mat3 r = q.toRotationMatrix();
  LocalFrame f;
  f.u1 = r.col(0);
  f.u2 = r.col(1);
  f.normal = r.col(2);
  return f;
}

std::vector<LocalFrame> pca_frames(const PointCloud& cloud, int k) {
  const KdTree tree(cloud.positions);
  std::vector<LocalFrame> out(cloud.size());
  for (std::size_t i = 0; i < cloud.size(); ++i)
    out[i] = pca_baseline_frame(tree, static_cast<int>(i), k);
  return out;
}

std::vector<double> normal_errors(const PointCloud& cloud,
                                  const std::vector<LocalFrame>& frames) {
  std::vector<double> errs;
  for (std::size_t i = 0; i < cloud.size(); ++i)
    errs.push_back(
        angle_between_lines_deg(frames[i].normal, cloud.truth_frames[i].normal));
  return errs;
}

struct SurfaceErrors {
  std::vector<double> tau1_err;
  std::vector<double> tau2_err;
  std::vector<double> dir_err;
};

SurfaceErrors curvature_errors(const PointCloud& cloud, const EstimationResult& res) {
  SurfaceErrors out;
  const double margin = 2.0 * std::sqrt(std::max(res.bandwidth_t, 0.0));
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    if (res.diagnostics[i].flagged) continue;
    if (!cloud.boundary_distance.empty() && cloud.boundary_distance[i] < margin)
      continue;
    const double gt1 = std::abs(cloud.truth_curvatures[i][0]);
    const double gt2 = std::abs(cloud.truth_curvatures[i][1]);
    out.tau1_err.push_back(std::abs(std::abs(res.curvatures[i].tau1) - gt1));
    out.tau2_err.push_back(std::abs(std::abs(res.curvatures[i].tau2) - gt2));
    if (gt1 - gt2 > 1e-6)
      out.dir_err.push_back(
          angle_between_lines_deg(res.curvatures[i].dir1, cloud.truth_directions[i]));
  }
  return out;
}

}  // namespace

TEST_CASE("criterion 1: tangential kernel eigen-structure") {
  const PointCloud cloud = sample_surface(AnalyticSurface::sphere(1.0), 5000, 1, 0.0);
  EstimatorConfig cfg;
  cfg.k_neighbors = 20;
  const double t0 = now_s();
  const EstimationResult res = estimate_all(cloud, cfg);
  const double seconds = now_s() - t0;
  int in_band = 0, total = 0;
  for (const PointDiagnostics& d : res.diagnostics) {
    if (d.flagged) continue;
    ++total;
    if (d.eigenvalues[0] / d.calibration < 1.2 &&
        d.eigenvalues[1] / d.calibration > 0.8 &&
        d.eigenvalues[2] / d.calibration < 0.2 && d.estimated_dimension == 2)
      ++in_band;
  }
  const double frac = static_cast<double>(in_band) / total;
  CHECK(line(1, "kernel eigenvalue band",
             frac >= 0.9 && seconds < 5.0,
             fmt("band fraction %.3f (>= 0.9), runtime %.2f s (< 5)", frac, seconds)));
}

TEST_CASE("criterion 2: normal accuracy, clean and noisy") {
  EstimatorConfig cfg;
  cfg.k_neighbors = 20;

  const PointCloud clean = sample_surface(AnalyticSurface::sphere(1.0), 5000, 1, 0.0);
  const double mani_clean =
      median_of(normal_errors(clean, estimate_all(clean, cfg).frames));
  const double pca_clean =
      median_of(normal_errors(clean, pca_frames(clean, cfg.k_neighbors)));
  CHECK(line(2, "clean normals (manifold)", mani_clean < 5.0,
             fmt("median %.3f deg (< %g)", mani_clean, 5.0)));
  CHECK(line(2, "clean normals (pca)", pca_clean < 5.0,
             fmt("median %.3f deg (< %g)", pca_clean, 5.0)));

  const PointCloud noisy =
      sample_surface(AnalyticSurface::sphere(1.0), 5000, 1, 0.005);
  const double mani_noisy =
      median_of(normal_errors(noisy, estimate_all(noisy, cfg).frames));
  const double pca_noisy =
      median_of(normal_errors(noisy, pca_frames(noisy, cfg.k_neighbors)));
  // comparative clause with the documented 1.15x soft margin
  const bool soft_ok = mani_noisy <= 1.15 * pca_noisy;
  CHECK(line(2, "noisy normals vs pca (soft)", soft_ok,
             fmt("manifold %.3f deg vs pca %.3f deg (<= 1.15x)", mani_noisy,
                 pca_noisy)));
  if (mani_noisy > pca_noisy)
    std::printf("       note: pca ahead at sigma=0.005; within the soft margin\n");
}

TEST_CASE("criterion 3: principal curvature accuracy (manifold)") {
  const double t0 = now_s();
  EstimatorConfig cfg;
  cfg.k_neighbors = 30;

  const PointCloud sphere = sample_surface(AnalyticSurface::sphere(1.0), 5000, 1, 0.0);
  const SurfaceErrors se = curvature_errors(sphere, estimate_all(sphere, cfg));
  const double sphere_e1 = median_of(se.tau1_err);
  const double sphere_e2 = median_of(se.tau2_err);

  const PointCloud cyl = sample_surface(AnalyticSurface::cylinder(0.5), 5000, 1, 0.0);
  const SurfaceErrors ce = curvature_errors(cyl, estimate_all(cyl, cfg));
  const double cyl_e1 = median_of(ce.tau1_err);
  const double cyl_t2 = median_of(ce.tau2_err);
  const double cyl_dir = median_of(ce.dir_err);

  EstimatorConfig plane_cfg;
  const PointCloud plane = sample_surface(AnalyticSurface::plane(1.0), 5000, 1, 0.0);
  const SurfaceErrors pe = curvature_errors(plane, estimate_all(plane, plane_cfg));
  const double plane_e = std::max(median_of(pe.tau1_err), median_of(pe.tau2_err));

  const double seconds = now_s() - t0;
  CHECK(line(3, "sphere |tau| error", sphere_e1 < 0.15 && sphere_e2 < 0.15,
             fmt("medians %.3f / %.3f (< 0.15)", sphere_e1, sphere_e2)));
  CHECK(line(3, "cylinder tau1 and tau2", cyl_e1 < 0.3 && cyl_t2 < 0.2,
             fmt("tau1 err %.3f (< 0.3), |tau2| %.3f (< 0.2)", cyl_e1, cyl_t2)));
  CHECK(line(3, "cylinder bending direction", cyl_dir < 10.0,
             fmt("median %.2f deg (< %g)", cyl_dir, 10.0)));
  CHECK(line(3, "plane |tau|", plane_e < 0.05,
             fmt("median %.4f (< %g)", plane_e, 0.05)));
  CHECK(line(3, "runtime", seconds < 10.0, fmt("%.2f s (< %g)", seconds, 10.0)));
}

TEST_CASE("criterion 4: varifold WSFF accuracy") {
  EstimatorConfig cfg;
  cfg.k_neighbors = 20;

  const PointCloud sphere = sample_surface(AnalyticSurface::sphere(1.0), 5000, 1, 0.0);
  const EstimationResult mani = estimate_all(sphere, cfg);
  const EstimationResult vari = estimate_all_varifold(sphere, mani.frames, cfg);
  const SurfaceErrors se = curvature_errors(sphere, vari);
  const double sphere_e = std::max(median_of(se.tau1_err), median_of(se.tau2_err));

  std::vector<double> rel;
  for (std::size_t i = 0; i < sphere.size(); ++i) {
    if (mani.diagnostics[i].flagged || vari.diagnostics[i].flagged) continue;
    rel.push_back(std::abs(std::abs(vari.curvatures[i].tau1) -
                           std::abs(mani.curvatures[i].tau1)) /
                  std::abs(mani.curvatures[i].tau1));
  }
  const double disagree = median_of(rel);

  EstimatorConfig cyl_cfg;
  cyl_cfg.k_neighbors = 30;
  const PointCloud cyl = sample_surface(AnalyticSurface::cylinder(0.5), 5000, 1, 0.0);
  const EstimationResult cyl_mani = estimate_all(cyl, cyl_cfg);
  const SurfaceErrors ce =
      curvature_errors(cyl, estimate_all_varifold(cyl, cyl_mani.frames, cyl_cfg));
  const double cyl_e1 = median_of(ce.tau1_err);

  const PointCloud plane = sample_surface(AnalyticSurface::plane(1.0), 5000, 1, 0.0);
  const EstimationResult plane_mani = estimate_all(plane, cfg);
  const SurfaceErrors pe =
      curvature_errors(plane, estimate_all_varifold(plane, plane_mani.frames, cfg));
  const double plane_e = std::max(median_of(pe.tau1_err), median_of(pe.tau2_err));

  CHECK(line(4, "sphere |tau| error (20% rel)", sphere_e < 0.20,
             fmt("median %.3f (< 0.20)", sphere_e, 0)));
  CHECK(line(4, "cylinder tau1 error", cyl_e1 < 0.4,
             fmt("median %.3f (< %g)", cyl_e1, 0.4)));
  CHECK(line(4, "plane |tau|", plane_e < 0.05, fmt("median %.4f (< %g)", plane_e, 0.05)));
  CHECK(line(4, "cross-method disagreement", disagree < 0.20,
             fmt("median rel %.3f (< 0.20)", disagree, 0)));
}

TEST_CASE("criterion 5: WSFF algebra oracle") {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  const double t0 = now_s();
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const LocalFrame fi = random_frame(rng), fj = random_frame(rng);
    const Vec3 mu_i(uni(rng), uni(rng), uni(rng));
    const Vec3 mu_j(uni(rng), uni(rng), uni(rng));
    const Mat2 fast = wsff_pair_term(mu_i, mu_j, fi, fj);
    const Mat2 oracle = wsff_pair_term_tensor(mu_i, mu_j, fi, fj);
    worst = std::max(worst, (fast - oracle).cwiseAbs().maxCoeff());
  }
  const double seconds = now_s() - t0;
  CHECK(line(5, "pair term vs tensor contraction",
             worst < 1e-10 && seconds < 1.0,
             fmt("max |gap| %.2e (< 1e-10), %.2f s (< 1)", worst, seconds)));
}

TEST_CASE("criterion 6: exact warm-up invariants") {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> tau_uni(1e-4, 50.0);
  std::uniform_real_distribution<double> s_uni(0.01, 10.0);
  double worst_area = 0.0, worst_ratio = 0.0;
  for (int trial = 0; trial < 10000; ++trial) {
    const LocalFrame f = random_frame(rng);
    const double s_nbr = s_uni(rng);
    const CurvatureInfo c =
        make_curvature_info(tau_uni(rng), tau_uni(rng), f.u1, f.u2);
    Mat3 rot;
    Vec3 scales;
    warmup_covariance(f, c, s_nbr, 1e-3, 1e3, &rot, &scales);
    const ClampedCurvature t = clamp_curvature(c.tau1, c.tau2, 1e-3, 1e3);
    const double area = s_nbr * s_nbr / 4.0;
    worst_area = std::max(worst_area, std::abs(scales[0] * scales[1] - area) / area);
    worst_ratio = std::max(worst_ratio, std::abs(scales[0] / scales[1] - t.t1 / t.t2) /
                                            (t.t1 / t.t2));
  }
  CHECK(line(6, "area and ratio invariants",
             worst_area <= 1e-12 && worst_ratio <= 1e-12,
             fmt("worst rel errors %.2e / %.2e (<= 1e-12)", worst_area, worst_ratio)));
}

TEST_CASE("criterion 7: MAC vs mean curvature on the helicoid") {
  EstimatorConfig cfg;
  cfg.k_neighbors = 30;
  const PointCloud heli = sample_surface(AnalyticSurface::helicoid(1.0), 5000, 1, 0.0);
  const EstimationResult res = estimate_all(heli, cfg);
  std::vector<double> means, macs;
  const double margin = 2.0 * std::sqrt(res.bandwidth_t);
  for (std::size_t i = 0; i < heli.size(); ++i) {
    if (res.diagnostics[i].flagged || heli.boundary_distance[i] < margin) continue;
    means.push_back(0.5 * (res.curvatures[i].tau1 + res.curvatures[i].tau2));
    macs.push_back(res.curvatures[i].mac);
  }
  const double med_mean = std::abs(median_of(means));
  const double med_mac = median_of(macs);
  CHECK(line(7, "helicoid mean curvature vs MAC",
             med_mean < 0.05 && med_mac > 0.3,
             fmt("|median mean| %.4f (< 0.05), median MAC %.3f (> 0.3)", med_mean,
                 med_mac)));

  const auto heli_new = upsample_flat_regions(heli, res.curvatures, 0.1, 10);
  // patch-boundary points are excluded from acceptance statistics; count
  // only midpoints that originate from interior sources
  std::size_t heli_interior = 0;
  for (const UpsampledPoint& p : heli_new)
    if (heli.boundary_distance[p.source_a] >= margin) ++heli_interior;
  const PointCloud plane = sample_surface(AnalyticSurface::plane(1.0), 5000, 1, 0.0);
  EstimatorConfig plane_cfg;
  const EstimationResult plane_res = estimate_all(plane, plane_cfg);
  const auto plane_new = upsample_flat_regions(plane, plane_res.curvatures, 0.1, 10);
  CHECK(line(7, "upsampling trigger at xi_min 0.1",
             !plane_new.empty() && heli_interior == 0,
             fmt("plane emitted %g, helicoid interior emitted %g",
                 static_cast<double>(plane_new.size()),
                 static_cast<double>(heli_interior))));
}

TEST_CASE("criterion 8: update-rule displacement contracts") {
  std::mt19937_64 rng(123);
  std::normal_distribution<double> gauss;
  const double xi_min = 1e-3, omega = 0.02;
  double worst_normal_excess = 0.0, worst_tan = 0.0;
  for (int trial = 0; trial < 100000; ++trial) {
    const LocalFrame f = random_frame(rng);
    const Vec3 mu(gauss(rng), gauss(rng), gauss(rng));
    const Vec3 grad(gauss(rng), gauss(rng), gauss(rng));
    const double fp_slack = 1e-13 * grad.norm();

    const Vec3 shift = truncated_gradient_step(mu, grad, f, omega, xi_min) - mu;
    worst_normal_excess = std::max(
        worst_normal_excess, std::abs(shift.dot(f.normal)) - omega * (xi_min + fp_slack));
    worst_tan = std::max(worst_tan, (f.project_tangent(shift) +
                                     omega * f.project_tangent(grad))
                                        .norm());

    const Vec3 cshift = clone_primitive(mu, grad, f, xi_min) - mu;
    worst_normal_excess = std::max(worst_normal_excess,
                                   std::abs(cshift.dot(f.normal)) - (xi_min + fp_slack));
    worst_tan = std::max(
        worst_tan, (f.project_tangent(cshift) - f.project_tangent(grad)).norm());
  }
  CHECK(line(8, "normal bound and tangential match",
             worst_normal_excess <= 0.0 && worst_tan < 1e-12,
             fmt("worst excess %.2e (<= 0), worst tangential gap %.2e (< 1e-12)",
                 worst_normal_excess, worst_tan)));
}

TEST_CASE("criterion 9: regularizer gradients and optima") {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> uni(0.2, 4.0);
  const double h = 1e-6;
  double worst_scale = 0.0;
  int checked = 0;
  while (checked < 100) {
    ClampedCurvature c{uni(rng) + 1.0, uni(rng) * 0.2 + 0.05};
    if (c.t1 < c.t2) std::swap(c.t1, c.t2);
    const double s1 = uni(rng) + 1.0, s2 = uni(rng) * 0.3 + 0.1, s3 = uni(rng) * 0.1;
    if (std::abs(s1 / s2 - c.t1 / c.t2 - 1e-3) < 1e-3) continue;  // kink
    const RegularizerResult r = scale_regularizer(s1, s2, s3, c, 1e-3);
    const double svals[3] = {s1, s2, s3};
    for (int d = 0; d < 3; ++d) {
      const double step = std::max(h * std::abs(svals[d]), 1e-9);
      double args[3] = {s1, s2, s3};
      args[d] += step;
      const double up = scale_regularizer(args[0], args[1], args[2], c, 1e-3).loss;
      args[d] -= 2 * step;
      const double dn = scale_regularizer(args[0], args[1], args[2], c, 1e-3).loss;
      const double fd = (up - dn) / (2 * step);
      const double scale = std::max({std::abs(fd), std::abs(r.grad_scales[d]), 1e-6});
      worst_scale = std::max(worst_scale, std::abs(r.grad_scales[d] - fd) / scale);
    }
    ++checked;
  }

  double worst_rot = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const LocalFrame f = random_frame(rng);
    const CurvatureInfo c = make_curvature_info(2.0, 0.5, f.u1, f.u2);
    const LocalFrame g = random_frame(rng);
    Mat3 rot;
    rot.col(0) = g.u1;
    rot.col(1) = g.u2;
    rot.col(2) = g.normal;
    const RegularizerResult r = rotation_regularizer(rot, f, c);
    for (int d = 0; d < 3; ++d)
      for (int row = 0; row < 3; ++row) {
        Mat3 plus = rot, minus = rot;
        plus(row, d) += h;
        minus(row, d) -= h;
        const double fd = (rotation_regularizer(plus, f, c).loss -
                           rotation_regularizer(minus, f, c).loss) /
                          (2 * h);
        const double scale =
            std::max({std::abs(fd), std::abs(r.grad_rotation(row, d)), 1e-6});
        worst_rot = std::max(worst_rot, std::abs(r.grad_rotation(row, d) - fd) / scale);
      }
  }
  CHECK(line(9, "gradients vs finite differences",
             worst_scale < 1e-5 && worst_rot < 1e-5,
             fmt("worst rel gaps: scale %.2e, rotation %.2e (< 1e-5)", worst_scale,
                 worst_rot)));

  // exact zeros at the stated optima (exactly representable frame, so no
  // rounding enters the inner products)
  const LocalFrame f;  // canonical axes
  const CurvatureInfo c = make_curvature_info(3.0, 1.0, f.u1, f.u2);
  const ClampedCurvature t = clamp_curvature(3.0, 1.0, 1e-3, 1e3);
  const double ratio_loss =
      scale_regularizer(3.0 * 0.25, 1.0 * 0.25, 0.0, t, 1e-3).loss;
  Mat3 aligned;
  aligned.col(0) = -c.dir2;  // sign freedom must not be penalized
  aligned.col(1) = c.dir1;
  aligned.col(2) = f.normal;
  const double rot_loss = rotation_regularizer(aligned, f, c).loss;
  CHECK(line(9, "losses vanish at the optima",
             ratio_loss == 0.0 && rot_loss == 0.0,
             fmt("ratio-matched %.1e, sign-aligned %.1e (== 0)", ratio_loss,
                 rot_loss)));
}

TEST_CASE("criterion 10: split offset statistics") {
  std::mt19937_64 rng(53);
  std::normal_distribution<double> gauss;
  const LocalFrame f = random_frame(rng);
  const CurvatureInfo dirs = make_curvature_info(2.5, 0.8, f.u1, f.u2);
  const ClampedCurvature c = clamp_curvature(2.5, 0.8, 1e-3, 1e3);
  const double xi_min = 1e-3;
  const int n = 100000;
  double s1 = 0.0, s2 = 0.0, s3 = 0.0;
  for (int i = 0; i < n; ++i) {
    const Vec3 rho(gauss(rng), gauss(rng), gauss(rng));
    const Vec3 off = split_primitive(Vec3::Zero(), f, c, dirs, rho, xi_min);
    s1 += std::pow(off.dot(dirs.dir1), 2);
    s2 += std::pow(off.dot(dirs.dir2), 2);
    s3 += std::pow(off.dot(f.normal), 2);
  }
  const double r1 = std::sqrt(s1 / n) * c.t1;       // want 1
  const double r2 = std::sqrt(s2 / n) * c.t2;       // want 1
  const double r3 = std::sqrt(s3 / n) / xi_min;     // want 1
  const bool pass = std::abs(r1 - 1.0) < 0.02 && std::abs(r2 - 1.0) < 0.02 &&
                    std::abs(r3 - 1.0) < 0.02;
  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "std ratios %.4f / %.4f / %.4f (within 2%% of 1)", r1, r2, r3);
  CHECK(line(10, "Monte Carlo deviations", pass, buf));
}

TEST_CASE("criterion 11: million-point throughput") {
  const int hw = static_cast<int>(std::thread::hardware_concurrency());
  const PointCloud cloud =
      sample_surface(AnalyticSurface::sphere(1.0), 1000000, 3, 0.0);
  EstimatorConfig cfg;
  cfg.k_neighbors = 16;
  const double t0 = now_s();
  const EstimationResult res = estimate_all(cloud, cfg);
  const double seconds = now_s() - t0;
  const bool within = seconds < 60.0;
  // hard gate on desk-scale hardware (>= 8 cores), soft elsewhere
  const bool pass = within || hw < 8;
  char buf[200];
  std::snprintf(buf, sizeof(buf),
                "%.1f s for both passes on %d threads (< 60; %s gate), "
                "index %.1fs p1 %.1fs p2 %.1fs",
                seconds, hw, hw >= 8 ? "hard" : "soft", res.seconds_index,
                res.seconds_pass1, res.seconds_pass2);
  CHECK(line(11, "1M points, k=16", pass, buf));
}

TEST_CASE("criterion 12: equivariance and determinism") {
  const PointCloud cloud = sample_surface(AnalyticSurface::torus(2.0, 0.5), 1000, 4, 0.0);
  Eigen::Quaterniond q(0.3, -0.5, 0.8, 0.11);
  q.normalize();
  const Mat3 rot = q.toRotationMatrix();
  const Vec3 shift(0.4, -1.2, 2.5);
  PointCloud moved = cloud;
  for (Vec3& p : moved.positions) p = rot * p + shift;

  EstimatorConfig cfg;
  const EstimationResult a = estimate_all(cloud, cfg);
  const EstimationResult b = estimate_all(moved, cfg);
  double worst = 0.0;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    if (a.diagnostics[i].flagged || b.diagnostics[i].flagged) continue;
    const double sign =
        (rot * a.frames[i].normal).dot(b.frames[i].normal) >= 0.0 ? 1.0 : -1.0;
    worst = std::max(worst,
                     std::abs(sign * a.curvatures[i].tau1 - b.curvatures[i].tau1));
    worst = std::max(worst,
                     std::abs(sign * a.curvatures[i].tau2 - b.curvatures[i].tau2));
    const Vec3 rn = rot * a.frames[i].normal;
    worst = std::max(worst, std::min((rn - b.frames[i].normal).norm(),
                                     (rn + b.frames[i].normal).norm()));
    const Vec3 rd = rot * a.curvatures[i].dir1;
    worst = std::max(worst, std::min((rd - b.curvatures[i].dir1).norm(),
                                     (rd + b.curvatures[i].dir1).norm()));
  }
  CHECK(line(12, "rigid-motion equivariance", worst < 1e-6,
             fmt("worst deviation %.2e (< 1e-6)", worst, 0)));

  // byte-identical reports for identical seed + config, timings aside
  auto make_report = [&]() {
    const CampaignCell cell;  // sphere:1.0, n 5000, manifold, defaults
    const CellRun run = run_cell(cell, 42);
    RunReport report;
    report.config.surface_spec = cell.surface_spec;
    report.config.n = cell.n;
    report.config.seed = 42;
    report.config.estimator = cell.config;
    report.resolved_bandwidth_t = run.result.bandwidth_t;
    report.resolved_xi_max = run.resolved_xi_max;
    report.cloud = &run.cloud;
    report.result = &run.result;
    report.aggregates = run.aggregates;
    report.seconds_pass1 = now_s();  // timings intentionally differ
    auto j = nlohmann::json::parse(report_to_json_string(report));
    j.erase("timings");
    return j.dump();
  };
  const std::string first = make_report();
  const std::string second = make_report();
  CHECK(line(12, "byte-identical reports", first == second,
             first == second ? "identical net of the timings block"
                             : "reports differ"));
}
