// Benchmarks the OpenMP estimation kernels against the serial reference
// implementation and the single-thread production path, and verifies they
// agree on the same cloud.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <string>

#include "splatgeo/manifold.hpp"
#include "splatgeo/parallel.hpp"
#include "splatgeo/surfaces.hpp"
#include "splatgeo/varifold.hpp"

namespace sg = splatgeo;

namespace {

double now_seconds() {
  return std::chrono::duration<double>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

double max_curvature_gap(const sg::EstimationResult& a, const sg::EstimationResult& b) {
  double gap = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    gap = std::max(gap, std::abs(std::abs(a.curvatures[i].tau1) -
                                 std::abs(b.curvatures[i].tau1)));
    gap = std::max(gap, std::abs(std::abs(a.curvatures[i].tau2) -
                                 std::abs(b.curvatures[i].tau2)));
  }
  return gap;
}

}  // namespace

int main(int argc, char** argv) {
  int n_ref = 4000;       // reference path is O(n^2) in the neighbor scan
  int n_scale = 200000;   // production threads sweep
  if (argc > 1) n_ref = std::atoi(argv[1]);
  if (argc > 2) n_scale = std::atoi(argv[2]);

  const int hw = sg::resolve_threads(0);
  std::printf("hardware threads: %d\n\n", hw);

  sg::EstimatorConfig cfg;
  cfg.k_neighbors = 20;

  {
    const sg::PointCloud cloud =
        sg::sample_surface(sg::AnalyticSurface::sphere(1.0), n_ref, 7, 0.0);
    std::printf("serial reference vs production (sphere, n=%d, k=%d)\n", n_ref,
                cfg.k_neighbors);
    double t0 = now_seconds();
    const sg::EstimationResult ref = sg::reference::estimate_all_serial(cloud, cfg);
    const double t_ref = now_seconds() - t0;

    sg::EstimatorConfig cfg1 = cfg;
    cfg1.threads = 1;
    t0 = now_seconds();
    const sg::EstimationResult serial = sg::estimate_all(cloud, cfg1);
    const double t_serial = now_seconds() - t0;

    sg::EstimatorConfig cfgN = cfg;
    cfgN.threads = hw;
    t0 = now_seconds();
    const sg::EstimationResult parallel = sg::estimate_all(cloud, cfgN);
    const double t_parallel = now_seconds() - t0;

    std::printf("  reference (brute force + nested defects): %8.3f s\n", t_ref);
    std::printf("  production, 1 thread:                     %8.3f s (%.1fx)\n",
                t_serial, t_ref / t_serial);
    std::printf("  production, %d threads:                    %8.3f s (%.1fx)\n", hw,
                t_parallel, t_ref / t_parallel);
    std::printf("  max |tau| gap reference vs production: %.3g\n",
                max_curvature_gap(ref, serial));
    std::printf("  max |tau| gap 1-thread vs %d-thread:    %.3g\n\n", hw,
                max_curvature_gap(serial, parallel));
  }

  {
    const sg::PointCloud cloud =
        sg::sample_surface(sg::AnalyticSurface::sphere(1.0), n_scale, 7, 0.0);
    std::printf("production threads sweep (sphere, n=%d, k=16)\n", n_scale);
    sg::EstimatorConfig c = cfg;
    c.k_neighbors = 16;
    double t_one = 0.0;
    for (int threads = 1; threads <= hw; threads *= 2) {
      c.threads = threads;
      const double t0 = now_seconds();
      const sg::EstimationResult r = sg::estimate_all(cloud, c);
      const double dt = now_seconds() - t0;
      if (threads == 1) t_one = dt;
      std::printf("  threads=%2d  index %6.2fs  pass1 %6.2fs  pass2 %6.2fs  "
                  "total %6.2fs  speedup %.2fx\n",
                  threads, r.seconds_index, r.seconds_pass1, r.seconds_pass2, dt,
                  t_one / dt);
    }
  }
  return 0;
}
