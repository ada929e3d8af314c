#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "splatgeo/core.hpp"
#include "splatgeo/manifold.hpp"

namespace splatgeo {

/// Parse or write failure carrying the byte offset or line of the problem.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class PlyFormat { Ascii, BinaryLittleEndian };

/// Reads PLY (ascii / binary little-endian; x/y/z as float32 or float64,
/// optional red/green/blue uint8, optional nx/ny/nz) or CSV with header
/// `x,y,z[,r,g,b]`. File kind chosen by extension (.ply / .csv).
PointCloud read_point_cloud(const std::string& path);

/// Writes positions (+ colors when present) as PLY. Binary output written by
/// this function reads back bit-exactly. `new_point_flags`, when given, adds
/// a uchar property `flag_new` per vertex.
void write_point_cloud(const std::string& path, const PointCloud& cloud,
                       PlyFormat format = PlyFormat::BinaryLittleEndian,
                       const std::vector<std::uint8_t>* new_point_flags = nullptr);

void write_point_cloud_csv(const std::string& path, const PointCloud& cloud);

struct RunConfig {
  std::string input_path;
  std::string output_path;
  std::string method = "manifold";  // manifold | varifold | pca
  std::string surface_spec;         // bench/compare only
  int n = 5000;
  double noise_sigma = 0.0;
  std::uint64_t seed = 1;
  std::string report_format = "json";  // json | csv
  EstimatorConfig estimator;
};

/// Error statistics against recorded ground truth. Open-surface points
/// closer than 2 * (mean k-th neighbor distance) to the patch boundary are
/// excluded, as are flagged points.
struct Aggregates {
  int n_points = 0;
  int n_flagged = 0;
  int n_interior = 0;
  bool has_ground_truth = false;
  bool has_curvatures = true;  // false for the frames-only pca baseline
  double median_normal_error_deg = 0.0;
  double p90_normal_error_deg = 0.0;
  double median_abs_curvature_error = 0.0;  // pooled |  |tau_d| - |gt_d| |
  double p90_abs_curvature_error = 0.0;
  double median_tau1_abs_error = 0.0;
  double median_tau2_abs_error = 0.0;
  double median_dir1_error_deg = 0.0;  // where ground-truth |tau1| > |tau2|
  double median_mac = 0.0;
  double median_mean_curvature = 0.0;
};

Aggregates compute_aggregates(const PointCloud& cloud, const EstimationResult& result);

/// Everything a reproducible run emits. Timings live in their own block so
/// reports can be compared net of wall-clock noise.
struct RunReport {
  RunConfig config;          // with resolved auto values echoed below
  double resolved_bandwidth_t = 0.0;
  double resolved_eps = 0.0;
  double resolved_xi_max = 0.0;
  const PointCloud* cloud = nullptr;
  const EstimationResult* result = nullptr;
  Aggregates aggregates;
  double seconds_index = 0.0;
  double seconds_pass1 = 0.0;
  double seconds_pass2 = 0.0;
};

/// JSON (schema_version 1) or CSV per-point table; floating point values
/// carry 9 significant digits; files are written atomically.
void write_report(const RunReport& report, const std::string& format,
                  const std::string& path);

std::string report_to_json_string(const RunReport& report);
std::string report_to_csv_string(const RunReport& report);

/// Rounds to 9 significant digits (the report serialization grid).
double round9(double v);

}  // namespace splatgeo
