#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "splatgeo/core.hpp"
#include "splatgeo/io.hpp"

namespace splatgeo {

struct CampaignCell {
  std::string surface_spec = "sphere:1.0";
  int n = 5000;
  double sigma = 0.0;
  std::string method = "manifold";  // manifold | varifold | pca
  EstimatorConfig config;
};

struct CampaignSpec {
  std::vector<CampaignCell> cells;
  int repetitions = 1;
  std::uint64_t seed_base = 1;
};

std::vector<std::string> validate(const CampaignSpec& spec);

CampaignSpec load_campaign_spec(const std::string& path);

struct CellResult {
  CampaignCell cell;
  bool failed = false;
  std::string error;
  Aggregates aggregates;  // identical across repetitions (determinism)
  double median_seconds_index = 0.0;
  double median_seconds_pass1 = 0.0;
  double median_seconds_pass2 = 0.0;
  double median_seconds_total = 0.0;
};

struct CampaignReport {
  std::vector<CellResult> cells;
  std::vector<std::string> warnings;
};

/// Runs every cell sequentially (stable timings; estimators parallelize
/// internally), medians timings over repetitions, and appends soft-assertion
/// warnings: noise cells where the pca baseline beats manifold/varifold
/// normals, and pass-1 scaling beyond 2.6x when a cell doubles another's n.
CampaignReport run_campaign(const CampaignSpec& spec);

std::string campaign_to_csv_string(const CampaignReport& report);
std::string campaign_to_json_string(const CampaignReport& report);

/// One cell end to end; the building block run_campaign repeats. Fills the
/// report's result/aggregates/timings for the given seed.
struct CellRun {
  PointCloud cloud;
  EstimationResult result;
  Aggregates aggregates;
  double resolved_xi_max = 0.0;
};
CellRun run_cell(const CampaignCell& cell, std::uint64_t seed);

}  // namespace splatgeo
