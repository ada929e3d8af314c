#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <fstream>

#include "splatgeo/bench.hpp"

using namespace splatgeo;

TEST_CASE("one-cell campaign produces one row") {
  CampaignSpec spec;
  CampaignCell cell;
  cell.surface_spec = "sphere:1.0";
  cell.n = 1000;
  spec.cells.push_back(cell);
  const CampaignReport report = run_campaign(spec);
  REQUIRE(report.cells.size() == 1);
  CHECK(!report.cells[0].failed);
  CHECK(report.cells[0].aggregates.n_points == 1000);
  CHECK(report.cells[0].aggregates.median_normal_error_deg < 5.0);
  const std::string csv = campaign_to_csv_string(report);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 2);
}

TEST_CASE("accuracy is identical across repetitions") {
  CampaignSpec spec;
  spec.repetitions = 3;
  CampaignCell cell;
  cell.surface_spec = "cylinder:0.5";
  cell.n = 800;
  spec.cells.push_back(cell);
  const CampaignReport report = run_campaign(spec);
  for (const std::string& w : report.warnings)
    CHECK(w.find("accuracy varied") == std::string::npos);
}

TEST_CASE("invalid cells are rejected") {
  CampaignSpec spec;
  CampaignCell cell;
  cell.n = 10;  // below k_neighbors + 1
  spec.cells.push_back(cell);
  CHECK_THROWS_AS(run_campaign(spec), std::invalid_argument);
  spec.cells[0].n = 1000;
  spec.cells[0].method = "magic";
  CHECK_THROWS_AS(run_campaign(spec), std::invalid_argument);
}

TEST_CASE("cell failures are recorded and the campaign continues") {
  CampaignSpec spec;
  CampaignCell good;
  good.n = 500;
  CampaignCell bad;
  bad.surface_spec = "sphere:-1.0";  // invalid radius
  bad.n = 500;
  spec.cells = {bad, good};
  const CampaignReport report = run_campaign(spec);
  REQUIRE(report.cells.size() == 2);
  CHECK(report.cells[0].failed);
  CHECK(!report.cells[1].failed);
}

TEST_CASE("campaign spec loads from json") {
  const std::string path = "campaign_spec_test.json";
  {
    std::ofstream out(path);
    out << R"({"repetitions": 2, "seed_base": 9,
               "cells": [{"surface": "plane", "n": 600, "sigma": 0.002,
                          "method": "pca", "k": 12}]})";
  }
  const CampaignSpec spec = load_campaign_spec(path);
  std::remove(path.c_str());
  CHECK(spec.repetitions == 2);
  CHECK(spec.seed_base == 9);
  REQUIRE(spec.cells.size() == 1);
  CHECK(spec.cells[0].method == "pca");
  CHECK(spec.cells[0].config.k_neighbors == 12);
}

TEST_CASE("noise sweep emits the comparative warning when pca wins") {
  // tiny n keeps this cheap; the warning machinery is what is under test
  CampaignSpec spec;
  for (const char* m : {"manifold", "pca"}) {
    CampaignCell cell;
    cell.surface_spec = "sphere:1.0";
    cell.n = 400;
    cell.sigma = 0.01;
    cell.method = m;
    spec.cells.push_back(cell);
  }
  const CampaignReport report = run_campaign(spec);
  REQUIRE(report.cells.size() == 2);
  const bool manifold_wins = report.cells[0].aggregates.median_normal_error_deg <=
                             report.cells[1].aggregates.median_normal_error_deg;
  bool warned = false;
  for (const std::string& w : report.warnings)
    warned = warned || w.find("noise sweep") != std::string::npos;
  CHECK(warned == !manifold_wins);
}
