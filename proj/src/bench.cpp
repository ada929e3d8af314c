#include "splatgeo/bench.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <fstream>
#include <sstream>

#include "splatgeo/manifold.hpp"
#include "splatgeo/parallel.hpp"
#include "splatgeo/splat_ops.hpp"
#include "splatgeo/surfaces.hpp"
#include "splatgeo/varifold.hpp"

namespace splatgeo {

namespace {

using nlohmann::json;

double median_of(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

EstimationResult run_pca_frames(const PointCloud& cloud, const EstimatorConfig& cfg) {
  const auto n = static_cast<std::int64_t>(cloud.size());
  EstimationResult out;
  out.frames.resize(n);
  out.curvatures.resize(n);
  out.diagnostics.resize(n);
  const auto t0 = std::chrono::steady_clock::now();
  const KdTree tree(cloud.positions);
  out.seconds_index =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  out.bandwidth_t = resolve_bandwidth(tree, cfg.k_neighbors, cfg.bandwidth_t);
  const auto t1 = std::chrono::steady_clock::now();
  parallel_for(n, cfg.threads, [&](std::int64_t i) {
    try {
      out.frames[i] = pca_baseline_frame(tree, static_cast<int>(i), cfg.k_neighbors);
    } catch (const std::exception& e) {
      out.diagnostics[i].flagged = true;
      out.diagnostics[i].flag_reason = e.what();
    }
  });
  out.seconds_pass1 =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t1).count();
  return out;
}

}  // namespace

std::vector<std::string> validate(const CampaignSpec& spec) {
  std::vector<std::string> v;
  if (spec.repetitions < 1) v.push_back("repetitions < 1");
  for (const CampaignCell& c : spec.cells) {
    if (c.n < c.config.k_neighbors + 1)
      v.push_back("cell n must exceed k_neighbors (" + c.surface_spec + ")");
    if (c.method != "manifold" && c.method != "varifold" && c.method != "pca")
      v.push_back("unknown method '" + c.method + "'");
  }
  return v;
}

CampaignSpec load_campaign_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open campaign spec: " + path);
  json root;
  in >> root;
  CampaignSpec spec;
  spec.repetitions = root.value("repetitions", 1);
  spec.seed_base = root.value("seed_base", 1ull);
  for (const json& c : root.at("cells")) {
    CampaignCell cell;
    cell.surface_spec = c.value("surface", "sphere:1.0");
    cell.n = c.value("n", 5000);
    cell.sigma = c.value("sigma", 0.0);
    cell.method = c.value("method", "manifold");
    cell.config.k_neighbors = c.value("k", 20);
    cell.config.bandwidth_t = c.value("t", 0.0);
    cell.config.varifold_eps = c.value("eps", 0.0);
    cell.config.xi_min = c.value("xi_min", 1e-3);
    cell.config.threads = c.value("threads", 0);
    spec.cells.push_back(std::move(cell));
  }
  return spec;
}

CellRun run_cell(const CampaignCell& cell, std::uint64_t seed) {
  CellRun run;
  const AnalyticSurface surface = parse_surface_spec(cell.surface_spec);
  run.cloud = sample_surface(surface, cell.n, seed, cell.sigma);
  if (cell.method == "manifold") {
    run.result = estimate_all(run.cloud, cell.config);
  } else if (cell.method == "varifold") {
    const EstimationResult frames = estimate_all(run.cloud, cell.config);
    run.result = estimate_all_varifold(run.cloud, frames.frames, cell.config);
    run.result.seconds_index += frames.seconds_index;
    run.result.seconds_pass1 += frames.seconds_pass1;
    run.result.bandwidth_t = frames.bandwidth_t;
  } else if (cell.method == "pca") {
    run.result = run_pca_frames(run.cloud, cell.config);
  } else {
    throw std::invalid_argument("run_cell: unknown method " + cell.method);
  }
  run.aggregates = compute_aggregates(run.cloud, run.result);
  if (cell.method == "pca")
    run.aggregates.has_curvatures = false;
  else
    run.resolved_xi_max = resolve_xi_max(run.result.curvatures, cell.config.xi_min);
  return run;
}

CampaignReport run_campaign(const CampaignSpec& spec) {
  {
    const auto issues = validate(spec);
    if (!issues.empty())
      throw std::invalid_argument("run_campaign: " + issues.front());
  }
  CampaignReport report;
  for (const CampaignCell& cell : spec.cells) {
    CellResult res;
    res.cell = cell;
    std::vector<double> t_index, t_p1, t_p2, t_total;
    bool first = true;
    for (int rep = 0; rep < spec.repetitions && !res.failed; ++rep) {
      try {
        const CellRun run = run_cell(cell, spec.seed_base);
        t_index.push_back(run.result.seconds_index);
        t_p1.push_back(run.result.seconds_pass1);
        t_p2.push_back(run.result.seconds_pass2);
        t_total.push_back(run.result.seconds_index + run.result.seconds_pass1 +
                          run.result.seconds_pass2);
        if (first) {
          res.aggregates = run.aggregates;
          first = false;
        } else if (run.aggregates.median_normal_error_deg !=
                       res.aggregates.median_normal_error_deg ||
                   run.aggregates.median_abs_curvature_error !=
                       res.aggregates.median_abs_curvature_error) {
          report.warnings.push_back("accuracy varied across repetitions in cell " +
                                    cell.surface_spec + "/" + cell.method);
        }
      } catch (const std::exception& e) {
        res.failed = true;
        res.error = e.what();
      }
    }
    if (!res.failed) {
      res.median_seconds_index = median_of(t_index);
      res.median_seconds_pass1 = median_of(t_p1);
      res.median_seconds_pass2 = median_of(t_p2);
      res.median_seconds_total = median_of(t_total);
    }
    report.cells.push_back(std::move(res));
  }

  // soft assertion: at every noisy cell group, manifold/varifold normals
  // should not lose to the pca baseline
  for (const CellResult& a : report.cells) {
    if (a.failed || a.cell.method == "pca" || !(a.cell.sigma > 0.0)) continue;
    for (const CellResult& b : report.cells) {
      if (b.failed || b.cell.method != "pca") continue;
      if (b.cell.surface_spec != a.cell.surface_spec || b.cell.n != a.cell.n ||
          b.cell.sigma != a.cell.sigma ||
          b.cell.config.k_neighbors != a.cell.config.k_neighbors)
        continue;
      if (a.aggregates.median_normal_error_deg >
          b.aggregates.median_normal_error_deg) {
        std::ostringstream msg;
        msg << "noise sweep: " << a.cell.method << " median normal error "
            << a.aggregates.median_normal_error_deg << " deg exceeds pca "
            << b.aggregates.median_normal_error_deg << " deg at sigma "
            << a.cell.sigma << " on " << a.cell.surface_spec;
        report.warnings.push_back(msg.str());
      }
    }
  }

  // soft assertion: near-linear pass-1 scaling
  for (const CellResult& a : report.cells) {
    if (a.failed) continue;
    for (const CellResult& b : report.cells) {
      if (b.failed || b.cell.method != a.cell.method ||
          b.cell.surface_spec != a.cell.surface_spec ||
          b.cell.sigma != a.cell.sigma ||
          b.cell.config.k_neighbors != a.cell.config.k_neighbors)
        continue;
      // below ~50 ms the comparison only measures timer noise
      if (b.cell.n == 2 * a.cell.n && a.median_seconds_pass1 > 0.05 &&
          b.median_seconds_pass1 > 2.6 * a.median_seconds_pass1) {
        std::ostringstream msg;
        msg << "scalability: pass-1 wall clock grew " << b.median_seconds_pass1 /
               a.median_seconds_pass1
            << "x when n doubled (" << a.cell.n << " -> " << b.cell.n << ")";
        report.warnings.push_back(msg.str());
      }
    }
  }
  return report;
}

std::string campaign_to_csv_string(const CampaignReport& report) {
  std::ostringstream out;
  out << "surface,n,sigma,method,k,failed,median_normal_error_deg,"
         "p90_normal_error_deg,median_abs_curvature_error,median_tau1_abs_error,"
         "median_tau2_abs_error,median_dir1_error_deg,median_mac,"
         "seconds_index,seconds_pass1,seconds_pass2,seconds_total\n";
  char buf[64];
  auto num = [&](double v) {
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    out << buf;
  };
  for (const CellResult& c : report.cells) {
    out << c.cell.surface_spec << ',' << c.cell.n << ',';
    num(c.cell.sigma);
    out << ',' << c.cell.method << ',' << c.cell.config.k_neighbors << ','
        << (c.failed ? 1 : 0) << ',';
    num(c.aggregates.median_normal_error_deg); out << ',';
    num(c.aggregates.p90_normal_error_deg); out << ',';
    if (c.aggregates.has_curvatures) {
      num(c.aggregates.median_abs_curvature_error); out << ',';
      num(c.aggregates.median_tau1_abs_error); out << ',';
      num(c.aggregates.median_tau2_abs_error); out << ',';
      num(c.aggregates.median_dir1_error_deg); out << ',';
      num(c.aggregates.median_mac); out << ',';
    } else {
      out << ",,,,,";
    }
    num(c.median_seconds_index); out << ',';
    num(c.median_seconds_pass1); out << ',';
    num(c.median_seconds_pass2); out << ',';
    num(c.median_seconds_total); out << '\n';
  }
  return out.str();
}

std::string campaign_to_json_string(const CampaignReport& report) {
  json root;
  json cells = json::array();
  for (const CellResult& c : report.cells) {
    json jc;
    jc["surface"] = c.cell.surface_spec;
    jc["n"] = c.cell.n;
    jc["sigma"] = round9(c.cell.sigma);
    jc["method"] = c.cell.method;
    jc["k"] = c.cell.config.k_neighbors;
    jc["failed"] = c.failed;
    if (c.failed) {
      jc["error"] = c.error;
    } else {
      jc["median_normal_error_deg"] = round9(c.aggregates.median_normal_error_deg);
      if (c.aggregates.has_curvatures) {
        jc["median_abs_curvature_error"] =
            round9(c.aggregates.median_abs_curvature_error);
        jc["median_tau1_abs_error"] = round9(c.aggregates.median_tau1_abs_error);
        jc["median_tau2_abs_error"] = round9(c.aggregates.median_tau2_abs_error);
        jc["median_dir1_error_deg"] = round9(c.aggregates.median_dir1_error_deg);
        jc["median_mac"] = round9(c.aggregates.median_mac);
      }
      json t;
      t["seconds_index"] = c.median_seconds_index;
      t["seconds_pass1"] = c.median_seconds_pass1;
      t["seconds_pass2"] = c.median_seconds_pass2;
      t["seconds_total"] = c.median_seconds_total;
      jc["timings"] = std::move(t);
    }
    cells.push_back(std::move(jc));
  }
  root["cells"] = std::move(cells);
  root["warnings"] = report.warnings;
  return root.dump(2) + "\n";
}

}  // namespace splatgeo
