#include "splatgeo/io.hpp"

#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace splatgeo {

namespace {

using nlohmann::json;

struct PlyProperty {
  std::string name;
  std::string type;
  int byte_size = 0;
  bool is_list = false;
};

int scalar_size(const std::string& type) {
  if (type == "char" || type == "int8" || type == "uchar" || type == "uint8")
    return 1;
  if (type == "short" || type == "int16" || type == "ushort" || type == "uint16")
    return 2;
  if (type == "int" || type == "int32" || type == "uint" || type == "uint32" ||
      type == "float" || type == "float32")
    return 4;
  if (type == "double" || type == "float64") return 8;
  return 0;
}

std::vector<double> percentile_prep(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return v;
}

double percentile(const std::vector<double>& sorted, double p) {
  if (sorted.empty()) return 0.0;
  const double pos = p * (static_cast<double>(sorted.size()) - 1.0);
  const std::size_t lo = static_cast<std::size_t>(pos);
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] * (1.0 - frac) + sorted[hi] * frac;
}

double median(const std::vector<double>& values) {
  if (values.empty()) return 0.0;
  return percentile(percentile_prep(values), 0.5);
}

void atomic_write(const std::string& path, const std::string& payload) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw IoError("cannot open for writing: " + tmp);
    out.write(payload.data(), static_cast<std::streamsize>(payload.size()));
    if (!out) throw IoError("write failed: " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

PointCloud read_ply(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open: " + path);

  std::string line;
  std::size_t offset = 0;
  auto next_line = [&]() -> std::string {
    if (!std::getline(in, line))
      throw IoError("ply: truncated header at byte " + std::to_string(offset) +
                    " in " + path);
    offset += line.size() + 1;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return line;
  };

  if (next_line() != "ply")
    throw IoError("ply: missing magic at byte 0 in " + path);
  bool binary = false;
  {
    const std::string fmt = next_line();
    if (fmt == "format ascii 1.0")
      binary = false;
    else if (fmt == "format binary_little_endian 1.0")
      binary = true;
    else
      throw IoError("ply: unsupported format line '" + fmt + "' at byte " +
                    std::to_string(offset - fmt.size() - 1) + " in " + path);
  }

  long long vertex_count = -1;
  std::vector<PlyProperty> props;
  bool in_vertex_element = false;
  while (true) {
    const std::string l = next_line();
    if (l == "end_header") break;
    std::istringstream ss(l);
    std::string word;
    ss >> word;
    if (word == "comment" || word == "obj_info") continue;
    if (word == "element") {
      std::string name;
      long long count = 0;
      ss >> name >> count;
      if (name == "vertex") {
        if (vertex_count >= 0)
          throw IoError("ply: duplicate vertex element in " + path);
        vertex_count = count;
        in_vertex_element = true;
      } else {
        if (vertex_count < 0)
          throw IoError("ply: vertex element must come first in " + path);
        in_vertex_element = false;  // trailing elements are ignored
      }
      continue;
    }
    if (word == "property") {
      if (!in_vertex_element) continue;
      PlyProperty p;
      ss >> p.type;
      if (p.type == "list") {
        p.is_list = true;
        std::string a, b;
        ss >> a >> b >> p.name;
        throw IoError("ply: unsupported list property '" + p.name +
                      "' in the vertex element of " + path);
      }
      ss >> p.name;
      p.byte_size = scalar_size(p.type);
      if (p.byte_size == 0)
        throw IoError("ply: unsupported property type '" + p.type + "' for '" +
                      p.name + "' in " + path);
      props.push_back(p);
      continue;
    }
    throw IoError("ply: unrecognized header line '" + l + "' in " + path);
  }
  if (vertex_count < 0) throw IoError("ply: no vertex element in " + path);

  int ix = -1, iy = -1, iz = -1, ir = -1, ig = -1, ib = -1;
  for (std::size_t p = 0; p < props.size(); ++p) {
    const std::string& name = props[p].name;
    const std::string& type = props[p].type;
    const bool fp = type == "float" || type == "float32" || type == "double" ||
                    type == "float64";
    const bool u8 = type == "uchar" || type == "uint8";
    if (name == "x" || name == "y" || name == "z") {
      if (!fp)
        throw IoError("ply: coordinate '" + name + "' must be float32/float64 in " +
                      path);
      (name == "x" ? ix : name == "y" ? iy : iz) = static_cast<int>(p);
    } else if (name == "red" || name == "green" || name == "blue") {
      if (!u8)
        throw IoError("ply: color '" + name + "' must be uint8 in " + path);
      (name == "red" ? ir : name == "green" ? ig : ib) = static_cast<int>(p);
    }
    // nx/ny/nz and any other scalar property parse fine and are skipped
  }
  if (ix < 0 || iy < 0 || iz < 0)
    throw IoError("ply: missing x/y/z properties in " + path);
  const bool has_colors = ir >= 0 && ig >= 0 && ib >= 0;

  PointCloud cloud;
  cloud.positions.reserve(static_cast<std::size_t>(vertex_count));
  if (has_colors) cloud.colors.reserve(static_cast<std::size_t>(vertex_count));

  if (!binary) {
    for (long long v = 0; v < vertex_count; ++v) {
      if (!std::getline(in, line))
        throw IoError("ply: truncated payload, vertex " + std::to_string(v) +
                      " missing in " + path);
      std::istringstream ss(line);
      std::vector<double> vals(props.size());
      for (std::size_t p = 0; p < props.size(); ++p)
        if (!(ss >> vals[p]))
          throw IoError("ply: malformed vertex line " + std::to_string(v + 1) +
                        " in " + path);
      cloud.positions.emplace_back(vals[ix], vals[iy], vals[iz]);
      if (has_colors)
        cloud.colors.emplace_back(vals[ir] / 255.0, vals[ig] / 255.0,
                                  vals[ib] / 255.0);
    }
  } else {
    int stride = 0;
    for (const PlyProperty& p : props) stride += p.byte_size;
    std::vector<char> row(stride);
    std::vector<int> prop_offset(props.size());
    int acc = 0;
    for (std::size_t p = 0; p < props.size(); ++p) {
      prop_offset[p] = acc;
      acc += props[p].byte_size;
    }
    auto read_scalar = [&](int p) -> double {
      const char* src = row.data() + prop_offset[p];
      const std::string& t = props[p].type;
      if (t == "float" || t == "float32") {
        float f;
        std::memcpy(&f, src, 4);
        return f;
      }
      if (t == "double" || t == "float64") {
        double d;
        std::memcpy(&d, src, 8);
        return d;
      }
      if (t == "uchar" || t == "uint8")
        return static_cast<double>(static_cast<unsigned char>(*src));
      return 0.0;
    };
    for (long long v = 0; v < vertex_count; ++v) {
      in.read(row.data(), stride);
      if (in.gcount() != stride)
        throw IoError("ply: truncated payload at byte " +
                      std::to_string(offset + static_cast<std::size_t>(v) * stride) +
                      " in " + path);
      cloud.positions.emplace_back(read_scalar(ix), read_scalar(iy), read_scalar(iz));
      if (has_colors)
        cloud.colors.emplace_back(read_scalar(ir) / 255.0, read_scalar(ig) / 255.0,
                                  read_scalar(ib) / 255.0);
    }
  }
  return cloud;
}

PointCloud read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open: " + path);
  std::string line;
  if (!std::getline(in, line)) throw IoError("csv: empty file " + path);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  bool has_colors = false;
  if (line == "x,y,z")
    has_colors = false;
  else if (line == "x,y,z,r,g,b")
    has_colors = true;
  else
    throw IoError("csv: line 1 must be 'x,y,z' or 'x,y,z,r,g,b' in " + path);

  PointCloud cloud;
  long long row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::vector<double> vals;
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        vals.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw IoError("csv: bad number '" + cell + "' on line " +
                      std::to_string(row) + " of " + path);
      }
    }
    const std::size_t want = has_colors ? 6 : 3;
    if (vals.size() != want)
      throw IoError("csv: expected " + std::to_string(want) + " values on line " +
                    std::to_string(row) + " of " + path);
    cloud.positions.emplace_back(vals[0], vals[1], vals[2]);
    if (has_colors)
      cloud.colors.emplace_back(vals[3] / 255.0, vals[4] / 255.0, vals[5] / 255.0);
  }
  return cloud;
}

}  // namespace

PointCloud read_point_cloud(const std::string& path) {
  const auto dot = path.find_last_of('.');
  const std::string ext = dot == std::string::npos ? "" : path.substr(dot + 1);
  if (ext == "ply") return read_ply(path);
  if (ext == "csv") return read_csv(path);
  throw IoError("unsupported point cloud extension (want .ply or .csv): " + path);
}

void write_point_cloud(const std::string& path, const PointCloud& cloud,
                       PlyFormat format,
                       const std::vector<std::uint8_t>* new_point_flags) {
  if (new_point_flags && new_point_flags->size() != cloud.size())
    throw IoError("write_point_cloud: flag count mismatch");
  std::ostringstream out;
  const bool binary = format == PlyFormat::BinaryLittleEndian;
  out << "ply\n"
      << (binary ? "format binary_little_endian 1.0\n" : "format ascii 1.0\n")
      << "element vertex " << cloud.size() << "\n"
      << "property double x\nproperty double y\nproperty double z\n";
  if (cloud.has_colors())
    out << "property uchar red\nproperty uchar green\nproperty uchar blue\n";
  if (new_point_flags) out << "property uchar flag_new\n";
  out << "end_header\n";

  auto color_byte = [](double v) {
    return static_cast<unsigned char>(
        std::min(255.0, std::max(0.0, std::llround(v * 255.0) * 1.0)));
  };
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    if (binary) {
      const double xyz[3] = {cloud.positions[i].x(), cloud.positions[i].y(),
                             cloud.positions[i].z()};
      out.write(reinterpret_cast<const char*>(xyz), sizeof(xyz));
      if (cloud.has_colors()) {
        const unsigned char rgb[3] = {color_byte(cloud.colors[i].x()),
                                      color_byte(cloud.colors[i].y()),
                                      color_byte(cloud.colors[i].z())};
        out.write(reinterpret_cast<const char*>(rgb), 3);
      }
      if (new_point_flags) {
        const char f = static_cast<char>((*new_point_flags)[i]);
        out.write(&f, 1);
      }
    } else {
      char buf[128];
      std::snprintf(buf, sizeof(buf), "%.17g %.17g %.17g", cloud.positions[i].x(),
                    cloud.positions[i].y(), cloud.positions[i].z());
      out << buf;
      if (cloud.has_colors())
        out << ' ' << static_cast<int>(color_byte(cloud.colors[i].x())) << ' '
            << static_cast<int>(color_byte(cloud.colors[i].y())) << ' '
            << static_cast<int>(color_byte(cloud.colors[i].z()));
      if (new_point_flags) out << ' ' << static_cast<int>((*new_point_flags)[i]);
      out << '\n';
    }
  }
  atomic_write(path, out.str());
}

void write_point_cloud_csv(const std::string& path, const PointCloud& cloud) {
  std::ostringstream out;
  out << (cloud.has_colors() ? "x,y,z,r,g,b\n" : "x,y,z\n");
  char buf[160];
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g", cloud.positions[i].x(),
                  cloud.positions[i].y(), cloud.positions[i].z());
    out << buf;
    if (cloud.has_colors()) {
      out << ',' << std::llround(cloud.colors[i].x() * 255.0) << ','
          << std::llround(cloud.colors[i].y() * 255.0) << ','
          << std::llround(cloud.colors[i].z() * 255.0);
    }
    out << '\n';
  }
  atomic_write(path, out.str());
}

double round9(double v) {
  if (!std::isfinite(v)) return v;
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return std::strtod(buf, nullptr);
}

Aggregates compute_aggregates(const PointCloud& cloud, const EstimationResult& result) {
  Aggregates agg;
  agg.n_points = static_cast<int>(result.size());
  for (const PointDiagnostics& d : result.diagnostics)
    if (d.flagged) ++agg.n_flagged;
  agg.has_ground_truth = cloud.has_ground_truth();

  // boundary exclusion margin: 2 * mean k-th neighbor distance, recovered
  // from the resolved bandwidth (t = mean^2)
  const double margin = result.bandwidth_t > 0.0
                            ? 2.0 * std::sqrt(result.bandwidth_t)
                            : (result.eps > 0.0 ? result.eps : 0.0);

  std::vector<double> normal_err, curv_err, tau1_err, tau2_err, dir_err, macs, means;
  for (std::size_t i = 0; i < result.size(); ++i) {
    if (result.diagnostics[i].flagged) continue;
    const bool interior = cloud.boundary_distance.empty() ||
                          cloud.boundary_distance[i] >= margin;
    if (!interior) continue;
    ++agg.n_interior;
    macs.push_back(result.curvatures[i].mac);
    means.push_back(0.5 * (result.curvatures[i].tau1 + result.curvatures[i].tau2));
    if (!agg.has_ground_truth) continue;
    normal_err.push_back(angle_between_lines_deg(result.frames[i].normal,
                                                 cloud.truth_frames[i].normal));
    const double gt1 = std::abs(cloud.truth_curvatures[i][0]);
    const double gt2 = std::abs(cloud.truth_curvatures[i][1]);
    const double e1 = std::abs(std::abs(result.curvatures[i].tau1) - gt1);
    const double e2 = std::abs(std::abs(result.curvatures[i].tau2) - gt2);
    tau1_err.push_back(e1);
    tau2_err.push_back(e2);
    curv_err.push_back(e1);
    curv_err.push_back(e2);
    if (gt1 - gt2 > 1e-6 && !cloud.truth_directions.empty())
      dir_err.push_back(angle_between_lines_deg(result.curvatures[i].dir1,
                                                cloud.truth_directions[i]));
  }
  agg.median_mac = median(macs);
  agg.median_mean_curvature = median(means);
  if (agg.has_ground_truth) {
    const auto ns = percentile_prep(normal_err);
    const auto cs = percentile_prep(curv_err);
    agg.median_normal_error_deg = percentile(ns, 0.5);
    agg.p90_normal_error_deg = percentile(ns, 0.9);
    agg.median_abs_curvature_error = percentile(cs, 0.5);
    agg.p90_abs_curvature_error = percentile(cs, 0.9);
    agg.median_tau1_abs_error = median(tau1_err);
    agg.median_tau2_abs_error = median(tau2_err);
    agg.median_dir1_error_deg = median(dir_err);
  }
  return agg;
}

namespace {

json vec3_json(const Vec3& v) {
  return json::array({round9(v.x()), round9(v.y()), round9(v.z())});
}

json config_json(const RunReport& r) {
  json c;
  c["input"] = r.config.input_path;
  c["output"] = r.config.output_path;
  c["method"] = r.config.method;
  if (!r.config.surface_spec.empty()) {
    c["surface"] = r.config.surface_spec;
    c["n"] = r.config.n;
    c["noise_sigma"] = round9(r.config.noise_sigma);
    c["seed"] = r.config.seed;
  }
  c["k_neighbors"] = r.config.estimator.k_neighbors;
  c["bandwidth_t"] = round9(r.resolved_bandwidth_t);
  c["varifold_eps"] = round9(r.resolved_eps);
  c["xi_min"] = round9(r.config.estimator.xi_min);
  c["xi_max"] = round9(r.resolved_xi_max);
  c["adaptive_kernel"] = r.config.estimator.adaptive_kernel;
  c["threads"] = r.config.estimator.threads;
  return c;
}

json aggregates_json(const Aggregates& a) {
  json out;
  out["n_points"] = a.n_points;
  out["n_flagged"] = a.n_flagged;
  out["n_interior"] = a.n_interior;
  if (a.has_curvatures) {
    out["median_mac"] = round9(a.median_mac);
    out["median_mean_curvature"] = round9(a.median_mean_curvature);
  }
  if (a.has_ground_truth) {
    out["median_normal_error_deg"] = round9(a.median_normal_error_deg);
    out["p90_normal_error_deg"] = round9(a.p90_normal_error_deg);
    if (a.has_curvatures) {
      out["median_abs_curvature_error"] = round9(a.median_abs_curvature_error);
      out["p90_abs_curvature_error"] = round9(a.p90_abs_curvature_error);
      out["median_tau1_abs_error"] = round9(a.median_tau1_abs_error);
      out["median_tau2_abs_error"] = round9(a.median_tau2_abs_error);
      out["median_dir1_error_deg"] = round9(a.median_dir1_error_deg);
    }
  }
  return out;
}

}  // namespace

std::string report_to_json_string(const RunReport& report) {
  json root;
  root["schema_version"] = 1;
  root["config"] = config_json(report);
  json pts = json::array();
  if (report.result) {
    for (std::size_t i = 0; i < report.result->size(); ++i) {
      const auto& f = report.result->frames[i];
      const auto& c = report.result->curvatures[i];
      const auto& d = report.result->diagnostics[i];
      json p;
      p["i"] = i;
      p["normal"] = vec3_json(f.normal);
      p["u1"] = vec3_json(f.u1);
      p["u2"] = vec3_json(f.u2);
      p["tau1"] = round9(c.tau1);
      p["tau2"] = round9(c.tau2);
      p["dir1"] = vec3_json(c.dir1);
      p["dir2"] = vec3_json(c.dir2);
      p["mac"] = round9(c.mac);
      p["dimension"] = d.estimated_dimension;
      p["eig_gap"] = round9(d.eigenvalues[1] - d.eigenvalues[2]);
      p["flagged"] = d.flagged;
      if (d.flagged) p["flag_reason"] = d.flag_reason;
      pts.push_back(std::move(p));
    }
  }
  root["points"] = std::move(pts);
  root["aggregates"] = aggregates_json(report.aggregates);
  json t;
  t["seconds_index"] = report.seconds_index;
  t["seconds_pass1"] = report.seconds_pass1;
  t["seconds_pass2"] = report.seconds_pass2;
  root["timings"] = std::move(t);
  return root.dump(2) + "\n";
}

std::string report_to_csv_string(const RunReport& report) {
  std::ostringstream out;
  out << "i,nx,ny,nz,u1x,u1y,u1z,u2x,u2y,u2z,tau1,tau2,"
         "dir1x,dir1y,dir1z,dir2x,dir2y,dir2z,mac,dimension,flagged\n";
  if (!report.result) return out.str();
  char buf[64];
  auto num = [&](double v) {
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    out << buf;
  };
  for (std::size_t i = 0; i < report.result->size(); ++i) {
    const auto& f = report.result->frames[i];
    const auto& c = report.result->curvatures[i];
    const auto& d = report.result->diagnostics[i];
    out << i;
    const double vals[] = {f.normal.x(), f.normal.y(), f.normal.z(),
                           f.u1.x(),     f.u1.y(),     f.u1.z(),
                           f.u2.x(),     f.u2.y(),     f.u2.z(),
                           c.tau1,       c.tau2,
                           c.dir1.x(),   c.dir1.y(),   c.dir1.z(),
                           c.dir2.x(),   c.dir2.y(),   c.dir2.z(),
                           c.mac};
    for (double v : vals) {
      out << ',';
      num(v);
    }
    out << ',' << d.estimated_dimension << ',' << (d.flagged ? 1 : 0) << '\n';
  }
  return out.str();
}

void write_report(const RunReport& report, const std::string& format,
                  const std::string& path) {
  if (format == "json")
    atomic_write(path, report_to_json_string(report));
  else if (format == "csv")
    atomic_write(path, report_to_csv_string(report));
  else
    throw IoError("unknown report format: " + format);
}

}  // namespace splatgeo
