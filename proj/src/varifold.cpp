#include "splatgeo/varifold.hpp"

#include <Eigen/Dense>

#include <chrono>
#include <cmath>
#include <stdexcept>

#include "splatgeo/parallel.hpp"

namespace splatgeo {

namespace {

constexpr double kUpsilonScale = 1.5;

using Basis32 = Eigen::Matrix<double, 3, 2>;

Basis32 tangent_basis(const LocalFrame& f) {
  Basis32 b;
  b.col(0) = f.u1;
  b.col(1) = f.u2;
  return b;
}

}  // namespace

std::vector<std::string> validate(const WsffMatrix& w) {
  std::vector<std::string> v;
  if ((w.b - w.b.transpose()).cwiseAbs().maxCoeff() > 1e-8)
    v.push_back("matrix not symmetric");
  if (!w.b.allFinite()) v.push_back("non-finite entries");
  return v;
}

double kernel_chi(double r, double eps) {
  const double u = r / eps;
  if (u >= 1.0) return 0.0;
  return std::exp(-1.0 / (1.0 - u * u));
}

double kernel_upsilon(double r, double eps) {
  return kUpsilonScale * kernel_chi(r, eps);
}

double kernel_upsilon_prime(double r, double eps) {
  const double u = r / eps;
  if (u <= 0.0 || u >= 1.0) return 0.0;
  const double den = 1.0 - u * u;
  return kUpsilonScale * std::exp(-1.0 / den) * (-2.0 * u / (den * den)) / eps;
}

Mat2 wsff_pair_term(const Vec3& mu_i, const Vec3& mu_j, const LocalFrame& frame_i,
                    const LocalFrame& frame_j) {
  const Vec3 d = mu_i - mu_j;
  const Vec3& n = frame_i.normal;
  const Mat3 proj_j = Mat3::Identity() - frame_j.normal * frame_j.normal.transpose();
  const Basis32 basis = tangent_basis(frame_i);

  const Basis32 pb = proj_j * basis;
  const Mat3 sym = 0.5 * (n * d.transpose() + d * n.transpose());
  const Mat2 first = 2.0 * pb.transpose() * sym * pb;
  const double scalar = d.dot(proj_j * n);
  const Mat2 second = scalar * (basis.transpose() * proj_j * basis - Mat2::Identity());
  return first - second;
}

Mat2 wsff_pair_term_tensor(const Vec3& mu_i, const Vec3& mu_j,
                           const LocalFrame& frame_i, const LocalFrame& frame_j) {
  const Vec3 d = mu_i - mu_j;
  const Vec3& n = frame_i.normal;
  const Mat3 proj_i = Mat3::Identity() - frame_i.normal * frame_i.normal.transpose();
  const Mat3 proj_j = Mat3::Identity() - frame_j.normal * frame_j.normal.transpose();

  // t[d1][d2] = [(Pj - Pi) n]_{d2} [Pj d]_{d1} + [(Pj - Pi) n]_{d1} [Pj d]_{d2}
  //             - (Pj - Pi)_{d1,d2} <Pj d, n>
  const Vec3 pd = proj_j * d;
  const Vec3 pn = (proj_j - proj_i) * n;
  Mat3 t = pd * pn.transpose() + pn * pd.transpose() - pd.dot(n) * (proj_j - proj_i);

  const Basis32 basis = tangent_basis(frame_i);
  return basis.transpose() * t * basis;
}

WsffMatrix wsff_matrix(const std::vector<Vec3>& positions, int i,
                       const NeighborList& neighbors,
                       const std::vector<LocalFrame>& frames,
                       const std::vector<double>& masses, double eps) {
  if (!(eps > 0.0)) throw std::invalid_argument("wsff_matrix: eps <= 0");
  WsffMatrix out;
  double normalizer = 0.0;
  Mat2 acc = Mat2::Zero();
  for (std::size_t j = 0; j < neighbors.size(); ++j) {
    const int nj = neighbors.indices[j];
    const double r = neighbors.distances[j];
    const double mass = masses.empty() ? 1.0 : masses[nj];
    const double chi = kernel_chi(r, eps);
    if (chi == 0.0) continue;  // outside the support, exactly zero
    normalizer += mass * chi;
    const double ups = kernel_upsilon_prime(r, eps);
    if (ups == 0.0 || !(r > 0.0)) continue;  // the r -> 0 limit of the term is 0
    acc += (mass * ups / (3.0 * r)) *
           wsff_pair_term(positions[i], positions[nj], frames[i], frames[nj]);
  }
  if (!(normalizer > 0.0)) {
    out.flagged = true;
    return out;
  }
  const Mat2 b = acc / normalizer;
  out.b = 0.5 * (b + b.transpose());
  return out;
}

CurvatureInfo curvatures_from_wsff(const WsffMatrix& w, const LocalFrame& frame) {
  Eigen::SelfAdjointEigenSolver<Mat2> es(w.b);
  const Vec3 dir_a =
      es.eigenvectors()(0, 0) * frame.u1 + es.eigenvectors()(1, 0) * frame.u2;
  const Vec3 dir_b =
      es.eigenvectors()(0, 1) * frame.u1 + es.eigenvectors()(1, 1) * frame.u2;
  return make_curvature_info(es.eigenvalues()[0], es.eigenvalues()[1], dir_a, dir_b);
}

double resolve_eps(const KdTree& tree, int k, double requested) {
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
    throw std::runtime_error("resolve_eps: degenerate point set");
  return 2.0 * acc / count;
}

EstimationResult estimate_all_varifold(const PointCloud& cloud,
                                       const std::vector<LocalFrame>& frames,
                                       const EstimatorConfig& cfg) {
  if (cloud.size() == 0)
    throw std::invalid_argument("estimate_all_varifold: empty cloud");
  if (frames.size() != cloud.size())
    throw std::invalid_argument("estimate_all_varifold: frames missing");
  if (!cfg.masses.empty() && cfg.masses.size() != cloud.size())
    throw std::invalid_argument("estimate_all_varifold: mass count mismatch");

  const auto n = static_cast<std::int64_t>(cloud.size());
  EstimationResult out;
  out.frames = frames;
  out.curvatures.resize(n);
  out.diagnostics.resize(n);

  const auto t0 = std::chrono::steady_clock::now();
  const KdTree tree(cloud.positions);
  out.seconds_index =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  const double eps = resolve_eps(tree, cfg.k_neighbors, cfg.varifold_eps);
  out.eps = eps;

  const auto t1 = std::chrono::steady_clock::now();
  parallel_for(n, cfg.threads, [&](std::int64_t i64) {
    const int i = static_cast<int>(i64);
    try {
      const NeighborList nb = tree.radius(i, eps);
      const WsffMatrix w =
          wsff_matrix(cloud.positions, i, nb, frames, cfg.masses, eps);
      if (w.flagged) {
        out.diagnostics[i].flagged = true;
        out.diagnostics[i].flag_reason = "empty kernel support";
        out.curvatures[i] = CurvatureInfo{};
        return;
      }
      out.curvatures[i] = curvatures_from_wsff(w, frames[i]);
    } catch (const std::exception& e) {
      out.diagnostics[i].flagged = true;
      out.diagnostics[i].flag_reason = e.what();
      out.curvatures[i] = CurvatureInfo{};
    }
  });
  out.seconds_pass2 =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t1).count();
  return out;
}

}  // namespace splatgeo
