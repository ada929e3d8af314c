#include "splatgeo/laplacian.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>

namespace splatgeo {

std::vector<std::string> validate(const KernelWeights& w) {
  std::vector<std::string> v;
  if (w.neighbor_ids.size() != w.weights.size()) v.push_back("length mismatch");
  double sum = 0.0;
  for (double x : w.weights) {
    if (!std::isfinite(x)) {
      v.push_back("non-finite weight");
      return v;
    }
    if (x < 0.0) v.push_back("negative weight");
    sum += x;
  }
  if (!w.weights.empty() && std::abs(sum - 1.0) > 1e-9)
    v.push_back("weights do not sum to 1");
  return v;
}

KernelWeights gaussian_kernel_weights(const std::vector<Vec3>& positions, int i,
                                      const NeighborList& neighbors, double t) {
  if (!(t > 0.0)) throw std::invalid_argument("gaussian_kernel_weights: t <= 0");
  KernelWeights out;
  out.center_id = i;
  out.neighbor_ids = neighbors.indices;
  out.bandwidth = t;
  out.weights.resize(neighbors.size());
  double sum = 0.0;
  for (std::size_t j = 0; j < neighbors.size(); ++j) {
    const double d2 = (positions[neighbors.indices[j]] - positions[i]).squaredNorm();
    out.weights[j] = std::exp(-d2 / t);
    sum += out.weights[j];
  }
  bool coincident = true;
  for (std::size_t j = 0; j < neighbors.size(); ++j)
    if (neighbors.distances[j] > 0.0) {
      coincident = false;
      break;
    }
  if (!neighbors.indices.empty() && coincident)
    throw std::runtime_error(
        "gaussian_kernel_weights: all neighbors coincide with the center "
        "(duplicate points)");
  if (sum <= 0.0)
    throw std::runtime_error("gaussian_kernel_weights: zero weight mass");
  for (double& w : out.weights) w /= sum;
  return out;
}

KernelWeights adaptive_kernel_weights(const std::vector<Vec3>& positions, int i,
                                      const NeighborList& neighbors, double t,
                                      const std::vector<Mat3>& covariances,
                                      double xi_min) {
  if (!(t > 0.0)) throw std::invalid_argument("adaptive_kernel_weights: t <= 0");
  if (covariances.size() != positions.size())
    throw std::invalid_argument("adaptive_kernel_weights: covariances missing");
  KernelWeights out;
  out.center_id = i;
  out.neighbor_ids = neighbors.indices;
  out.bandwidth = t;
  out.weights.resize(neighbors.size());
  double sum = 0.0;
  for (std::size_t j = 0; j < neighbors.size(); ++j) {
    const int nj = neighbors.indices[j];
    const Mat3 prod = covariances[i] * covariances[nj];
    const Mat3 lambda =
        t * 0.5 * (prod + prod.transpose()) + xi_min * Mat3::Identity();
    Eigen::LDLT<Mat3> ldlt(lambda);
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive())
      throw std::runtime_error(
          "adaptive_kernel_weights: bandwidth matrix not positive definite");
    const Vec3 d = positions[i] - positions[nj];
    out.weights[j] = std::exp(-d.dot(ldlt.solve(d)));
    sum += out.weights[j];
  }
  if (!neighbors.indices.empty() && sum <= 0.0)
    throw std::runtime_error("adaptive_kernel_weights: zero weight mass");
  for (double& w : out.weights) w /= sum;
  return out;
}

double apply_laplacian(const LocalFunction& f, const KernelWeights& w) {
  double acc = 0.0;
  for (std::size_t j = 0; j < w.weights.size(); ++j)
    acc += w.weights[j] * (f.values_at_neighbors[j] - f.value_at_center);
  return acc / w.bandwidth;
}

double leibniz_defect(const LocalFunction& f, const LocalFunction& h,
                      const KernelWeights& w) {
  double acc = 0.0;
  for (std::size_t j = 0; j < w.weights.size(); ++j)
    acc += w.weights[j] * (f.values_at_neighbors[j] - f.value_at_center) *
           (h.values_at_neighbors[j] - h.value_at_center);
  return acc / w.bandwidth;
}

double leibniz_defect_via_laplacians(const LocalFunction& f, const LocalFunction& h,
                                     const KernelWeights& w) {
  LocalFunction fh;
  fh.value_at_center = f.value_at_center * h.value_at_center;
  fh.values_at_neighbors.resize(f.values_at_neighbors.size());
  for (std::size_t j = 0; j < fh.values_at_neighbors.size(); ++j)
    fh.values_at_neighbors[j] = f.values_at_neighbors[j] * h.values_at_neighbors[j];
  return apply_laplacian(fh, w) - f.value_at_center * apply_laplacian(h, w) -
         h.value_at_center * apply_laplacian(f, w);
}

LocalFunction coordinate_function(const std::vector<Vec3>& positions,
                                  const Vec3& origin, const KernelWeights& w, int d) {
  LocalFunction f;
  f.value_at_center = positions[w.center_id][d] - origin[d];
  f.values_at_neighbors.resize(w.size());
  for (std::size_t j = 0; j < w.size(); ++j)
    f.values_at_neighbors[j] = positions[w.neighbor_ids[j]][d] - origin[d];
  return f;
}

LocalFunction height_function(const std::vector<Vec3>& positions, const Vec3& origin,
                              const Vec3& normal, const KernelWeights& w) {
  LocalFunction f;
  f.value_at_center = normal.dot(positions[w.center_id] - origin);
  f.values_at_neighbors.resize(w.size());
  for (std::size_t j = 0; j < w.size(); ++j)
    f.values_at_neighbors[j] = normal.dot(positions[w.neighbor_ids[j]] - origin);
  return f;
}

}  // namespace splatgeo
