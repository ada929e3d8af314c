#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "splatgeo/kdtree.hpp"

using namespace splatgeo;

TEST_CASE("single point cloud yields empty neighbor lists") {
  const KdTree tree({Vec3(1.0, 2.0, 3.0)});
  const NeighborList nb = tree.knn(0, 5);
  CHECK(nb.size() == 0);
}

TEST_CASE("empty cloud is rejected") {
  CHECK_THROWS_AS(KdTree(std::vector<Vec3>{}), std::invalid_argument);
}

TEST_CASE("collinear points") {
  const KdTree tree({Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(3, 0, 0)});
  const NeighborList nb = tree.knn(1, 2);
  REQUIRE(nb.size() == 2);
  CHECK(nb.indices[0] == 0);
  CHECK(nb.indices[1] == 2);
  CHECK(nb.distances[0] == doctest::Approx(1.0));
  CHECK(nb.distances[1] == doctest::Approx(2.0));
  CHECK(validate(nb).empty());
}

TEST_CASE("grid center returns the four axis-adjacent points") {
  std::vector<Vec3> pts;
  for (int x = -1; x <= 1; ++x)
    for (int y = -1; y <= 1; ++y) pts.emplace_back(x, y, 0.0);
  const KdTree tree(pts);
  int center = -1;
  for (std::size_t i = 0; i < pts.size(); ++i)
    if (pts[i] == Vec3::Zero()) center = static_cast<int>(i);
  const NeighborList nb = tree.knn(center, 4);
  REQUIRE(nb.size() == 4);
  for (double d : nb.distances) CHECK(d == doctest::Approx(1.0));
}

TEST_CASE("k beyond cloud size returns everything else") {
  const KdTree tree({Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 2, 0)});
  const NeighborList nb = tree.knn(0, 99);
  CHECK(nb.size() == 2);
}

TEST_CASE("invalid ids and k are rejected") {
  const KdTree tree({Vec3(0, 0, 0), Vec3(1, 0, 0)});
  CHECK_THROWS_AS(tree.knn(5, 1), std::out_of_range);
  CHECK_THROWS_AS(tree.knn(-1, 1), std::out_of_range);
  CHECK_THROWS_AS(tree.knn(0, 0), std::invalid_argument);
}

TEST_CASE("matches the linear-scan oracle on 10k random points") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  std::vector<Vec3> pts(10000);
  for (Vec3& p : pts) p = Vec3(uni(rng), uni(rng), uni(rng));
  const KdTree tree(pts);
  std::uniform_int_distribution<int> pick(0, static_cast<int>(pts.size()) - 1);
  for (int trial = 0; trial < 200; ++trial) {
    const int q = pick(rng);
    const int k = 1 + trial % 32;
    const NeighborList got = tree.knn(q, k);
    const NeighborList want = brute_force_knn(pts, pts[q], k, q);
    REQUIRE(got.size() == want.size());
    for (std::size_t j = 0; j < got.size(); ++j) {
      CHECK(got.indices[j] == want.indices[j]);
      CHECK(got.distances[j] == doctest::Approx(want.distances[j]).epsilon(1e-12));
    }
  }
}

TEST_CASE("distance ties break by ascending index") {
  // 8 symmetric points at the same distance from the origin plus the query
  std::vector<Vec3> pts;
  pts.emplace_back(0, 0, 0);
  for (int sx : {-1, 1})
    for (int sy : {-1, 1})
      for (int sz : {-1, 1}) pts.emplace_back(sx, sy, sz);
  const KdTree tree(pts);
  const NeighborList nb = tree.knn(0, 3);
  REQUIRE(nb.size() == 3);
  CHECK(nb.indices[0] == 1);
  CHECK(nb.indices[1] == 2);
  CHECK(nb.indices[2] == 3);
}

TEST_CASE("repeated queries are identical") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  std::vector<Vec3> pts(500);
  for (Vec3& p : pts) p = Vec3(uni(rng), uni(rng), uni(rng));
  const KdTree tree(pts);
  const NeighborList a = tree.knn(17, 12);
  const NeighborList b = tree.knn(17, 12);
  CHECK(a.indices == b.indices);
  CHECK(a.distances == b.distances);
}

TEST_CASE("radius query equals distance-filtered scan") {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  std::vector<Vec3> pts(2000);
  for (Vec3& p : pts) p = Vec3(uni(rng), uni(rng), uni(rng));
  const KdTree tree(pts);
  for (int q : {0, 100, 1999}) {
    const double r = 0.25;
    const NeighborList got = tree.radius(q, r);
    const NeighborList all =
        brute_force_knn(pts, pts[q], static_cast<int>(pts.size()), q);
    std::size_t want = 0;
    while (want < all.size() && all.distances[want] <= r) ++want;
    REQUIRE(got.size() == want);
    for (std::size_t j = 0; j < want; ++j) CHECK(got.indices[j] == all.indices[j]);
  }
}
