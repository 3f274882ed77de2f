#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "skelgraph/grid.hpp"
#include "skelgraph/rng.hpp"
#include "skelgraph/synth.hpp"

using namespace skelgraph;

namespace {

double min_vertex_distance(const TriangleMesh& a, const TriangleMesh& b) {
  double best = std::numeric_limits<double>::infinity();
  for (Eigen::Index v = 0; v < a.positions.rows(); ++v)
    for (Eigen::Index t = 0; t < b.triangles.rows(); ++t)
      best = std::min(best, point_triangle_distance(a.positions.row(v),
                                                    b.positions.row(b.triangles(t, 0)),
                                                    b.positions.row(b.triangles(t, 1)),
                                                    b.positions.row(b.triangles(t, 2))));
  return best;
}

TriangleMesh unit_cube(const Eigen::Vector3d& origin) {
  TriangleMesh m;
  m.positions.resize(8, 3);
  m.positions << 0, 0, 0, 1, 0, 0, 1, 1, 0, 0, 1, 0, 0, 0, 1, 1, 0, 1, 1, 1, 1, 0, 1, 1;
  m.positions.rowwise() += origin.transpose();
  m.triangles.resize(12, 3);
  m.triangles << 0, 1, 2, 0, 2, 3,  // z = 0
      4, 5, 6, 4, 6, 7,             // z = 1
      0, 1, 5, 0, 5, 4,             // y = 0
      3, 2, 6, 3, 6, 7,             // y = 1
      0, 3, 7, 0, 7, 4,             // x = 0
      1, 2, 6, 1, 6, 5;             // x = 1
  return m;
}

}  // namespace

TEST_CASE("score formula endpoints and rounding") {
  CHECK(grid_score(0.0, 0.0) == 10);
  CHECK(grid_score(3.0, 0.4) == 1);
  CHECK(grid_score(1.5, 0.0) == 8);   // 10 - 2
  CHECK(grid_score(0.0, 0.4) == 5);   // 10 - 5: negative class boundary
  CHECK(grid_score(3.0, 0.0) == 6);   // 10 - 4
  CHECK(grid_score(100.0, 1.0) == 1); // clamped from below
}

TEST_CASE("grid images are deterministic and bounded") {
  GridParams params;
  params.size = 96;
  params.jitter_sigma = 1.0;
  params.rupture_prob = 0.2;
  params.blob_count = 2;
  params.seed = 99;

  const GridSample a = gen_grid_image(params);
  const GridSample b = gen_grid_image(params);
  CHECK(a.image.dims == Eigen::Vector3i(96, 96, 1));
  CHECK((a.image.values == b.image.values).all());
  CHECK(a.image.values.minCoeff() >= 0.0f);
  CHECK(a.image.values.maxCoeff() <= 1.0f);
  CHECK(a.score == grid_score(1.0, 0.2));

  params.seed = 100;
  const GridSample c = gen_grid_image(params);
  CHECK((a.image.values != c.image.values).any());

  // Lines should occupy a visible share without flooding the image.
  const double fg =
      static_cast<double>((a.image.values > 0.5f).count()) / a.image.size();
  CHECK(fg > 0.05);
  CHECK(fg < 0.95);
}

TEST_CASE("grid volumes stack independent slices under one label") {
  GridParams params;
  params.size = 64;
  params.seed = 5;
  const GridSample v = gen_grid_volume(params, 3);
  CHECK(v.image.dims == Eigen::Vector3i(64, 64, 3));
  // Slices differ from each other but derive from the same parameters.
  bool any_diff = false;
  for (int y = 0; y < 64 && !any_diff; ++y)
    for (int x = 0; x < 64 && !any_diff; ++x)
      if (v.image.at(x, y, 0) != v.image.at(x, y, 1)) any_diff = true;
  CHECK(any_diff);
  CHECK(v.score == 10);
  CHECK(v.label == 1);
}

TEST_CASE("dataset is exactly class balanced") {
  SUBCASE("even count") {
    const std::vector<GridSample> set = gen_grid_dataset(200, 1, 1);
    REQUIRE(set.size() == 200u);
    int positives = 0;
    for (const GridSample& s : set) positives += s.label;
    CHECK(positives == 100);
    for (const GridSample& s : set) CHECK(s.label == (s.score > 5 ? 1 : 0));
  }
  SUBCASE("odd count favors the positive class") {
    const std::vector<GridSample> set = gen_grid_dataset(7, 2, 1);
    int positives = 0;
    for (const GridSample& s : set) positives += s.label;
    CHECK(positives == 4);
  }
  SUBCASE("same seed reproduces the same dataset") {
    const auto a = gen_grid_dataset(6, 3, 1);
    const auto b = gen_grid_dataset(6, 3, 1);
    for (size_t i = 0; i < a.size(); ++i) {
      CHECK(a[i].score == b[i].score);
      CHECK((a[i].image.values == b[i].image.values).all());
    }
  }
}

TEST_CASE("point to triangle distance") {
  const Eigen::Vector3d a(0, 0, 0), b(1, 0, 0), c(0, 1, 0);
  SUBCASE("known diagonal value") {
    const double d = point_triangle_distance({2, 2, 0}, a, b, c);
    CHECK(d == doctest::Approx(1.5 * std::sqrt(2.0)).epsilon(1e-12));
  }
  SUBCASE("interior projects onto the plane") {
    CHECK(point_triangle_distance({0.25, 0.25, 2.0}, a, b, c) == doctest::Approx(2.0));
  }
  SUBCASE("vertex region") {
    CHECK(point_triangle_distance({-3, -4, 0}, a, b, c) == doctest::Approx(5.0));
  }
  SUBCASE("edge region") {
    CHECK(point_triangle_distance({0.5, -2, 0}, a, b, c) == doctest::Approx(2.0));
  }
  SUBCASE("dense sampling oracle") {
    // Compare against a fine barycentric sampling of the triangle surface.
    Rng rng(31);
    for (int trial = 0; trial < 20; ++trial) {
      const Eigen::Vector3d p(rng.uniform01() * 4 - 2, rng.uniform01() * 4 - 2,
                              rng.uniform01() * 4 - 2);
      double sampled = std::numeric_limits<double>::infinity();
      const int steps = 200;
      for (int i = 0; i <= steps; ++i)
        for (int j = 0; j <= steps - i; ++j) {
          const double u = static_cast<double>(i) / steps;
          const double v = static_cast<double>(j) / steps;
          const Eigen::Vector3d q = a + u * (b - a) + v * (c - a);
          sampled = std::min(sampled, (p - q).norm());
        }
      const double exact = point_triangle_distance(p, a, b, c);
      CHECK(exact <= sampled + 1e-12);
      CHECK(exact == doctest::Approx(sampled).epsilon(1e-2));
    }
  }
}

TEST_CASE("degenerate boss gives two plain boxes") {
  PartPairParams params;
  params.boss_dims = {0.0, 0.0, 0.0};
  params.tessellation = 1;
  const PartPair pair = gen_part_pair(params);
  CHECK(pair.part_a.triangles.rows() == 12);
  CHECK(pair.part_b.triangles.rows() == 12);
  CHECK(pair.part_a.positions.rows() == 8);
}

TEST_CASE("part pair geometry") {
  PartPairParams params;
  params.tessellation = 2;
  params.motion_seed = 4;

  SUBCASE("face counts match the fourteen-rectangle construction") {
    const PartPair pair = gen_part_pair(params);
    CHECK(pair.part_a.triangles.rows() == 14 * 2 * 2 * 2);
    CHECK(pair.part_b.triangles.rows() == 14 * 2 * 2 * 2);
  }
  SUBCASE("touching parts meet at distance zero") {
    params.gap = 0.0;
    const PartPair pair = gen_part_pair(params);
    CHECK(min_vertex_distance(pair.part_a, pair.part_b) == doctest::Approx(0.0).epsilon(1e-9));
  }
  SUBCASE("separated parts keep the gap") {
    params.gap = 0.25;
    const PartPair pair = gen_part_pair(params);
    const double d = min_vertex_distance(pair.part_a, pair.part_b);
    CHECK(d == doctest::Approx(0.25).epsilon(1e-6));
  }
  SUBCASE("oversized gap is rejected") {
    params.gap = 2.0;  // pocket would breach the plate sides
    CHECK_THROWS(gen_part_pair(params));
  }
  SUBCASE("boss wider than the plate is rejected") {
    params.boss_dims = {5.0, 2.0, 1.0};
    CHECK_THROWS(gen_part_pair(params));
  }
}

TEST_CASE("contact oracle on abutting cubes") {
  const TriangleMesh a = unit_cube({0, 0, 0});
  const TriangleMesh b = unit_cube({1.0, 0.0, 0.0});

  SUBCASE("shared-face vertices are the contacts") {
    const ContactLabels labels = contact_oracle(a, b, 1e-9);
    int count_a = 0;
    for (Eigen::Index v = 0; v < a.positions.rows(); ++v) {
      const bool touching = a.positions(v, 0) == 1.0;
      CHECK(labels.a[static_cast<size_t>(v)] == (touching ? 1 : 0));
      count_a += labels.a[static_cast<size_t>(v)];
    }
    CHECK(count_a == 4);
  }
  SUBCASE("separation clears every contact") {
    const TriangleMesh far = unit_cube({5, 0, 0});
    const ContactLabels labels = contact_oracle(a, far, 0.1);
    CHECK(std::count(labels.a.begin(), labels.a.end(), 1) == 0);
    CHECK(std::count(labels.b.begin(), labels.b.end(), 1) == 0);
  }
  SUBCASE("eps loosens the contact band") {
    const TriangleMesh near = unit_cube({1.05, 0.0, 0.0});
    const ContactLabels tight = contact_oracle(a, near, 1e-3);
    const ContactLabels loose = contact_oracle(a, near, 0.1);
    CHECK(std::count(tight.a.begin(), tight.a.end(), 1) == 0);
    CHECK(std::count(loose.a.begin(), loose.a.end(), 1) == 4);
  }
}

TEST_CASE("rigid motion properties") {
  SUBCASE("rotations are orthonormal with determinant one") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      Eigen::Matrix3d rot;
      Eigen::Vector3d trans;
      random_rigid_motion(seed, rot, trans);
      CHECK((rot * rot.transpose() - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() < 1e-12);
      CHECK(rot.determinant() == doctest::Approx(1.0).epsilon(1e-12));
      CHECK(trans.cwiseAbs().maxCoeff() <= 5.0);
    }
  }
  SUBCASE("contact labels are invariant to the pose") {
    PartPairParams params;
    params.tessellation = 2;
    params.gap = 0.1;
    params.motion_seed = 1;
    const PartPair p1 = gen_part_pair(params);
    params.motion_seed = 2;
    const PartPair p2 = gen_part_pair(params);
    CHECK(p1.eps == p2.eps);

    const ContactLabels l1 = contact_oracle(p1.part_a, p1.part_b, p1.eps);
    const ContactLabels l2 = contact_oracle(p2.part_a, p2.part_b, p2.eps);
    REQUIRE(l1.a.size() == l2.a.size());
    CHECK(l1.a == l2.a);
    CHECK(l1.b == l2.b);
    CHECK(std::count(l1.a.begin(), l1.a.end(), 1) > 0);
  }
  SUBCASE("intrinsic lengths survive the motion") {
    PartPairParams params;
    params.tessellation = 2;
    params.motion_seed = 3;
    const PartPair p1 = gen_part_pair(params);
    params.motion_seed = 8;
    const PartPair p2 = gen_part_pair(params);
    REQUIRE(p1.part_a.triangles.rows() == p2.part_a.triangles.rows());
    for (Eigen::Index t = 0; t < p1.part_a.triangles.rows(); ++t)
      for (int side = 0; side < 3; ++side) {
        const int i1 = p1.part_a.triangles(t, side);
        const int j1 = p1.part_a.triangles(t, (side + 1) % 3);
        const double len1 =
            (p1.part_a.positions.row(i1) - p1.part_a.positions.row(j1)).norm();
        const double len2 =
            (p2.part_a.positions.row(i1) - p2.part_a.positions.row(j1)).norm();
        CHECK(len1 == doctest::Approx(len2).epsilon(1e-9));
      }
  }
}

TEST_CASE("label epsilon resolution") {
  PartPairParams params;
  params.tessellation = 1;
  SUBCASE("defaults to the gap plus a hair") {
    params.gap = 0.125;
    const PartPair pair = gen_part_pair(params);
    CHECK(pair.eps > 0.125);
    CHECK(pair.eps < 0.125 + 1e-4);
  }
  SUBCASE("explicit epsilon wins") {
    params.label_eps = 0.5;
    const PartPair pair = gen_part_pair(params);
    CHECK(pair.eps == 0.5);
  }
}
