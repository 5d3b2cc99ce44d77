#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "fvfseg/filters.hpp"
#include "fvfseg/metrics.hpp"
#include "fvfseg/morphology.hpp"
#include "oracles.hpp"

using namespace fvfseg;

namespace {

Grid cube_grid(int n, double h = 1.0) { return Grid({n, n, n}, {h, h, h}); }

BinaryMask box(const Grid& g, int lo, int hi) {
  BinaryMask m(g);
  for (int k = lo; k < hi; ++k)
    for (int j = lo; j < hi; ++j)
      for (int i = lo; i < hi; ++i) m.set(i, j, k, true);
  return m;
}

}  // namespace

TEST_SUITE("volume_core") {

TEST_CASE("grid validation and indexing") {
  CHECK_THROWS_AS(Grid({0, 4, 4}, {1, 1, 1}), Error);
  CHECK_THROWS_AS(Grid({4, 4, 4}, {1, 0, 1}), Error);
  const Grid g({3, 4, 5}, {1, 2, 3});
  CHECK(g.voxels() == 60);
  CHECK(g.index(1, 0, 0) == 1);
  CHECK(g.index(0, 1, 0) == 3);
  CHECK(g.index(0, 0, 1) == 12);
  const Index3 c = g.coords(g.index(2, 3, 4));
  CHECK(c.i == 2);
  CHECK(c.j == 3);
  CHECK(c.k == 4);
  CHECK(g.world(1, 1, 1) == Vec3{1, 2, 3});
  CHECK(g.min_spacing() == 1.0);
}

TEST_CASE("affine transform rejects singular maps and inverts") {
  AffineTransform::Matrix singular{{{1, 0, 0}, {0, 1, 0}, {0, 0, 0}}};
  CHECK_THROWS_AS(AffineTransform(singular, {}), Error);
  const AffineTransform r = AffineTransform::rotation_z(0.3, {5, 6, 7});
  const Vec3 p{1.5, -2.0, 3.25};
  const Vec3 back = r.inverse().apply(r.apply(p));
  CHECK(back.x == doctest::Approx(p.x).epsilon(1e-12));
  CHECK(back.y == doctest::Approx(p.y).epsilon(1e-12));
  CHECK(back.z == doctest::Approx(p.z).epsilon(1e-12));
  CHECK(AffineTransform::identity().is_identity());
}

TEST_CASE("morphology parameter checks") {
  const BinaryMask m(cube_grid(4));
  CHECK_THROWS_AS(morphology(m, MorphMode::Erode, 0, 1), Error);
  CHECK_THROWS_AS(morphology(m, MorphMode::Dilate, 1, 0), Error);
}

TEST_CASE("eroding a single voxel empties the mask") {
  BinaryMask m(cube_grid(7));
  m.set(3, 3, 3, true);
  CHECK(erode(m).empty());
}

TEST_CASE("closing restores an interior cube") {
  const Grid g = cube_grid(20);
  const BinaryMask cube = box(g, 5, 15);
  CHECK(erode(dilate(cube)) == cube);
}

TEST_CASE("morphology agrees with brute force on random masks") {
  std::mt19937_64 rng(1234);
  const Grid g = cube_grid(16);
  for (int trial = 0; trial < 20; ++trial) {
    const BinaryMask m = oracle::random_mask(g, rng, trial % 2 ? 0.8 : 0.3);
    const int r = 1 + trial % 2;
    const int it = 1 + trial % 3;
    CHECK(erode(m, r, it) == oracle::erode(m, r, it));
    CHECK(dilate(m, r, it) == oracle::dilate(m, r, it));
  }
}

TEST_CASE("erosion is dual to dilation of the complement") {
  // Out-of-grid is background for the mask, so its complement is foreground
  // outside the grid; the matched dilation treats outside as set.
  std::mt19937_64 rng(99);
  const Grid g = cube_grid(16);
  for (int trial = 0; trial < 100; ++trial) {
    const BinaryMask m = oracle::random_mask(g, rng, 0.75);
    const BinaryMask dual =
        oracle::complement(oracle::dilate_outside_set(oracle::complement(m), 1));
    REQUIRE(erode(m) == dual);
  }
}

TEST_CASE("erosion anti-extensive, dilation extensive, both monotone") {
  std::mt19937_64 rng(5);
  const Grid g = cube_grid(12);
  for (int trial = 0; trial < 10; ++trial) {
    const BinaryMask a = oracle::random_mask(g, rng, 0.6);
    const BinaryMask b = intersect(a, oracle::random_mask(g, rng, 0.9));  // b subset of a
    CHECK(is_subset(erode(a), a));
    CHECK(is_subset(a, dilate(a)));
    CHECK(is_subset(erode(b), erode(a)));
    CHECK(is_subset(dilate(b), dilate(a)));
  }
}

TEST_CASE("boundary strip") {
  const Grid g = cube_grid(12);
  const BinaryMask cube8 = box(g, 2, 10);
  CHECK(mask_boundary_strip(cube8, 1) == box(g, 3, 9));

  // thin slab: 4 voxels thick, stripping 2 removes everything
  BinaryMask slab(g);
  for (int k = 4; k < 8; ++k)
    for (int j = 0; j < 12; ++j)
      for (int i = 0; i < 12; ++i) slab.set(i, j, k, true);
  CHECK(mask_boundary_strip(slab, 2).empty());

  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 10; ++trial) {
    const BinaryMask m = oracle::random_mask(g, rng, 0.85);
    CHECK(mask_boundary_strip(mask_boundary_strip(m, 1), 1) == mask_boundary_strip(m, 2));
    CHECK(mask_boundary_strip(m, 2) == oracle::erode(m, 1, 2));
  }
}

TEST_CASE("largest component picks the bigger blob") {
  const Grid g = cube_grid(20);
  BinaryMask m(g);
  for (int k = 2; k < 7; ++k)
    for (int j = 2; j < 7; ++j)
      for (int i = 2; i < 6; ++i) m.set(i, j, k, true);  // 100 voxels
  for (int k = 12; k < 14; ++k)
    for (int j = 12; j < 14; ++j)
      for (int i = 12; i < 17; ++i) m.set(i, j, k, true);  // 20 voxels
  const BinaryMask big = largest_component(m);
  CHECK(big.count() == 100);
  CHECK(big.at(2, 2, 2));
  CHECK_FALSE(big.at(12, 12, 12));

  BinaryMask one(g);
  one.set(3, 4, 5, true);
  CHECK(largest_component(one) == one);
  CHECK_THROWS_AS(largest_component(BinaryMask(g)), Error);
}

TEST_CASE("largest component tie goes to the smaller seed index") {
  const Grid g = cube_grid(10);
  BinaryMask m(g);
  m.set(8, 8, 8, true);
  m.set(1, 1, 1, true);
  const BinaryMask r = largest_component(m);
  CHECK(r.count() == 1);
  CHECK(r.at(1, 1, 1));
}

TEST_CASE("component labeling matches flood fill") {
  std::mt19937_64 rng(2024);
  const Grid g = cube_grid(16);
  for (int trial = 0; trial < 30; ++trial) {
    const BinaryMask m = oracle::random_mask(g, rng, 0.2 + 0.02 * trial);
    for (int conn : {6, 26}) {
      const ComponentLabels got = label_components(m, connectivity_from_int(conn));
      const std::vector<int> want = oracle::flood_labels(m, conn);
      REQUIRE(got.labels == want);
      REQUIRE(largest_component(m, connectivity_from_int(conn)) ==
              oracle::largest_component(m, conn));
    }
  }
  CHECK_THROWS_AS(connectivity_from_int(18), Error);
}

TEST_CASE("gaussian smoothing") {
  CHECK_THROWS_AS(gaussian_smooth(ScalarVolume(cube_grid(5), 1.0), 0.0), Error);

  const ScalarVolume flat(cube_grid(9), 3.25);
  const ScalarVolume s = gaussian_smooth(flat, 1.3);
  for (std::size_t n = 0; n < s.size(); ++n) REQUIRE(s[n] == doctest::Approx(3.25).epsilon(1e-15));

  // impulse: the center value is the cube of the 1D kernel's center tap,
  // with the taps computed here directly from exp(-x^2 / 2 sigma^2)
  ScalarVolume imp(cube_grid(9), 0.0);
  imp.at(4, 4, 4) = 1.0;
  const double sigma = 1.0;
  double norm = 0.0;
  for (int x = -3; x <= 3; ++x) norm += std::exp(-x * x / (2 * sigma * sigma));
  const double center = 1.0 / norm;
  const ScalarVolume si = gaussian_smooth(imp, sigma);
  CHECK(si.at(4, 4, 4) == doctest::Approx(center * center * center).epsilon(1e-12));
  const double off = std::exp(-0.5) / norm;
  CHECK(si.at(5, 4, 4) == doctest::Approx(off * center * center).epsilon(1e-12));

  double total = 0.0;
  for (double v : si.data()) total += v;
  CHECK(total == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("central gradient") {
  CHECK_THROWS_AS(central_gradient(ScalarVolume(Grid({2, 5, 5}, {1, 1, 1}), 0.0)), Error);

  const Grid g({8, 9, 10}, {0.5, 1.0, 2.0});
  ScalarVolume ramp(g), xy(g), lin(g);
  for (int k = 0; k < 10; ++k)
    for (int j = 0; j < 9; ++j)
      for (int i = 0; i < 8; ++i) {
        const Vec3 w = g.world(i, j, k);
        ramp.at(i, j, k) = 2.0 * w.x;
        xy.at(i, j, k) = w.x * w.y;
        lin.at(i, j, k) = 0.5 * w.x - 1.5 * w.y + 3.0 * w.z + 7.0;
      }
  const VectorField gr = central_gradient(ramp);
  const VectorField gxy = central_gradient(xy);
  const VectorField gl = central_gradient(lin);
  for (int k = 1; k < 9; ++k)
    for (int j = 1; j < 8; ++j)
      for (int i = 1; i < 7; ++i) {
        const std::size_t n = g.index(i, j, k);
        REQUIRE(gr[n].x == doctest::Approx(2.0).epsilon(1e-9));
        REQUIRE(std::abs(gr[n].y) < 1e-9);
        REQUIRE(std::abs(gxy[n].x - g.world(i, j, k).y) < 1e-6);
        REQUIRE(std::abs(gl[n].x - 0.5) < 1e-6);
        REQUIRE(std::abs(gl[n].y + 1.5) < 1e-6);
        REQUIRE(std::abs(gl[n].z - 3.0) < 1e-6);
      }
  const VectorField gc = central_gradient(ScalarVolume(g, 4.0));
  for (std::size_t n = 0; n < gc.size(); ++n) REQUIRE(norm(gc[n]) == 0.0);
}

TEST_CASE("affine resampling") {
  const Grid g = cube_grid(10);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-5, 5);
  ScalarVolume v(g);
  for (double& x : v.data()) x = u(rng);

  CHECK(resample_affine(v, AffineTransform::identity(), g.dims, g.spacing) == v);

  const ScalarVolume sh =
      resample_affine(v, AffineTransform::translation({1.0, 0.0, 0.0}), g.dims, g.spacing);
  for (int k = 0; k < 10; ++k)
    for (int j = 0; j < 10; ++j) {
      CHECK(sh.at(0, j, k) == 0.0);
      for (int i = 1; i < 10; ++i) REQUIRE(sh.at(i, j, k) == v.at(i - 1, j, k));
    }

  // rotated sphere against analytic membership of the rotated center
  const Grid g32 = cube_grid(32);
  const Vec3 c{12.0, 15.5, 15.5};
  const BinaryMask s = oracle::sphere_mask(g32, c, 8.0);
  const AffineTransform rot = AffineTransform::rotation_z(std::numbers::pi / 2, {15.5, 15.5, 15.5});
  const BinaryMask rs = resample_mask(s, rot, g32.dims, g32.spacing);
  const BinaryMask want = oracle::sphere_mask(g32, rot.apply(c), 8.0);
  CHECK(tanimoto(rs, want).tanimoto >= 0.95);
}

}  // TEST_SUITE
