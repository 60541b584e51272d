#include <cmath>
#include <numbers>

#include "doctest.h"
#include "patchseg/error.hpp"
#include "patchseg/levelset.hpp"
#include "support.hpp"

using namespace patchseg;
using namespace testing_support;

namespace {

RegionMask disk_mask(std::size_t n, double cx, double cy, double r) {
  ImageGrid g(n, n, 0.0);
  for (std::size_t y = 0; y < n; ++y)
    for (std::size_t x = 0; x < n; ++x)
      if (std::hypot(x - cx, y - cy) <= r) g(x, y) = 1.0;
  return RegionMask(std::move(g));
}

// Exact signed distance to a circle, positive outside.
ImageGrid circle_sdf(std::size_t n, double cx, double cy, double r) {
  ImageGrid g(n, n, 0.0);
  for (std::size_t y = 0; y < n; ++y)
    for (std::size_t x = 0; x < n; ++x) g(x, y) = std::hypot(x - cx, y - cy) - r;
  return g;
}

ImageGrid negate(ImageGrid g) {
  for (double& v : g.values()) v = -v;
  return g;
}

double inside_area(const LevelSetState& s) { return static_cast<double>(inside_mask(s).count()); }

}  // namespace

TEST_CASE("Heaviside and Dirac") {
  const double eps = 1.5;
  CHECK(heaviside_value(0.0, eps) == 0.5);
  CHECK(dirac_value(0.0, eps) == doctest::Approx(1.0 / (std::numbers::pi * eps)));
  CHECK(heaviside_value(1e9, eps) == doctest::Approx(1.0));
  CHECK(dirac_value(1e9, eps) < 1e-12);
  for (double phi : {-7.0, -1.2, -0.3, 0.0, 0.4, 2.5, 11.0}) {
    const double h = 1e-4;
    const double fd = (heaviside_value(phi + h, eps) - heaviside_value(phi - h, eps)) / (2 * h);
    CHECK(std::abs(fd - dirac_value(phi, eps)) <= 1e-6);
  }
  const LevelSetState s{circle_sdf(16, 8, 8, 4), eps, 0.0, 0.1};
  const ImageGrid h = heaviside(s);
  for (double v : h.values()) {
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
  }
}

TEST_CASE("init_from_mask") {
  SUBCASE("disk: center value is the radius") {
    const LevelSetState s = init_from_mask(disk_mask(41, 20, 20, 12));
    CHECK(std::abs(s.phi(20, 20) - 12.0) <= 1.0);
  }
  SUBCASE("half plane: slope one") {
    ImageGrid g(40, 20, 0.0);
    for (std::size_t y = 0; y < 20; ++y)
      for (std::size_t x = 20; x < 40; ++x) g(x, y) = 1.0;
    const LevelSetState s = init_from_mask(RegionMask(g));
    for (std::size_t x = 2; x + 3 < 40; ++x) CHECK(std::abs((s.phi(x + 1, 10) - s.phi(x, 10)) - 1.0) <= 0.05);
  }
  SUBCASE("random blobs: sign and brute-force distance") {
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
      std::mt19937_64 rng(seed);
      std::uniform_real_distribution<double> u(8, 56), rr(4, 12);
      ImageGrid g(64, 64, 0.0);
      for (int b = 0; b < 5; ++b) {
        const double cx = u(rng), cy = u(rng), r = rr(rng);
        for (std::size_t y = 0; y < 64; ++y)
          for (std::size_t x = 0; x < 64; ++x)
            if (std::hypot(x - cx, y - cy) <= r) g(x, y) = 1.0;
      }
      const RegionMask mask(g);
      const LevelSetState s = init_from_mask(mask);
      CHECK(inside_mask(s) == mask);
      for (std::size_t y = 0; y < 64; y += 3)
        for (std::size_t x = 0; x < 64; x += 3) {
          // Nearest pixel center of the other label; the front lies about half a pixel short of it.
          double best = INFINITY;
          for (std::size_t qy = 0; qy < 64; ++qy)
            for (std::size_t qx = 0; qx < 64; ++qx)
              if (mask.contains(qx, qy) != mask.contains(x, y))
                best = std::min(best, std::hypot(double(qx) - x, double(qy) - y));
          CHECK(std::abs(std::abs(s.phi(x, y)) - (best - 0.5)) <= 0.75);
        }
      CHECK(sdf_quality(s.phi).far_fraction_ok >= 0.95);
    }
  }
  SUBCASE("uniform mask") {
    CHECK_THROWS_AS(init_from_mask(RegionMask::full(5, 5)), InvalidArgument);
    CHECK_THROWS_AS(init_from_mask(RegionMask::empty(5, 5)), InvalidArgument);
  }
}

TEST_CASE("curvature") {
  SUBCASE("circle of radius r: 1/r on the zero set") {
    for (double r : {8.0, 12.0, 20.0}) {
      const LevelSetState s{circle_sdf(64, 31.7, 32.2, r), 1.5, 0.0, 0.1};
      const ImageGrid k = curvature(s);
      int checked = 0;
      for (std::size_t y = 0; y < 64; ++y)
        for (std::size_t x = 0; x < 64; ++x)
          if (std::abs(s.phi(x, y)) < 0.5) {
            CHECK(std::abs(k(x, y) - 1.0 / r) <= 0.15 / r);
            ++checked;
          }
      CHECK(checked > 10);
    }
  }
  SUBCASE("planar ramp") {
    ImageGrid g(20, 20, 0.0);
    for (std::size_t y = 0; y < 20; ++y)
      for (std::size_t x = 0; x < 20; ++x) g(x, y) = 0.6 * x - 0.8 * y + 1.0;
    const ImageGrid k = curvature(LevelSetState{g, 1.5, 0.0, 0.1});
    for (std::size_t y = 2; y < 18; ++y)
      for (std::size_t x = 2; x < 18; ++x) CHECK(std::abs(k(x, y)) <= 1e-3);
  }
  SUBCASE("odd symmetry") {
    const ImageGrid phi = random_image(16, 16, 3, -2, 2);
    const ImageGrid a = curvature(LevelSetState{phi, 1.5, 0.0, 0.1});
    const ImageGrid b = curvature(LevelSetState{negate(phi), 1.5, 0.0, 0.1});
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a.values()[i] == -b.values()[i]);
  }
}

TEST_CASE("evolve_step") {
  const LevelSetState base = init_from_mask(disk_mask(48, 24, 24, 10), 1.5, 0.0);
  SUBCASE("equal fields and no length term: unchanged") {
    const ImageGrid e = random_image(48, 48, 1);
    CHECK(evolve_step(base, e, e).phi == base.phi);
  }
  SUBCASE("region 1 expands when it fits better") {
    const LevelSetState next = evolve_step(base, ImageGrid(48, 48, 0.0), ImageGrid(48, 48, 1.0));
    for (std::size_t i = 0; i < next.phi.size(); ++i) CHECK(next.phi.values()[i] > base.phi.values()[i]);
  }
  SUBCASE("pure curvature flow shrinks a disk") {
    LevelSetState s = base;
    s.nu = 5.0;
    const ImageGrid zero(48, 48, 0.0);
    s.dt = cfl_time_step(s, zero, zero);
    double area = inside_area(s);
    for (int step = 0; step < 200; ++step) {
      s = evolve_step(s, zero, zero);
      const double next = inside_area(s);
      CHECK(next <= area);
      area = next;
    }
    CHECK(area < inside_area(base));
  }
  SUBCASE("two-phase symmetry") {
    LevelSetState s = base;
    s.nu = 2.0;
    s.dt = 0.05;
    const ImageGrid e1 = random_image(48, 48, 2), e2 = random_image(48, 48, 3);
    LevelSetState mirrored = s;
    mirrored.phi = negate(s.phi);
    const LevelSetState a = evolve_step(s, e1, e2);
    const LevelSetState b = evolve_step(mirrored, e2, e1);
    for (std::size_t i = 0; i < a.phi.size(); ++i)
      CHECK(std::abs((a.phi.values()[i] - s.phi.values()[i]) + (b.phi.values()[i] - mirrored.phi.values()[i])) <= 1e-10);
  }
  SUBCASE("constant-sign forcing: monotone area until saturation") {
    LevelSetState s = base;
    const ImageGrid e1(48, 48, 0.2), e2(48, 48, 0.5);
    s.dt = cfl_time_step(s, e1, e2);
    double area = inside_area(s);
    for (int step = 0; step < 100; ++step) {
      s = evolve_step(s, e1, e2);
      const double next = inside_area(s);
      CHECK(next >= area);
      area = next;
    }
  }
  SUBCASE("time-step bound") {
    LevelSetState s = base;
    s.nu = 3.0;
    const ImageGrid e1 = random_image(48, 48, 4), e2 = random_image(48, 48, 5);
    double force = 0.0, dmax = 0.0;
    for (std::size_t i = 0; i < e1.size(); ++i) {
      const double d = dirac_value(s.phi.values()[i], s.eps);
      force = std::max(force, std::abs(e1.values()[i] - e2.values()[i]) * d);
      dmax = std::max(dmax, d);
    }
    CHECK(cfl_time_step(s, e1, e2) == doctest::Approx(0.45 / (force + 4.0 * 3.0 * dmax)));
    CHECK_THROWS_AS(cfl_time_step(s, ImageGrid(4, 4), ImageGrid(4, 4)), DimensionMismatch);
  }
}

TEST_CASE("zero_set_displacement") {
  const ImageGrid a = circle_sdf(32, 15.5, 16.2, 9.0);
  CHECK(zero_set_displacement(a, a) <= 1e-12);
  ImageGrid shifted = a;
  for (double& v : shifted.values()) v += 0.3;
  CHECK(zero_set_displacement(a, shifted) == doctest::Approx(0.3));
  CHECK(zero_set_displacement(a, circle_sdf(32, 15.5, 16.2, 10.0)) == doctest::Approx(1.0).epsilon(0.05));
  CHECK_THROWS_AS(zero_set_displacement(a, ImageGrid(4, 4)), DimensionMismatch);
}

TEST_CASE("reinitialize") {
  SUBCASE("exact SDF is a fixed point") {
    const ImageGrid sdf = negate(circle_sdf(48, 23.4, 24.1, 13.0));
    const LevelSetState r = reinitialize(LevelSetState{sdf, 1.5, 0.0, 0.1});
    double sq = 0.0;
    for (std::size_t i = 0; i < sdf.size(); ++i) sq += std::pow(r.phi.values()[i] - sdf.values()[i], 2);
    CHECK(std::sqrt(sq / sdf.size()) <= 0.1);
    CHECK(zero_set_displacement(sdf, r.phi) <= 0.1);
  }
  SUBCASE("three times an SDF is restored") {
    ImageGrid scaled = negate(circle_sdf(48, 24, 24, 11));
    for (double& v : scaled.values()) v *= 3.0;
    const LevelSetState s{scaled, 1.5, 0.0, 0.1};
    CHECK(sdf_quality(scaled).far_fraction_ok < 0.5);
    const LevelSetState r = reinitialize(s);
    CHECK(sdf_quality(r.phi).far_fraction_ok >= 0.95);
    const LevelSetState ref = init_from_mask(inside_mask(s));
    double worst = 0.0;
    for (std::size_t i = 0; i < scaled.size(); ++i)
      worst = std::max(worst, std::abs(r.phi.values()[i] - ref.phi.values()[i]));
    CHECK(worst <= 1.0);
  }
  SUBCASE("random smooth phi keeps its sign pattern") {
    ImageGrid phi(64, 64, 0.0);
    for (std::size_t y = 0; y < 64; ++y)
      for (std::size_t x = 0; x < 64; ++x)
        phi(x, y) = 3 * std::sin(0.15 * x + 0.4) + 2.5 * std::cos(0.11 * y - 0.2 * x) + std::sin(0.07 * (x + y));
    const LevelSetState s{phi, 1.5, 0.0, 0.1};
    const LevelSetState r = reinitialize(s);
    for (std::size_t i = 0; i < phi.size(); ++i)
      if (std::abs(phi.values()[i]) > 1.0) CHECK((phi.values()[i] > 0) == (r.phi.values()[i] > 0));
    CHECK(inside_mask(r) == inside_mask(s));
    CHECK(sdf_quality(r.phi).far_fraction_ok >= 0.95);
    CHECK(zero_set_displacement(phi, r.phi) <= 0.5);
  }
}
