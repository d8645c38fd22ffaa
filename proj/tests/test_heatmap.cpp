#include <cmath>

#include <doctest.h>

#include "errors.hpp"
#include "heatmap.hpp"

using namespace hrc;

TEST_CASE("gaussian kernel shape and values") {
  const double sigma = 2.0;
  const int r = 6;  // ceil(3 * sigma)
  GamConfig cfg;
  CHECK(cfg.radius() == 6);

  std::vector<double> k = gaussian_kernel(sigma, r);
  const int n = 2 * r + 1;
  REQUIRE(static_cast<int>(k.size()) == n * n);
  CHECK(k[r * n + r] == 1.0);  // peak amplitude-normalized to 1
  // symmetric in both axes
  for (int y = 0; y < n; ++y)
    for (int x = 0; x < n; ++x) {
      CHECK(k[y * n + x] ==
            doctest::Approx(k[(n - 1 - y) * n + x]).epsilon(1e-15));
      CHECK(k[y * n + x] ==
            doctest::Approx(k[y * n + (n - 1 - x)]).epsilon(1e-15));
    }
  // matches exp(-(dx^2 + dy^2) / (2 sigma^2))
  CHECK(k[r * n + r + 1] ==
        doctest::Approx(std::exp(-1.0 / (2 * sigma * sigma))).epsilon(1e-14));
}

TEST_CASE("single centered dot at full resolution") {
  DotAnnotation ann;
  ann.dots = {{32.0, 32.0}};
  GamConfig cfg;
  cfg.downscale = 1;
  ActivationMap m = render_gam(ann, 64, 64, cfg);
  REQUIRE(m.h == 64);
  REQUIRE(m.w == 64);
  CHECK(m.stride == 1);

  // peak at the pixels adjacent to the continuous center
  double best = 0;
  for (double v : m.v) best = std::max(best, v);
  const double expect_peak = std::exp(-2 * 0.25 / (2 * 4.0));
  CHECK(best == doctest::Approx(expect_peak).epsilon(1e-12));

  // 180-degree rotational symmetry about the dot
  for (int y = 0; y < 64; ++y)
    for (int x = 0; x < 64; ++x) {
      const double a = m.at(y, x), b = m.at(63 - y, 63 - x);
      CHECK(std::abs(a - b) <= 1e-12);
    }

  // mass decays monotonically along the axis away from the center
  for (int x = 33; x < 38; ++x) CHECK(m.at(32, x) > m.at(32, x + 1));
}

TEST_CASE("sub-pixel dot positions shift the map") {
  GamConfig cfg;
  cfg.downscale = 1;
  DotAnnotation a, b;
  a.dots = {{20.0, 20.0}};
  b.dots = {{20.4, 20.0}};
  ActivationMap ma = render_gam(a, 40, 40, cfg);
  ActivationMap mb = render_gam(b, 40, 40, cfg);
  CHECK(mb.at(20, 21) > ma.at(20, 21));  // moved toward +x
  CHECK(mb.at(20, 18) < ma.at(20, 18));
}

TEST_CASE("overlapping dots add; border dots truncate") {
  GamConfig cfg;
  cfg.downscale = 1;
  DotAnnotation one, two;
  one.dots = {{16.0, 16.0}};
  two.dots = {{16.0, 16.0}, {16.0, 16.0}};
  ActivationMap m1 = render_gam(one, 32, 32, cfg);
  ActivationMap m2 = render_gam(two, 32, 32, cfg);
  for (size_t i = 0; i < m1.v.size(); ++i)
    CHECK(m2.v[i] == doctest::Approx(2 * m1.v[i]).epsilon(1e-14));

  // a dot on the border still renders, with its off-image mass dropped
  DotAnnotation corner;
  corner.dots = {{0.5, 0.5}};
  ActivationMap mc = render_gam(corner, 32, 32, cfg);
  CHECK(mc.at(0, 0) == doctest::Approx(1.0).epsilon(1e-12));
  double total = 0, full_total = 0;
  for (double v : mc.v) total += v;
  for (double v : m1.v) full_total += v;
  CHECK(total < full_total);
}

TEST_CASE("downscaling mean-pools and conserves mean mass") {
  DotAnnotation ann;
  ann.dots = {{17.3, 29.8}, {49.1, 12.6}};
  GamConfig full;
  full.downscale = 1;
  GamConfig down;
  down.downscale = 8;

  ActivationMap hi = render_gam(ann, 64, 64, full);
  ActivationMap lo = render_gam(ann, 64, 64, down);
  REQUIRE(lo.h == 8);
  REQUIRE(lo.w == 8);
  CHECK(lo.stride == 8);
  CHECK(lo.image_h == 64);

  for (int Y = 0; Y < 8; ++Y)
    for (int X = 0; X < 8; ++X) {
      double s = 0;
      for (int dy = 0; dy < 8; ++dy)
        for (int dx = 0; dx < 8; ++dx) s += hi.at(Y * 8 + dy, X * 8 + dx);
      CHECK(lo.at(Y, X) == doctest::Approx(s / 64).epsilon(1e-13));
    }

  double hi_sum = 0, lo_sum = 0;
  for (double v : hi.v) hi_sum += v;
  for (double v : lo.v) lo_sum += v;
  CHECK(lo_sum * 64 == doctest::Approx(hi_sum).epsilon(1e-12));
}

TEST_CASE("empty annotation yields an all-zero map") {
  DotAnnotation none;
  GamConfig cfg;
  ActivationMap m = render_gam(none, 64, 64, cfg);
  for (double v : m.v) CHECK(v == 0.0);
}

TEST_CASE("normalize_map") {
  ActivationMap m;
  m.h = 1;
  m.w = 4;
  m.v = {2.0, 4.0, 6.0, 10.0};
  ActivationMap n = normalize_map(m, 0.0);
  CHECK(n.v[0] == 0.0);
  CHECK(n.v[3] == 1.0);
  CHECK(n.v[1] == doctest::Approx(0.25).epsilon(1e-15));

  // constant map with eps stays finite and zero
  ActivationMap c;
  c.h = 1;
  c.w = 3;
  c.v = {5.0, 5.0, 5.0};
  ActivationMap nc = normalize_map(c, 1e-8);
  for (double v : nc.v) CHECK(v == 0.0);
}

TEST_CASE("invalid render arguments") {
  DotAnnotation ann;
  ann.dots = {{4.0, 4.0}};
  GamConfig cfg;
  cfg.downscale = 7;  // 64 not divisible by 7
  CHECK_THROWS(render_gam(ann, 64, 64, cfg));
  GamConfig neg;
  neg.sigma = 0.0;
  CHECK_THROWS(render_gam(ann, 64, 64, neg));
}
