#include <cmath>
#include <random>

#include <doctest.h>

#include "errors.hpp"
#include "metrics.hpp"

using namespace hrc;

TEST_CASE("worked metric examples") {
  // predictions {3, 5, 10} against targets {4, 5, 8}
  std::vector<CountPair> pairs{{3, 4}, {5, 5}, {10, 8}};
  EvalResult r = evaluate(pairs);
  CHECK(r.n == 3);
  CHECK(r.mae == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(r.rmse == doctest::Approx(std::sqrt(5.0 / 3.0)).epsilon(1e-15));
  // sum targets = 17; under mass 1, over mass 2
  CHECK(r.pct_under == doctest::Approx(100.0 / 17.0).epsilon(1e-15));
  CHECK(r.pct_over == doctest::Approx(200.0 / 17.0).epsilon(1e-15));
  CHECK(r.pct_diff == doctest::Approx(300.0 / 17.0).epsilon(1e-15));

  // perfect predictions
  EvalResult p = evaluate({{2, 2}, {7, 7}});
  CHECK(p.mae == 0.0);
  CHECK(p.rmse == 0.0);
  CHECK(p.pct_diff == 0.0);

  // all-over
  EvalResult o = evaluate({{5, 4}});
  CHECK(o.pct_under == 0.0);
  CHECK(o.pct_over == doctest::Approx(25.0).epsilon(1e-15));
}

TEST_CASE("metric error cases") {
  CHECK_THROWS_AS(evaluate({}), DataError);
  CHECK_THROWS_AS(evaluate({{1, 0}, {2, 0}}), DataError);
}

TEST_CASE("metrics agree with a brute-force oracle on random data") {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> t(1.0, 20.0);
  std::normal_distribution<double> noise(0.0, 3.0);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 1 + static_cast<int>(rng() % 50);
    std::vector<CountPair> pairs(n);
    for (CountPair& p : pairs) {
      p.target = t(rng);
      p.actual = p.target + noise(rng);
    }
    EvalResult r = evaluate(pairs);

    double abs_sum = 0, sq = 0, u = 0, o = 0, ts = 0;
    for (const CountPair& p : pairs) {
      abs_sum += std::abs(p.actual - p.target);
      sq += (p.actual - p.target) * (p.actual - p.target);
      if (p.actual < p.target) u += p.target - p.actual;
      if (p.actual > p.target) o += p.actual - p.target;
      ts += p.target;
    }
    CHECK(std::abs(r.mae - abs_sum / n) <= 1e-12);
    CHECK(std::abs(r.rmse - std::sqrt(sq / n)) <= 1e-12);
    CHECK(std::abs(r.pct_under - 100 * u / ts) <= 1e-12);
    CHECK(std::abs(r.pct_over - 100 * o / ts) <= 1e-12);
    CHECK(std::abs(r.pct_diff - (r.pct_under + r.pct_over)) <= 1e-12);
    // identity: %U + %O = 100 * sum|d| / sum t
    CHECK(std::abs(r.pct_diff - 100 * abs_sum / ts) <= 1e-10);
  }
}

TEST_CASE("cam_mass_ratio") {
  // 4x4 map at stride 8 over a 32x32 image; cell centers at 4, 12, 20, 28
  ActivationMap cam;
  cam.h = cam.w = 4;
  cam.stride = 8;
  cam.image_h = cam.image_w = 32;
  cam.v.assign(16, 0.0);

  DotAnnotation ann;
  ann.dots = {{4.0, 4.0}};  // exactly at cell (0,0)'s center

  SUBCASE("all mass on the dot") {
    cam.at(0, 0) = 2.0;
    CHECK(cam_mass_ratio(cam, ann, 6.0) == 1.0);
  }
  SUBCASE("mass far from any dot") {
    cam.at(3, 3) = 1.0;  // center (28, 28), ~34px away
    CHECK(cam_mass_ratio(cam, ann, 6.0) == 0.0);
  }
  SUBCASE("mixed mass") {
    cam.at(0, 0) = 3.0;
    cam.at(3, 3) = 1.0;
    CHECK(cam_mass_ratio(cam, ann, 6.0) ==
          doctest::Approx(0.75).epsilon(1e-15));
  }
  SUBCASE("negative cells are ignored") {
    cam.at(0, 0) = 1.0;
    cam.at(3, 3) = -100.0;
    CHECK(cam_mass_ratio(cam, ann, 6.0) == 1.0);
  }
  SUBCASE("no positive mass gives 0") {
    CHECK(cam_mass_ratio(cam, ann, 6.0) == 0.0);
  }
  SUBCASE("radius boundary is inclusive") {
    cam.at(0, 1) = 1.0;  // center (12, 4), distance exactly 8 from the dot
    CHECK(cam_mass_ratio(cam, ann, 8.0) == 1.0);
    CHECK(cam_mass_ratio(cam, ann, 7.999) == 0.0);
  }
  SUBCASE("argument validation") {
    CHECK_THROWS_AS(cam_mass_ratio(cam, ann, 0.0), DataError);
    ActivationMap bad = cam;
    bad.image_h = 31;
    CHECK_THROWS_AS(cam_mass_ratio(bad, ann, 6.0), DataError);
  }
}
