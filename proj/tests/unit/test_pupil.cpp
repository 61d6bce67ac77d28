#include <doctest.h>

#include <cmath>

#include "support.hpp"

using namespace pupilscope;
using namespace testing_support;

namespace {

// Mean luminance of pixels whose rounded distance from (cx, cy) is k.
double ring_mean(const Frame& f, int cx, int cy, int k) {
  double sum = 0;
  int n = 0;
  for (int y = cy - k - 1; y <= cy + k + 1; ++y) {
    for (int x = cx - k - 1; x <= cx + k + 1; ++x) {
      if (!f.luma().contains(x, y)) continue;
      if (std::lround(std::hypot(x - cx, y - cy)) != k) continue;
      sum += f.luma().at(x, y);
      ++n;
    }
  }
  return sum / n;
}

}  // namespace

TEST_CASE("distance_ring agrees with rounded distance") {
  for (int d2 = 0; d2 < 20000; ++d2) {
    CHECK(distance_ring(d2) == std::lround(std::sqrt(double(d2))));
  }
}

TEST_CASE("radial profile of simple frames") {
  const Frame flat = constant_frame(40, 40, 77, 128);
  const RadialProfile p = radial_profile(flat, 20, 20, 12);
  for (int k = 0; k <= 12; ++k) CHECK(p.mean(k) == 77.0);

  const Frame cone = make_frame(
      40, 40,
      [](int x, int y) {
        return std::uint8_t(std::min<long>(255, std::lround(std::hypot(x - 20, y - 20))));
      },
      [](int, int) { return std::uint8_t{128}; });
  const RadialProfile q = radial_profile(cone, 20, 20, 15);
  for (int k = 0; k <= 15; ++k) CHECK(q.mean(k) == double(k));
}

TEST_CASE("radial profile equals a per-pixel oracle") {
  const Frame f = random_frame(64, 64, 99);
  const RadialProfile p = radial_profile(f, 31, 30, 10);
  for (int k = 0; k <= 10; ++k) {
    std::int64_t sum = 0;
    int n = 0;
    for (int y = 0; y < 64; ++y) {
      for (int x = 0; x < 64; ++x) {
        if (std::lround(std::hypot(x - 31, y - 30)) != k) continue;
        sum += f.luma().at(x, y);
        ++n;
      }
    }
    CHECK(p.ring_sum[k] == sum);
    CHECK(p.ring_count[k] == n);
  }
  CHECK_THROWS_AS((void)radial_profile(f, 5, 30, 10), Error);
}

TEST_CASE("gradient score on a two-tone disk") {
  const auto disk = [](std::uint8_t in, std::uint8_t out) {
    return make_frame(
        41, 41, [=](int x, int y) { return std::hypot(x - 20, y - 20) <= 4.49 ? in : out; },
        [](int, int) { return std::uint8_t{128}; });
  };
  const RadialProfile p = radial_profile(disk(20, 120), 20, 20, 15);
  CHECK(gradient_score(p, 4) == 100.0);
  for (int k = 1; k < 15; ++k) {
    if (k != 4) CHECK(gradient_score(p, k) == 0.0);
  }
  CHECK(gradient_score(radial_profile(disk(120, 20), 20, 20, 15), 4) == -100.0);
  CHECK(gradient_score(radial_profile(constant_frame(41, 41, 9, 128), 20, 20, 8), 3) == 0.0);
  CHECK_THROWS_AS((void)gradient_score(p, 15), Error);
  CHECK_THROWS_AS((void)gradient_score(p, 0), Error);
}

TEST_CASE("detect_pupil on a clean synthetic eye matches brute force") {
  const SynthEye eye = synth_eye(SynthEyeSpec{}, 3);
  const IrisEstimate iris = detect_iris(eye.frame, {40, 25, 48, 30, Side::Left}, 6, 12);
  REQUIRE(iris.er == 9);
  const PupilEstimate p = detect_pupil(eye.frame, iris);
  CHECK(p.pr == 4);
  CHECK(std::abs(p.px - 64) <= 1);
  CHECK(std::abs(p.py - 40) <= 1);

  // Every (center, radius) the search admits, scored from scratch.
  const int nb = default_pupil_neighborhood(iris.er);
  double best = -1e300;
  int bx = 0, by = 0, bk = 0;
  for (int y = iris.ey - nb; y <= iris.ey + nb; ++y) {
    for (int x = iris.ex - nb; x <= iris.ex + nb; ++x) {
      const double off = std::hypot(x - iris.ex, y - iris.ey);
      for (int k = 1; k <= iris.er - 2.5 - off; ++k) {
        const double g = ring_mean(eye.frame, x, y, k + 1) - ring_mean(eye.frame, x, y, k);
        if (g > best + 1e-9) {
          best = g;
          bx = x;
          by = y;
          bk = k;
        }
      }
    }
  }
  CHECK(p.g == doctest::Approx(best));
  CHECK(p.pr == bk);
  CHECK(p.px == bx);
  CHECK(p.py == by);
}

TEST_CASE("detect_pupil tolerates a one-pixel highlight") {
  SynthEyeSpec spec;
  spec.highlights.push_back({65, 39, 0.0, 255});
  const SynthEye eye = synth_eye(spec, 3);
  const IrisEstimate iris = detect_iris(eye.frame, {40, 25, 48, 30, Side::Left}, 6, 12);
  const PupilEstimate p = detect_pupil(eye.frame, iris);
  CHECK(p.pr == 4);
}

TEST_CASE("detect_pupil errors") {
  const Frame flat = constant_frame(60, 40, 100, 128);
  IrisEstimate iris{30, 20, 9, 0, 0, 0, 0, Side::Left};
  try {
    (void)detect_pupil(flat, iris);
    FAIL("expected NoPupilContrast");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NoPupilContrast);
  }
  iris.er = 3;
  try {
    (void)detect_pupil(flat, iris, 0);
    FAIL("expected NoPupilContrast");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NoPupilContrast);
  }
}

TEST_CASE("pupil radius bound shrinks with the center offset") {
  CHECK(max_pupil_radius(9, 0, 0) == 6);
  CHECK(max_pupil_radius(9, 1, 0) == 5);
  CHECK(max_pupil_radius(9, 2, 2) == 3);
  CHECK(default_pupil_neighborhood(9) == 2);
  CHECK(default_pupil_neighborhood(2) == 1);
}
