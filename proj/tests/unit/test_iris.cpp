#include <doctest.h>

#include <cmath>
#include <optional>

#include "oracle.hpp"
#include "support.hpp"

using namespace pupilscope;
using namespace testing_support;


TEST_CASE("constant frame accumulates flat sums") {
  const Frame f = constant_frame(64, 32, 128, 128);
  const MaskSet m(8);
  const ScoreAccumulators acc = accumulate(f, 30, 15, m);
  for (int k = 1; k <= 8; ++k) {
    CHECK(acc.lum_ring_count[k] == m.ring_count(k));
    CHECK(acc.lum_ring_sum[k] == 128LL * acc.lum_ring_count[k]);
  }
  CHECK(acc.sym_sum == 0);
  CHECK(luminosity_score(acc, m) == 0.0);
  CHECK(saturation_score(acc, m) == 0.0);
  CHECK(symmetry_score(acc, m) == 0.0);
}

TEST_CASE("mirror-symmetric frame has zero symmetry sum") {
  const Frame base = random_frame(64, 32, 11);
  const int cx = 31;
  const Frame f = make_frame(
      64, 32, [&](int x, int y) { return base.luma().at(x <= cx ? x : 2 * cx - x, y); },
      [&](int x, int y) { return base.satv().at(x <= cx ? x : 2 * cx - x, y); });
  CHECK(accumulate(f, cx, 16, MaskSet(8)).sym_sum == 0);
}

TEST_CASE("single pass equals per-criterion reference at (32,32), r=8") {
  const Frame f = random_frame(64, 64, 2024);
  const CandidateScore got = score_candidate(f, 32, 32, MaskSet(8));
  const Naive want = naive_scores(f, 32, 32, 8);
  CHECK(close(got.l, want.l));
  CHECK(close(got.s, want.s));
  CHECK(close(got.h, want.h));
  CHECK(close(got.c, want.l + want.s + want.h));
}

TEST_CASE("single pass equals reference on 200 random triples") {
  std::mt19937_64 rng(77);
  int bad = 0;
  for (int t = 0; t < 200; ++t) {
    const int r = std::uniform_int_distribution<int>(2, 20)(rng);
    const int w = 4 * r + 7 + std::uniform_int_distribution<int>(0, 20)(rng);
    const int h = 2 * r - 1 + std::uniform_int_distribution<int>(0, 20)(rng);
    const Frame f = random_frame(w, h, rng());
    const int cx = std::uniform_int_distribution<int>(2 * r + 3, w - 2 * r - 4)(rng);
    const int cy = std::uniform_int_distribution<int>(r - 1, h - r)(rng);
    const CandidateScore got = score_candidate(f, cx, cy, MaskSet(r));
    const Naive want = naive_scores(f, cx, cy, r);
    bad += !(close(got.l, want.l) && close(got.s, want.s) && close(got.h, want.h));
  }
  CHECK(bad == 0);
}

TEST_CASE("instrumentation: one visit per cell, constant multiplications") {
  const Frame f = random_frame(160, 60, 5);
  std::int64_t mults = -1;
  for (int r = 2; r <= 25; ++r) {
    CAPTURE(r);
    const MaskSet m(r);
    OpCounts counts;
    counts.record_map = true;
    (void)score_candidate(f, 80, 30, m, &counts);
    CHECK(counts.cell_visits == std::int64_t{m.grid_w()} * m.grid_h());
    CHECK(std::all_of(counts.visit_map.begin(), counts.visit_map.end(),
                      [](int v) { return v == 1; }));
    CHECK(counts.visit_map.size() == std::size_t(m.grid_w() * m.grid_h()));
    if (mults < 0) mults = counts.multiplications;
    CHECK(counts.multiplications == mults);
  }
  CHECK(mults <= 5);
}

TEST_CASE("luminosity score extremes") {
  const MaskSet m(8);
  const int cx = 30, cy = 10;
  const auto paint = [&](std::uint8_t iris, std::uint8_t sclera) {
    return make_frame(
        64, 24,
        [&](int x, int y) -> std::uint8_t {
          const int dx = x - cx, dy = y - cy;
          if (std::abs(dx) > m.half_w() || std::abs(dy) > m.half_h()) return 99;
          const auto k = m.label(dx, dy).kind;
          if (k == CellLabel::Kind::IrisRing) return iris;
          if (k == CellLabel::Kind::Sclera) return sclera;
          return 99;
        },
        [](int, int) { return std::uint8_t{128}; });
  };
  CHECK(score_candidate(paint(0, 255), cx, cy, m).l == doctest::Approx(255.0));
  CHECK(score_candidate(paint(255, 0), cx, cy, m).l == doctest::Approx(-255.0));
}

TEST_CASE("saturation score") {
  const MaskSet m(8);
  const int cx = 30, cy = 10;
  const Frame f = make_frame(
      64, 24, [](int, int) { return std::uint8_t{100}; },
      [&](int x, int y) -> std::uint8_t {
        const int dx = x - cx, dy = y - cy;
        if (std::abs(dx) <= m.half_w() && std::abs(dy) <= m.half_h() &&
            m.label(dx, dy).kind == CellLabel::Kind::Sclera) {
          return 40;
        }
        return 200;
      });
  CHECK(score_candidate(f, cx, cy, m).s == doctest::Approx(160.0));
  CHECK(score_candidate(constant_frame(64, 24, 10, 128), cx, cy, m).s == 0.0);
}

TEST_CASE("symmetry score of a half-black half-white region") {
  for (int r : {2, 5, 8, 13}) {
    CAPTURE(r);
    const MaskSet m(r);
    const int cx = m.half_w(), cy = m.half_h();
    const auto half = [&](int x, int) { return std::uint8_t(x < cx ? 0 : 255); };
    const Frame f = make_frame(m.grid_w(), m.grid_h(), half, half);
    const double h = score_candidate(f, cx, cy, m).h;
    // The center column is its own mirror and contributes nothing.
    const int n = m.n_iris() + m.n_sclera();
    const int center_column = 2 * r - 1;
    CHECK(h == doctest::Approx(-510.0 * (n - center_column) / n));
    CHECK(close(h, naive_scores(f, cx, cy, r).h));
    CHECK(h > -510.0);
  }
}

TEST_CASE("symmetry score is never positive") {
  std::mt19937_64 rng(8);
  for (int t = 0; t < 50; ++t) {
    const Frame f = random_frame(60, 30, rng());
    CHECK(score_candidate(f, 30, 15, MaskSet(6)).h <= 0.0);
  }
}

TEST_CASE("total score is a plain sum") {
  CHECK(total_score(0, 0, 0) == 0.0);
  CHECK(total_score(255, 160, 0) == 415.0);
  CHECK(total_score(255, 0, -510) == -255.0);
}

TEST_CASE("detect_iris finds a synthetic iris and agrees with brute force") {
  SynthEyeSpec spec;
  spec.width = 80;
  spec.height = 40;
  spec.iris_cx = 40;
  spec.iris_cy = 20;
  spec.iris_radius = 9;
  spec.sclera_a = 22;
  spec.sclera_b = 10;
  const SynthEye eye = synth_eye(spec, 1);
  const EyeRegion roi{0, 0, 80, 40, Side::Left};
  const IrisEstimate est = detect_iris(eye.frame, roi, 5, 14);
  CHECK(est.ex == 40);
  CHECK(est.ey == 20);
  CHECK(est.er == 9);
  CHECK(est.c > 0.0);

  IrisEstimate brute;
  bool have = false;
  for (int r = 5; r <= 14; ++r) {
    const MaskSet m(r);
    for (int y = 0; y < 40; ++y) {
      for (int x = 0; x < 80; ++x) {
        if (!fits(eye.frame.luma(), x, y, m.half_w(), m.half_h())) continue;
        const Naive n = naive_scores(eye.frame, x, y, r);
        const double c = n.l + n.s + n.h;
        if (!have || c > brute.c + 1e-9) {
          brute = {x, y, r, n.l, n.s, n.h, c, Side::Left};
          have = true;
        }
      }
    }
  }
  CHECK(brute.ex == est.ex);
  CHECK(brute.ey == est.ey);
  CHECK(brute.er == est.er);
  CHECK(brute.c == doctest::Approx(est.c));
}

TEST_CASE("constant region ties resolve to the smallest radius, top-left center") {
  const Frame f = constant_frame(80, 40, 90, 128);
  const EyeRegion roi{0, 0, 80, 40, Side::Right};
  const IrisEstimate est = detect_iris(f, roi, 4, 8);
  CHECK(est.c == 0.0);
  CHECK(est.er == 4);
  CHECK(est.ex == 2 * 4 + 3);
  CHECK(est.ey == 4 - 1);
  CHECK(est.side == Side::Right);
}

TEST_CASE("singleton search space returns the only candidate") {
  // A frame exactly one r=8 footprint in size admits a single center.
  const MaskSet m(8);
  const Frame f = random_frame(m.grid_w(), m.grid_h(), 9);
  const IrisEstimate one = detect_iris(f, {0, 0, m.grid_w(), m.grid_h(), Side::Left}, 8, 8);
  CHECK(one.ex == m.half_w());
  CHECK(one.ey == m.half_h());
  CHECK(one.er == 8);
  CHECK(one.c == doctest::Approx(score_candidate(f, m.half_w(), m.half_h(), m).c));
}

TEST_CASE("detect_iris errors") {
  const Frame f = constant_frame(40, 20, 50, 128);
  try {
    (void)detect_iris(f, {0, 0, 40, 20, Side::Left}, 12, 12);
    FAIL("expected NoValidCandidate");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NoValidCandidate);
  }
  CHECK_THROWS_AS((void)detect_iris(f, {30, 0, 15, 15, Side::Left}, 3, 3), Error);
  try {
    (void)detect_iris(f, {0, 0, 40, 20, Side::Left}, 1, 3);
    FAIL("expected RadiusTooSmall");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::RadiusTooSmall);
  }
}

TEST_CASE("parallel search matches the serial result") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const SynthEyeSpec spec = random_eye_spec(seed, SynthPreset::Noisy);
    const SynthEye eye = synth_eye(spec, seed);
    const EyeRegion roi = synth_roi(spec, seed);
    const MaskBank bank(4, 14);
    const IrisEstimate a = detect_iris(eye.frame, roi, bank, 1, 1);
    for (int workers : {2, 3, 8}) {
      const IrisEstimate b = detect_iris(eye.frame, roi, bank, 1, workers);
      CHECK(a.ex == b.ex);
      CHECK(a.ey == b.ey);
      CHECK(a.er == b.er);
      CHECK(a.c == b.c);
    }
  }
}

TEST_CASE("default radius range") {
  CHECK(default_radius_range(48) == std::pair{4, 17});
  CHECK(default_radius_range(10).first == 2);
}

TEST_CASE("search scores equal the single-pass accumulator exactly") {
  // Frames one footprint in size leave a single candidate to compare.
  for (int r : {8, 9, 12, 17}) {
    const MaskSet m(r);
    const MaskBank bank(r, r);
    for (std::uint64_t seed = 0; seed < 25; ++seed) {
      const Frame f = random_frame(m.grid_w(), m.grid_h(), 1000 * r + seed);
      const IrisEstimate got =
          detect_iris(f, {0, 0, m.grid_w(), m.grid_h(), Side::Left}, bank, 1, 1);
      const CandidateScore ref = score_candidate(f, m.half_w(), m.half_h(), m);
      REQUIRE(got.l == ref.l);
      REQUIRE(got.s == ref.s);
      REQUIRE(got.h == ref.h);
      REQUIRE(got.c == ref.c);
    }
  }
}

TEST_CASE("full search on noise returns the reference argmax") {
  for (std::uint64_t seed = 40; seed < 44; ++seed) {
    const Frame f = random_frame(60, 40, seed);
    const EyeRegion roi{5, 3, 50, 34, Side::Right};
    const IrisEstimate est = detect_iris(f, roi, 3, 8);
    std::optional<IrisEstimate> ref;
    for (int r = 3; r <= 8; ++r) {
      const MaskSet m(r);
      for (int y = roi.y; y < roi.y + roi.h; ++y) {
        for (int x = roi.x; x < roi.x + roi.w; ++x) {
          if (!fits(f.luma(), x, y, m.half_w(), m.half_h())) continue;
          const CandidateScore s = score_candidate(f, x, y, m);
          const IrisEstimate cand{x, y, r, s.l, s.s, s.h, s.c, Side::Right};
          if (!ref || iris_better(cand, *ref)) ref = cand;
        }
      }
    }
    REQUIRE(ref.has_value());
    CHECK(est.ex == ref->ex);
    CHECK(est.ey == ref->ey);
    CHECK(est.er == ref->er);
    CHECK(est.c == ref->c);
  }
}
