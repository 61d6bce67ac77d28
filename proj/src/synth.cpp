#include "pupilscope/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "pupilscope/error.hpp"

namespace pupilscope {

SynthPreset parse_preset(std::string_view text) {
  if (text == "clean") return SynthPreset::Clean;
  if (text == "noisy") return SynthPreset::Noisy;
  throw Error(ErrorCode::InvalidArgument,
              "unknown preset '" + std::string(text) + "'");
}

std::string_view preset_name(SynthPreset preset) noexcept {
  return preset == SynthPreset::Clean ? "clean" : "noisy";
}

double preset_sigma(SynthPreset preset) noexcept {
  return preset == SynthPreset::Clean ? 0.0 : 8.0;
}

std::uint64_t SplitRng::next() noexcept {
  std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

double SplitRng::uniform() noexcept {
  return static_cast<double>(next() >> 11) * 0x1.0p-53;
}

int SplitRng::uniform_int(int lo, int hi) noexcept {
  const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
  return lo + static_cast<int>(next() % span);
}

double SplitRng::gaussian() noexcept {
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::array<std::uint8_t, 3> tone_to_rgb(Tone tone) {
  const double y = tone.luma;
  const double v = tone.satv - 128.0;
  const auto clamp8 = [](long x) {
    return static_cast<std::uint8_t>(std::clamp<long>(x, 0, 255));
  };
  const long r0 = std::lround(y + 1.402 * v);
  const long g0 = std::lround(y - 0.714136 * v);
  const long b0 = std::lround(y);
  std::array<std::uint8_t, 3> best{clamp8(r0), clamp8(g0), clamp8(b0)};
  int best_err = std::numeric_limits<int>::max();
  for (long dr = -3; dr <= 3; ++dr) {
    for (long dg = -3; dg <= 3; ++dg) {
      for (long db = -3; db <= 3; ++db) {
        const std::array<std::uint8_t, 3> c{clamp8(r0 + dr), clamp8(g0 + dg),
                                            clamp8(b0 + db)};
        const auto ls = to_luma_satv(c[0], c[1], c[2]);
        const int err = std::abs(ls.luma - tone.luma) + std::abs(ls.satv - tone.satv);
        if (err < best_err) {
          best_err = err;
          best = c;
          if (err == 0) return best;
        }
      }
    }
  }
  return best;
}

void validate_spec(const SynthEyeSpec& s) {
  const auto fail = [](const std::string& why) {
    throw Error(ErrorCode::InvalidSpec, why);
  };
  if (s.width <= 0 || s.height <= 0) fail("image size must be positive");
  if (s.iris_radius < 2) fail("iris radius must be >= 2");
  if (s.pupil_radius < 1) fail("pupil radius must be >= 1");
  if (s.pupil_radius > s.iris_radius - 2) {
    fail("pupil must lie strictly inside the iris");
  }
  const double iris_disk = s.iris_radius - 1.0;
  if (s.sclera_a < iris_disk || s.sclera_b < iris_disk) {
    fail("iris disk must lie inside the sclera ellipse");
  }
  if (s.iris_cx - s.sclera_a < 0 || s.iris_cx + s.sclera_a > s.width - 1 ||
      s.iris_cy - s.sclera_b < 0 || s.iris_cy + s.sclera_b > s.height - 1) {
    fail("sclera ellipse must lie inside the image");
  }
  if (!(s.noise_sigma >= 0.0)) fail("noise sigma must be >= 0");
  for (const auto& h : s.highlights) {
    if (h.x < 0 || h.y < 0 || h.x >= s.width || h.y >= s.height || h.radius < 0) {
      fail("highlight outside the image");
    }
  }
}

namespace {

void fill(RgbImage& img, Tone tone) {
  const auto c = tone_to_rgb(tone);
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      auto* p = img.px(x, y);
      p[0] = c[0];
      p[1] = c[1];
      p[2] = c[2];
    }
  }
}

void paint_eye(RgbImage& img, const SynthEyeSpec& s) {
  const auto sclera = tone_to_rgb(s.sclera);
  const auto iris = tone_to_rgb(s.iris);
  const auto pupil = tone_to_rgb(s.pupil);
  const int iris_d2 = (s.iris_radius - 1) * (s.iris_radius - 1);
  const int pupil_d2 = s.pupil_radius * s.pupil_radius + s.pupil_radius;
  const int x0 = static_cast<int>(std::floor(s.iris_cx - s.sclera_a));
  const int x1 = static_cast<int>(std::ceil(s.iris_cx + s.sclera_a));
  const int y0 = static_cast<int>(std::floor(s.iris_cy - s.sclera_b));
  const int y1 = static_cast<int>(std::ceil(s.iris_cy + s.sclera_b));
  for (int y = std::max(y0, 0); y <= std::min(y1, img.height - 1); ++y) {
    for (int x = std::max(x0, 0); x <= std::min(x1, img.width - 1); ++x) {
      const int dx = x - s.iris_cx;
      const int dy = y - s.iris_cy;
      const int d2 = dx * dx + dy * dy;
      const std::array<std::uint8_t, 3>* c = nullptr;
      if (d2 <= pupil_d2) {
        c = &pupil;
      } else if (d2 <= iris_d2) {
        c = &iris;
      } else {
        const double ex = dx / s.sclera_a;
        const double ey = dy / s.sclera_b;
        if (ex * ex + ey * ey <= 1.0) c = &sclera;
      }
      if (c == nullptr) continue;
      auto* p = img.px(x, y);
      p[0] = (*c)[0];
      p[1] = (*c)[1];
      p[2] = (*c)[2];
    }
  }
  for (const auto& h : s.highlights) {
    const int reach = static_cast<int>(std::ceil(h.radius));
    for (int y = h.y - reach; y <= h.y + reach; ++y) {
      for (int x = h.x - reach; x <= h.x + reach; ++x) {
        if (x < 0 || y < 0 || x >= img.width || y >= img.height) continue;
        const double d2 = (x - h.x) * (x - h.x) + (y - h.y) * (y - h.y);
        if (d2 > h.radius * h.radius) continue;
        auto* p = img.px(x, y);
        p[0] = p[1] = p[2] = h.intensity;
      }
    }
  }
}

void add_noise(RgbImage& img, double sigma, std::uint64_t seed) {
  if (sigma <= 0.0) return;
  SplitRng rng(seed);
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      // Equal offsets on R, G and B shift luma and leave V unchanged.
      const long n = std::lround(sigma * rng.gaussian());
      auto* p = img.px(x, y);
      for (int ch = 0; ch < 3; ++ch) {
        p[ch] = static_cast<std::uint8_t>(std::clamp<long>(p[ch] + n, 0, 255));
      }
    }
  }
}

SynthEye truth_of(const SynthEyeSpec& s) {
  SynthEye out;
  out.iris.ex = s.iris_cx;
  out.iris.ey = s.iris_cy;
  out.iris.er = s.iris_radius;
  out.iris.side = s.side;
  out.pupil.px = s.iris_cx;
  out.pupil.py = s.iris_cy;
  out.pupil.pr = s.pupil_radius;
  out.pupil.side = s.side;
  return out;
}

}  // namespace

SynthEye synth_eye(const SynthEyeSpec& spec, std::uint64_t seed) {
  validate_spec(spec);
  SynthEye out = truth_of(spec);
  out.image = RgbImage(spec.width, spec.height);
  fill(out.image, spec.skin);
  paint_eye(out.image, spec);
  add_noise(out.image, spec.noise_sigma, seed);
  out.frame = Frame::from_rgb(out.image);
  return out;
}

SynthFace synth_face(const SynthEyeSpec& left, const SynthEyeSpec& right,
                     std::uint64_t seed) {
  validate_spec(left);
  validate_spec(right);
  if (left.width != right.width || left.height != right.height) {
    throw Error(ErrorCode::InvalidSpec, "eyes of one face need one canvas");
  }
  SynthFace out;
  out.left = truth_of(left);
  out.right = truth_of(right);
  out.image = RgbImage(left.width, left.height);
  fill(out.image, left.skin);
  paint_eye(out.image, left);
  paint_eye(out.image, right);
  add_noise(out.image, left.noise_sigma, seed);
  out.frame = Frame::from_rgb(out.image);
  return out;
}

namespace {

Tone random_tone(SplitRng& rng, int luma_lo, int luma_hi, int satv_lo,
                 int satv_hi) {
  return {static_cast<std::uint8_t>(rng.uniform_int(luma_lo, luma_hi)),
          static_cast<std::uint8_t>(rng.uniform_int(satv_lo, satv_hi))};
}

void randomize_appearance(SynthEyeSpec& s, SplitRng& rng) {
  s.skin = random_tone(rng, 120, 170, 145, 160);
  s.sclera = random_tone(rng, 190, 235, 124, 132);
  s.iris = random_tone(rng, 50, 110, 135, 150);
  s.pupil = random_tone(rng, 8, 30, 126, 134);
  const double inner = s.iris_radius - 1.0;
  s.sclera_a = inner * rng.uniform(2.1, 2.6) + 1.0;
  s.sclera_b = inner + rng.uniform(0.5, 2.0);
}

}  // namespace

SynthEyeSpec random_eye_spec(std::uint64_t seed, SynthPreset preset) {
  SplitRng rng(seed);
  SynthEyeSpec s;
  s.width = 128;
  s.height = 80;
  s.preset = preset;
  s.noise_sigma = preset_sigma(preset);
  s.iris_radius = rng.uniform_int(7, 13);
  s.pupil_radius = rng.uniform_int(2, s.iris_radius - 4);
  s.iris_cx = s.width / 2 + rng.uniform_int(-4, 4);
  s.iris_cy = s.height / 2 + rng.uniform_int(-4, 4);
  randomize_appearance(s, rng);
  return s;
}

EyeRegion synth_roi(const SynthEyeSpec& spec, std::uint64_t seed,
                    int max_jitter) {
  SplitRng rng(seed ^ 0xA5A5A5A5A5A5A5A5ULL);
  const int side = std::max(
      EyeRegion::kMinExtent, static_cast<int>(std::lround(3.4 * spec.iris_radius)));
  const int cx = spec.iris_cx + rng.uniform_int(-max_jitter, max_jitter);
  const int cy = spec.iris_cy + rng.uniform_int(-max_jitter, max_jitter);
  EyeRegion roi{cx - side / 2, cy - side / 2, side, side, spec.side};
  roi.x = std::clamp(roi.x, 0, std::max(0, spec.width - side));
  roi.y = std::clamp(roi.y, 0, std::max(0, spec.height - side));
  roi.w = std::min(roi.w, spec.width - roi.x);
  roi.h = std::min(roi.h, spec.height - roi.y);
  return roi;
}

std::pair<SynthEyeSpec, SynthEyeSpec> random_face_specs(std::uint64_t seed,
                                                        SynthPreset preset,
                                                        int width, int height,
                                                        int eye_distance) {
  SplitRng rng(seed);
  SynthEyeSpec left;
  left.width = width;
  left.height = height;
  left.preset = preset;
  left.noise_sigma = preset_sigma(preset);
  left.iris_radius = rng.uniform_int(7, 11);
  left.pupil_radius = rng.uniform_int(2, left.iris_radius - 4);
  if (eye_distance <= 0) eye_distance = 10 * left.iris_radius;
  left.iris_cx = width / 2 - eye_distance / 2;
  left.iris_cy = height / 2 + rng.uniform_int(-3, 3);
  left.side = Side::Left;
  randomize_appearance(left, rng);

  SynthEyeSpec right = left;
  right.side = Side::Right;
  right.iris_cx = left.iris_cx + eye_distance;
  right.iris_cy = left.iris_cy + rng.uniform_int(-1, 1);
  return {left, right};
}

}  // namespace pupilscope
