#pragma once

#include <array>
#include <cstdint>
#include <string_view>
#include <utility>
#include <vector>

#include "pupilscope/image.hpp"
#include "pupilscope/iris.hpp"
#include "pupilscope/pupil.hpp"

namespace pupilscope {

enum class SynthPreset : std::uint8_t { Clean, Noisy };

[[nodiscard]] SynthPreset parse_preset(std::string_view text);
[[nodiscard]] std::string_view preset_name(SynthPreset preset) noexcept;
/// Gaussian luma noise sigma of a preset: 0 (clean) or 8 (noisy).
[[nodiscard]] double preset_sigma(SynthPreset preset) noexcept;

struct Tone {
  std::uint8_t luma{128};
  std::uint8_t satv{128};
};

/// Neutral-U RGB whose luma/satv conversion hits `tone` (exactly when
/// representable, otherwise the nearest reachable pair).
[[nodiscard]] std::array<std::uint8_t, 3> tone_to_rgb(Tone tone);

struct Highlight {
  int x{0};
  int y{0};
  double radius{0.0};  // 0 paints a single pixel
  std::uint8_t intensity{255};
};

/// One rendered eye. Radii follow the detectors' conventions: the iris
/// covers pixels within distance iris_radius-1 of the center (the mask's
/// iris footprint) and the pupil covers pixels with
/// round(distance) <= pupil_radius.
struct SynthEyeSpec {
  int width{128};
  int height{80};
  Tone skin{150, 150};
  Tone sclera{225, 128};
  double sclera_a{20.0};  // horizontal semi-axis
  double sclera_b{9.0};   // vertical semi-axis
  int iris_cx{64};
  int iris_cy{40};
  int iris_radius{9};
  Tone iris{60, 140};
  int pupil_radius{4};
  Tone pupil{15, 130};
  double noise_sigma{0.0};
  std::vector<Highlight> highlights;
  SynthPreset preset{SynthPreset::Clean};
  Side side{Side::Left};
};

/// Throws InvalidSpec unless pupil fits strictly inside the iris, the iris
/// inside the sclera ellipse, and the ellipse inside the image.
void validate_spec(const SynthEyeSpec& spec);

struct SynthEye {
  RgbImage image;
  Frame frame;
  IrisEstimate iris;    // ground truth geometry (scores zero)
  PupilEstimate pupil;  // ground truth geometry (score zero)
};

/// Renders skin, sclera ellipse, iris disk, pupil disk and highlights, then
/// adds seeded Gaussian noise of spec.noise_sigma to all three channels.
/// Bit-identical for identical (spec, seed).
[[nodiscard]] SynthEye synth_eye(const SynthEyeSpec& spec, std::uint64_t seed);

struct SynthFace {
  RgbImage image;
  Frame frame;
  SynthEye left;   // geometry only; image/frame members are empty
  SynthEye right;
};

/// Two eyes on one canvas. Both specs must share width, height and skin;
/// noise uses the left spec's sigma.
[[nodiscard]] SynthFace synth_face(const SynthEyeSpec& left,
                                   const SynthEyeSpec& right,
                                   std::uint64_t seed);

/// Random single-eye configuration on a 128x80 canvas: iris radius 7..13,
/// pupil radius 2..iris-4, randomized tones and sclera shape.
[[nodiscard]] SynthEyeSpec random_eye_spec(std::uint64_t seed,
                                           SynthPreset preset);

/// Rough eye box of side round(3.4 * iris_radius) around the iris center,
/// shifted by up to +-max_jitter pixels per axis (seeded).
[[nodiscard]] EyeRegion synth_roi(const SynthEyeSpec& spec, std::uint64_t seed,
                                  int max_jitter = 3);

/// Random two-eye face on a width x height canvas with eyes `eye_distance`
/// apart (0: ten iris radii), equal radii, and rows within one pixel of
/// each other.
[[nodiscard]] std::pair<SynthEyeSpec, SynthEyeSpec> random_face_specs(
    std::uint64_t seed, SynthPreset preset, int width = 256, int height = 128,
    int eye_distance = 0);

/// Deterministic generator helpers shared with the tests: identical streams
/// on every platform for a given seed.
class SplitRng {
 public:
  explicit SplitRng(std::uint64_t seed) : state_(seed) {}
  std::uint64_t next() noexcept;
  double uniform() noexcept;  // [0, 1)
  int uniform_int(int lo, int hi) noexcept;  // inclusive
  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }
  double gaussian() noexcept;

 private:
  std::uint64_t state_;
};

}  // namespace pupilscope
