#pragma once

#include <cstdint>
#include <vector>

#include "pupilscope/image.hpp"
#include "pupilscope/iris.hpp"

namespace pupilscope {

/// Luma sums binned by rounded distance from a center pixel.
/// Ring k holds pixels with round(distance) == k; ring 0 is the center.
struct RadialProfile {
  int cx{0};
  int cy{0};
  int k_max{0};
  std::vector<std::int64_t> ring_sum;
  std::vector<int> ring_count;

  [[nodiscard]] double mean(int k) const {
    return static_cast<double>(ring_sum[k]) / ring_count[k];
  }
};

/// Rounded-distance ring of an integer squared distance (round half up).
[[nodiscard]] int distance_ring(int d2) noexcept;

/// One pass over the disk round(distance) <= k_max. Throws OutOfBounds.
[[nodiscard]] RadialProfile radial_profile(const Frame& frame, int cx, int cy,
                                           int k_max);

/// Outer ring mean minus perimeter ring mean for candidate radius k.
/// Positive when the circle is darker than its immediate exterior.
/// Throws EmptyRing, InvalidArgument (k outside [1, k_max-1]).
[[nodiscard]] double gradient_score(const RadialProfile& profile, int k);

struct PupilEstimate {
  int px{0};
  int py{0};
  int pr{0};
  double g{0};
  Side side{Side::Left};
};

/// Default "close neighborhood" half-size around the iris center.
[[nodiscard]] int default_pupil_neighborhood(int er) noexcept;

/// Largest candidate radius k at a center offset from the iris center such
/// that the outer comparison ring (distances below k+1.5) stays inside the
/// iris disk (distance <= er-1): floor(er - 2.5 - |offset|).
[[nodiscard]] int max_pupil_radius(int er, int offset_x, int offset_y) noexcept;

/// Maximize the gradient criterion over centers within `neighborhood` of
/// the iris center and radii 1..max_pupil_radius. Negative neighborhood
/// selects the default. Throws NoPupilContrast (best g <= 0 or no radius fits) and
/// OutOfBounds (no candidate center fits in the frame).
[[nodiscard]] PupilEstimate detect_pupil(const Frame& frame,
                                         const IrisEstimate& iris,
                                         int neighborhood = -1);

}  // namespace pupilscope
