#include "pupilscope/pupil.hpp"

#include <cmath>
#include <optional>
#include <string>

#include "pupilscope/error.hpp"

namespace pupilscope {

int distance_ring(int d2) noexcept {
  // round(sqrt(d2)) == k  <=>  k*k - k + 1 <= d2 <= k*k + k
  int k = static_cast<int>(std::sqrt(static_cast<double>(d2)));
  while (k * k > d2) --k;
  while ((k + 1) * (k + 1) <= d2) ++k;
  return d2 > k * k + k ? k + 1 : k;
}

RadialProfile radial_profile(const Frame& frame, int cx, int cy, int k_max) {
  if (k_max < 0) throw Error(ErrorCode::InvalidArgument, "k_max must be >= 0");
  const ChannelView luma = frame.luma();
  if (!fits(luma, cx, cy, k_max, k_max)) {
    throw Error(ErrorCode::OutOfBounds, "radial profile disk leaves the frame");
  }
  RadialProfile p;
  p.cx = cx;
  p.cy = cy;
  p.k_max = k_max;
  p.ring_sum.assign(static_cast<std::size_t>(k_max) + 1, 0);
  p.ring_count.assign(static_cast<std::size_t>(k_max) + 1, 0);
  const int limit = k_max * k_max + k_max;
  for (int dy = -k_max; dy <= k_max; ++dy) {
    const std::uint8_t* row = luma.row(cy + dy) + cx;
    for (int dx = -k_max; dx <= k_max; ++dx) {
      const int d2 = dx * dx + dy * dy;
      if (d2 > limit) continue;
      const int k = distance_ring(d2);
      p.ring_sum[k] += row[dx];
      ++p.ring_count[k];
    }
  }
  return p;
}

double gradient_score(const RadialProfile& profile, int k) {
  if (k < 1 || k + 1 > profile.k_max) {
    throw Error(ErrorCode::InvalidArgument,
                "candidate radius " + std::to_string(k) +
                    " needs rings k and k+1 inside the profile");
  }
  if (profile.ring_count[k] == 0 || profile.ring_count[k + 1] == 0) {
    throw Error(ErrorCode::EmptyRing, "empty ring in radial profile");
  }
  return profile.mean(k + 1) - profile.mean(k);
}

int default_pupil_neighborhood(int er) noexcept {
  return std::max(1, static_cast<int>(std::lround(er / 4.0)));
}

int max_pupil_radius(int er, int offset_x, int offset_y) noexcept {
  const double off = std::hypot(offset_x, offset_y);
  return static_cast<int>(std::floor(er - 2.5 - off));
}

PupilEstimate detect_pupil(const Frame& frame, const IrisEstimate& iris,
                           int neighborhood) {
  const int nb =
      neighborhood < 0 ? default_pupil_neighborhood(iris.er) : neighborhood;
  const ChannelView luma = frame.luma();

  std::optional<PupilEstimate> best;
  bool any_radius = false;
  bool any_center = false;
  for (int py = iris.ey - nb; py <= iris.ey + nb; ++py) {
    for (int px = iris.ex - nb; px <= iris.ex + nb; ++px) {
      const int k_hi = max_pupil_radius(iris.er, px - iris.ex, py - iris.ey);
      if (k_hi < 1) continue;
      any_radius = true;
      if (!fits(luma, px, py, k_hi + 1, k_hi + 1)) continue;
      any_center = true;
      // One profile pass serves every radius at this center.
      const RadialProfile profile = radial_profile(frame, px, py, k_hi + 1);
      for (int k = 1; k <= k_hi; ++k) {
        const double g = gradient_score(profile, k);
        // Centers arrive in raster order, so on equal g the earlier center
        // is kept unless the radius is smaller.
        if (!best || g > best->g || (g == best->g && k < best->pr)) {
          best = PupilEstimate{px, py, k, g, iris.side};
        }
      }
    }
  }
  if (!any_radius) {
    throw Error(ErrorCode::NoPupilContrast,
                "iris radius too small to host a pupil candidate");
  }
  if (!any_center) {
    throw Error(ErrorCode::OutOfBounds,
                "no pupil candidate center fits inside the frame");
  }
  if (best->g <= 0) {
    throw Error(ErrorCode::NoPupilContrast,
                "no candidate circle is darker than its exterior");
  }
  return *best;
}

}  // namespace pupilscope
