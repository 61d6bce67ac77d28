#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "pupilscope/image.hpp"
#include "pupilscope/mask.hpp"

namespace pupilscope {

/// Region sums gathered in one pass over a mask footprint.
struct ScoreAccumulators {
  std::vector<std::int64_t> lum_ring_sum;  // index k = 1..r, [0] unused
  std::vector<int> lum_ring_count;         // index k = 1..r, [0] unused
  std::int64_t lum_sclera_sum{0};
  std::int64_t sat_iris_sum{0};
  std::int64_t sat_skin_sum{0};
  std::int64_t sat_sclera_sum{0};
  /// Sum of |L - L^H| + |S - S^H| over iris and sclera cells.
  std::int64_t sym_sum{0};

  [[nodiscard]] std::int64_t lum_iris_sum() const noexcept;
};

/// Work counters filled by the instrumented accumulation path.
struct OpCounts {
  std::int64_t cell_visits{0};
  std::int64_t multiplications{0};
  bool record_map{false};  // fill visit_map for the last accumulation
  std::vector<std::int32_t> visit_map;  // row-major over the mask grid
};

/// Single pass over the (2r-1) x (4r+7) footprint centered at (cx, cy).
/// Mirror partners are visited together, so each cell is read once and
/// the symmetry difference is shared by the pair. Throws OutOfBounds.
[[nodiscard]] ScoreAccumulators accumulate(const Frame& frame, int cx, int cy,
                                           const MaskSet& mask,
                                           OpCounts* counts = nullptr);

/// Same as above, reusing `out`'s storage. `out` is fully overwritten.
void accumulate_into(const Frame& frame, int cx, int cy, const MaskSet& mask,
                     ScoreAccumulators& out, OpCounts* counts = nullptr);

// Region sums are normalized by division by the region cell counts, which
// is the inner product with the mask's unit-mass weights. Exact integer sums
// divided once keep uniform regions at exactly zero.
[[nodiscard]] double luminosity_score(const ScoreAccumulators& acc,
                                      const MaskSet& mask,
                                      OpCounts* counts = nullptr);
[[nodiscard]] double saturation_score(const ScoreAccumulators& acc,
                                      const MaskSet& mask,
                                      OpCounts* counts = nullptr);
[[nodiscard]] double symmetry_score(const ScoreAccumulators& acc,
                                    const MaskSet& mask,
                                    OpCounts* counts = nullptr);
[[nodiscard]] constexpr double total_score(double l, double s,
                                           double h) noexcept {
  return l + s + h;
}

struct CandidateScore {
  double l{0};
  double s{0};
  double h{0};
  double c{0};
};

/// Accumulate and score one (center, radius) candidate.
[[nodiscard]] CandidateScore score_candidate(const Frame& frame, int cx, int cy,
                                             const MaskSet& mask,
                                             OpCounts* counts = nullptr);

struct IrisEstimate {
  int ex{0};
  int ey{0};
  int er{0};
  double l{0};
  double s{0};
  double h{0};
  double c{0};
  Side side{Side::Left};
};

/// Strict total order used for the argmax: higher score first, then
/// smaller radius, then raster order of the center.
[[nodiscard]] bool iris_better(const IrisEstimate& a,
                               const IrisEstimate& b) noexcept;

/// Default radius search range for a rough eye box of width roi_w:
/// [max(2, round(0.08 w)), round(0.35 w)], widened so r_max >= r_min.
[[nodiscard]] std::pair<int, int> default_radius_range(int roi_w) noexcept;

struct IrisSearchOptions {
  int r_min{0};  // 0 selects the default policy
  int r_max{0};
  int stride{1};
  int workers{1};
};

/// Exhaustive search over every center of `roi` (at the configured
/// stride) and every radius in range whose footprint fits in the frame.
/// Throws NoValidCandidate, OutOfBounds, RadiusTooSmall.
[[nodiscard]] IrisEstimate detect_iris(const Frame& frame, const EyeRegion& roi,
                                       const IrisSearchOptions& options = {});

[[nodiscard]] IrisEstimate detect_iris(const Frame& frame, const EyeRegion& roi,
                                       int r_min, int r_max);

/// Search with a prebuilt bank; radii outside the bank are ignored.
[[nodiscard]] IrisEstimate detect_iris(const Frame& frame, const EyeRegion& roi,
                                       const MaskBank& bank, int stride = 1,
                                       int workers = 1);

}  // namespace pupilscope
