#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "pupilscope/image.hpp"
#include "pupilscope/iris.hpp"
#include "pupilscope/pupil.hpp"

namespace pupilscope {

/// Circle in pixel-index coordinates: pixel (i, j) has its center at
/// (i, j) and belongs to the circle iff (i-cx)^2 + (j-cy)^2 <= r^2.
struct Circle {
  double cx{0};
  double cy{0};
  double r{0};
  bool operator==(const Circle&) const = default;
};

/// Disk covered by an iris estimate's mask (distance <= er - 1).
[[nodiscard]] Circle iris_circle(const IrisEstimate& iris) noexcept;
/// Disk of pixels with round(distance) <= pr.
[[nodiscard]] Circle pupil_circle(const PupilEstimate& pupil) noexcept;

// ---------------------------------------------------------------------------
// Annotations

enum class CircleKind : std::uint8_t { Iris, Pupil };

struct AnnotatedCircle {
  std::string annotator;
  Side side{Side::Left};
  CircleKind kind{CircleKind::Pupil};
  Circle circle;
};

struct EyeAnnotation {
  double lx{0};
  double ly{0};
  double rx{0};
  double ry{0};
  std::vector<AnnotatedCircle> circles;

  [[nodiscard]] double d_lr() const noexcept;
};

/// Parses BioID .eye text: "#LX LY RX RY" header, then four integers.
/// Throws MalformedAnnotation (bad syntax or coincident eyes).
[[nodiscard]] EyeAnnotation parse_eye_file(std::string_view text);
[[nodiscard]] EyeAnnotation load_eye_file(const std::filesystem::path& path);

struct BioIdSample {
  std::string id;  // e.g. "BioID_0000"
  std::filesystem::path image;
  EyeAnnotation annotation;

  [[nodiscard]] Frame load(long frame_index = 0) const;
};

struct BioIdDataset {
  std::vector<BioIdSample> samples;  // sorted by id
  std::vector<std::string> unpaired;  // file names without a partner
};

/// Pairs BioID_NNNN.pgm with BioID_NNNN.eye. Frames are decoded lazily
/// through BioIdSample::load. Throws EmptyDataset, MalformedAnnotation.
[[nodiscard]] BioIdDataset load_bioid(const std::filesystem::path& dir);

// ---------------------------------------------------------------------------
// Rough eye regions

enum class RoiMode : std::uint8_t { Centered, Jittered, File };

[[nodiscard]] RoiMode parse_roi_mode(std::string_view text);
[[nodiscard]] std::string_view roi_mode_name(RoiMode mode) noexcept;

struct RoiOptions {
  RoiMode mode{RoiMode::Centered};
  int pad{0};  // pixels added on every side of each box
  std::uint64_t jitter_seed{0};
};

struct RoiPair {
  EyeRegion left;
  EyeRegion right;
  bool clipped{false};
};

/// Sidecar table of externally supplied regions: sample_id,x,y,w,h,side.
class RoiTable {
 public:
  static RoiTable load(const std::filesystem::path& csv);
  static RoiTable parse(std::string_view text);

  void insert(const std::string& sample_id, const EyeRegion& roi);
  [[nodiscard]] std::optional<RoiPair> find(const std::string& sample_id) const;
  [[nodiscard]] std::size_t size() const noexcept { return rows_.size(); }

 private:
  std::map<std::string, std::pair<std::optional<EyeRegion>,
                                  std::optional<EyeRegion>>>
      rows_;
};

/// Centered: boxes of side round(0.8 d_lr) + 2 pad on the annotated centers.
/// Jittered: centers offset by a uniform integer in +-round(0.15 d_lr) per
/// axis, drawn from a generator seeded by (jitter_seed, sample_id) so the
/// result is independent of processing order. Boxes leaving the frame are
/// clipped and flagged; throws RegionOutsideFrame if a clipped box is
/// smaller than the 15x15 minimum. File mode is served by RoiTable.
[[nodiscard]] RoiPair roi_provider(const EyeAnnotation& annotation,
                                   const RoiOptions& options, int frame_w,
                                   int frame_h,
                                   std::string_view sample_id = {});

// ---------------------------------------------------------------------------
// Iris center metrics

struct RelativeErrors {
  double e_l{0};
  double e_r{0};
  double e{0};
};

struct Point2 {
  double x{0};
  double y{0};
};

[[nodiscard]] RelativeErrors relative_errors(Point2 det_l, Point2 det_r,
                                             const EyeAnnotation& ann);

struct AggregateErrors {
  double E_l{0};
  double E_r{0};
  double E{0};
};

/// Throws EmptyDataset.
[[nodiscard]] AggregateErrors aggregate_errors(
    const std::vector<RelativeErrors>& records);

/// Fraction of samples with max(e_l, e_r) <= T. Throws EmptyDataset.
[[nodiscard]] double tolerance_accuracy(
    const std::vector<RelativeErrors>& records, double tolerance);

// ---------------------------------------------------------------------------
// Pupil area metrics

struct AreaOverlap {
  std::int64_t annotated{0};  // A_a
  std::int64_t estimated{0};  // A_e
  std::int64_t common{0};     // A_c
};

/// Rasterized areas over the frame; pixels outside [0,w) x [0,h) are not
/// counted. Throws InvalidArgument for nonpositive radii.
[[nodiscard]] AreaOverlap circle_overlap(const Circle& annotated,
                                         const Circle& estimated, int frame_w,
                                         int frame_h);

struct Prf {
  double precision{0};
  double recall{0};
  double f1{0};
};

/// Throws DegenerateAnnotation when A_a == 0, InvalidArgument when A_e == 0.
[[nodiscard]] Prf pupil_prf(std::int64_t annotated, std::int64_t estimated,
                            std::int64_t common);
[[nodiscard]] Prf pupil_prf(const AreaOverlap& overlap);

struct Agreement {
  Prf mean;
  Circle consensus;
  std::size_t pairs{0};
};

/// Mean pupil_prf over ordered annotator pairs, plus the mean-parameter
/// consensus circle. Throws TooFewAnnotators.
[[nodiscard]] Agreement inter_annotator(const std::vector<Circle>& circles,
                                        int frame_w, int frame_h);

/// 1 - |d_est - d_ann| / d_ann for diameters.
[[nodiscard]] double diameter_accuracy(double estimated_diameter,
                                       double annotated_diameter);

}  // namespace pupilscope
