#pragma once

#include <optional>
#include <string>

#include "pupilscope/iris.hpp"
#include "pupilscope/pupil.hpp"

namespace pupilscope {

/// Detections for one frame of a sequence.
struct FrameResult {
  long frame_index{0};
  std::string frame_id;
  std::optional<IrisEstimate> left;
  std::optional<IrisEstimate> right;
  std::optional<PupilEstimate> left_pupil;
  std::optional<PupilEstimate> right_pupil;
  double confidence{0.0};
};

/// Left/right dissimilarity |l - r| / max(l, r). Throws BothZero.
[[nodiscard]] double equality_dissimilarity(double l, double r);

/// 1 - |l - r| / max(l, r): one at equality, zero at maximal disparity.
/// Throws BothZero.
[[nodiscard]] double equality_factor(double l, double r);

/// Product of the rectified iris scores and the radius, iris-row and
/// pupil-row equality factors. A BothZero factor makes the product zero.
[[nodiscard]] double confidence(const IrisEstimate& left,
                                const IrisEstimate& right,
                                const PupilEstimate& left_pupil,
                                const PupilEstimate& right_pupil);

/// Zero when any of the four detections is missing.
[[nodiscard]] double confidence(const FrameResult& result);

/// Running maximum of confidence within the current window.
struct BestFrameState {
  std::optional<FrameResult> best;
  long window_id{0};
  long window_start{0};  // ordinal of the first frame in the window
  long frames_seen{0};
  long window_length{300};
};

/// Replaces the best frame iff none is held or the new confidence is
/// strictly greater.
[[nodiscard]] BestFrameState update_best(BestFrameState state,
                                         FrameResult result);

/// Clears the best frame and opens the next window.
[[nodiscard]] BestFrameState reset(BestFrameState state);

/// Summary of one closed window.
struct WindowReport {
  long window_id{0};
  long window_start{0};
  long frames{0};
  /// Empty when no frame in the window had positive confidence.
  std::optional<FrameResult> best;
  [[nodiscard]] bool no_confident_frame() const noexcept { return !best; }
};

/// Streaming front end over BestFrameState: closes a window when it is
/// full, on tracking loss, or at end of input.
class WindowedSelector {
 public:
  explicit WindowedSelector(long window_length = 300);

  /// Folds one result in; returns the report if the window just filled.
  std::optional<WindowReport> push(FrameResult result);
  /// Tracking lost: report the partial window (if any frames) and reset.
  std::optional<WindowReport> tracking_lost();
  /// End of input.
  std::optional<WindowReport> finish() { return tracking_lost(); }

  [[nodiscard]] const BestFrameState& state() const noexcept { return state_; }

 private:
  WindowReport close();
  BestFrameState state_;
};

}  // namespace pupilscope
