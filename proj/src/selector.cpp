#include "pupilscope/selector.hpp"

#include <algorithm>
#include <cmath>

#include "pupilscope/error.hpp"

namespace pupilscope {

double equality_dissimilarity(double l, double r) {
  const double m = std::max(l, r);
  if (m <= 0.0) {
    throw Error(ErrorCode::BothZero, "equality factor undefined for (0, 0)");
  }
  return std::abs(l - r) / m;
}

double equality_factor(double l, double r) {
  return 1.0 - equality_dissimilarity(l, r);
}

double confidence(const IrisEstimate& left, const IrisEstimate& right,
                  const PupilEstimate& left_pupil,
                  const PupilEstimate& right_pupil) {
  double product = std::max(left.c, 0.0) * std::max(right.c, 0.0);
  try {
    product *= equality_factor(left.er, right.er);
    product *= equality_factor(left.ey, right.ey);
    product *= equality_factor(left_pupil.py, right_pupil.py);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::BothZero) throw;
    return 0.0;
  }
  return std::isfinite(product) ? std::max(product, 0.0) : 0.0;
}

double confidence(const FrameResult& result) {
  if (!result.left || !result.right || !result.left_pupil ||
      !result.right_pupil) {
    return 0.0;
  }
  return confidence(*result.left, *result.right, *result.left_pupil,
                    *result.right_pupil);
}

BestFrameState update_best(BestFrameState state, FrameResult result) {
  ++state.frames_seen;
  if (!state.best || result.confidence > state.best->confidence) {
    state.best = std::move(result);
  }
  return state;
}

BestFrameState reset(BestFrameState state) {
  state.best.reset();
  state.window_start += state.frames_seen;
  state.frames_seen = 0;
  ++state.window_id;
  return state;
}

WindowedSelector::WindowedSelector(long window_length) {
  if (window_length < 1) {
    throw Error(ErrorCode::InvalidArgument, "window length must be >= 1");
  }
  state_.window_length = window_length;
}

WindowReport WindowedSelector::close() {
  WindowReport report;
  report.window_id = state_.window_id;
  report.window_start = state_.window_start;
  report.frames = state_.frames_seen;
  if (state_.best && state_.best->confidence > 0.0) report.best = state_.best;
  state_ = reset(std::move(state_));
  return report;
}

std::optional<WindowReport> WindowedSelector::push(FrameResult result) {
  state_ = update_best(std::move(state_), std::move(result));
  if (state_.frames_seen >= state_.window_length) return close();
  return std::nullopt;
}

std::optional<WindowReport> WindowedSelector::tracking_lost() {
  if (state_.frames_seen == 0) return std::nullopt;
  return close();
}

}  // namespace pupilscope
