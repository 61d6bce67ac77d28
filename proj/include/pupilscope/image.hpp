#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "pupilscope/error.hpp"

namespace pupilscope {

enum class Side : std::uint8_t { Left, Right };

std::string_view side_name(Side side) noexcept;
Side parse_side(std::string_view text);

/// Luma (BT.601 full range) and V-plane saturation proxy for one RGB triple.
struct LumaSatv {
  std::uint8_t luma{0};
  std::uint8_t satv{0};
  bool operator==(const LumaSatv&) const = default;
};

/// Fixed-point BT.601: coefficients scaled by 1e6, round half up, clamp.
/// Bit-exact on every platform.
[[nodiscard]] LumaSatv to_luma_satv(std::uint8_t r, std::uint8_t g,
                                    std::uint8_t b) noexcept;

/// Read-only 8-bit plane, row-major.
class ChannelView {
 public:
  ChannelView() = default;
  ChannelView(std::span<const std::uint8_t> data, int width, int height)
      : data_(data), width_(width), height_(height) {}

  [[nodiscard]] int width() const noexcept { return width_; }
  [[nodiscard]] int height() const noexcept { return height_; }
  [[nodiscard]] std::uint8_t at(int x, int y) const noexcept {
    return data_[static_cast<std::size_t>(y) * width_ + x];
  }
  [[nodiscard]] const std::uint8_t* row(int y) const noexcept {
    return data_.data() + static_cast<std::size_t>(y) * width_;
  }
  [[nodiscard]] bool contains(int x, int y) const noexcept {
    return x >= 0 && y >= 0 && x < width_ && y < height_;
  }

 private:
  std::span<const std::uint8_t> data_{};
  int width_{0};
  int height_{0};
};

/// Interleaved 8-bit RGB raster. Used for synthesis and PNG output.
struct RgbImage {
  int width{0};
  int height{0};
  std::vector<std::uint8_t> rgb;  // 3 bytes per pixel

  RgbImage() = default;
  RgbImage(int w, int h)
      : width(w), height(h), rgb(static_cast<std::size_t>(w) * h * 3, 0) {}

  [[nodiscard]] std::uint8_t* px(int x, int y) noexcept {
    return rgb.data() + (static_cast<std::size_t>(y) * width + x) * 3;
  }
  [[nodiscard]] const std::uint8_t* px(int x, int y) const noexcept {
    return rgb.data() + (static_cast<std::size_t>(y) * width + x) * 3;
  }
};

/// Decoded image reduced to the two planes the detectors use.
/// Immutable once built; safe to share across threads.
class Frame {
 public:
  Frame() = default;
  Frame(int width, int height, std::vector<std::uint8_t> luma,
        std::vector<std::uint8_t> satv, long frame_index = 0);

  static Frame from_rgb(const RgbImage& image, long frame_index = 0);
  /// Grayscale input: satv is neutral (128) everywhere.
  static Frame from_gray(int width, int height, std::vector<std::uint8_t> gray,
                         long frame_index = 0);

  [[nodiscard]] int width() const noexcept { return width_; }
  [[nodiscard]] int height() const noexcept { return height_; }
  [[nodiscard]] long frame_index() const noexcept { return frame_index_; }
  [[nodiscard]] ChannelView luma() const noexcept {
    return {luma_, width_, height_};
  }
  [[nodiscard]] ChannelView satv() const noexcept {
    return {satv_, width_, height_};
  }
  [[nodiscard]] const std::vector<std::uint8_t>& luma_data() const noexcept {
    return luma_;
  }
  [[nodiscard]] const std::vector<std::uint8_t>& satv_data() const noexcept {
    return satv_;
  }
  [[nodiscard]] Frame with_index(long index) const;

  bool operator==(const Frame& other) const noexcept {
    return width_ == other.width_ && height_ == other.height_ &&
           luma_ == other.luma_ && satv_ == other.satv_;
  }

 private:
  int width_{0};
  int height_{0};
  std::vector<std::uint8_t> luma_;
  std::vector<std::uint8_t> satv_;
  long frame_index_{0};
};

/// Binary PGM (P5), 8-bit PNG (gray/RGB/RGBA) or 24-bit BMP.
/// Throws UnreadableFile or UnsupportedFormat.
[[nodiscard]] Frame load_frame(const std::filesystem::path& path,
                               long frame_index = 0);

/// Throws IoError.
void write_png(const std::filesystem::path& path, const RgbImage& image);

/// Rough eye area in which iris centers are searched.
struct EyeRegion {
  int x{0};
  int y{0};
  int w{0};
  int h{0};
  Side side{Side::Left};

  static constexpr int kMinExtent = 15;

  [[nodiscard]] bool inside(int width, int height) const noexcept {
    return x >= 0 && y >= 0 && w > 0 && h > 0 && x + w <= width &&
           y + h <= height;
  }
  [[nodiscard]] bool contains(int px, int py) const noexcept {
    return px >= x && py >= y && px < x + w && py < y + h;
  }
  bool operator==(const EyeRegion&) const = default;
};

/// Throws OutOfBounds when the region is outside the frame or too small.
void validate_region(const EyeRegion& roi, const Frame& frame);

/// Window into a channel centered on a candidate, with horizontally
/// mirrored access about the center column.
class RegionView {
 public:
  [[nodiscard]] std::uint8_t at(int dx, int dy) const noexcept {
    return channel_.at(cx_ + dx, cy_ + dy);
  }
  [[nodiscard]] std::uint8_t mirrored(int dx, int dy) const noexcept {
    return channel_.at(cx_ - dx, cy_ + dy);
  }
  [[nodiscard]] int cx() const noexcept { return cx_; }
  [[nodiscard]] int cy() const noexcept { return cy_; }
  [[nodiscard]] int half_w() const noexcept { return half_w_; }
  [[nodiscard]] int half_h() const noexcept { return half_h_; }

 private:
  friend RegionView region_view(ChannelView, int, int, int, int);
  RegionView(ChannelView channel, int cx, int cy, int half_w, int half_h)
      : channel_(channel), cx_(cx), cy_(cy), half_w_(half_w), half_h_(half_h) {}

  ChannelView channel_;
  int cx_;
  int cy_;
  int half_w_;
  int half_h_;
};

[[nodiscard]] bool fits(const ChannelView& channel, int cx, int cy, int half_w,
                        int half_h) noexcept;

/// Throws OutOfBounds if [cx±half_w] × [cy±half_h] leaves the channel.
[[nodiscard]] RegionView region_view(ChannelView channel, int cx, int cy,
                                     int half_w, int half_h);

}  // namespace pupilscope
