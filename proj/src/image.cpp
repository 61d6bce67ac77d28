#include "pupilscope/image.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <iterator>
#include <string>

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

namespace pupilscope {

std::string_view side_name(Side side) noexcept {
  return side == Side::Left ? "left" : "right";
}

Side parse_side(std::string_view text) {
  if (text == "left" || text == "L" || text == "l") return Side::Left;
  if (text == "right" || text == "R" || text == "r") return Side::Right;
  throw Error(ErrorCode::InvalidArgument,
              "unknown eye side '" + std::string(text) + "'");
}

LumaSatv to_luma_satv(std::uint8_t r, std::uint8_t g, std::uint8_t b) noexcept {
  constexpr std::int64_t kScale = 1'000'000;
  const auto fixed_round = [](std::int64_t scaled) -> std::uint8_t {
    const std::int64_t shifted = scaled + kScale / 2;
    if (shifted < 0) return 0;
    return static_cast<std::uint8_t>(std::min<std::int64_t>(shifted / kScale, 255));
  };
  const std::int64_t y = 299'000LL * r + 587'000LL * g + 114'000LL * b;
  const std::int64_t v =
      500'000LL * r - 418'688LL * g - 81'312LL * b + 128 * kScale;
  return {fixed_round(y), fixed_round(v)};
}

Frame::Frame(int width, int height, std::vector<std::uint8_t> luma,
             std::vector<std::uint8_t> satv, long frame_index)
    : width_(width),
      height_(height),
      luma_(std::move(luma)),
      satv_(std::move(satv)),
      frame_index_(frame_index) {
  const auto n = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  if (width <= 0 || height <= 0 || luma_.size() != n || satv_.size() != n) {
    throw Error(ErrorCode::InvalidArgument,
                "frame planes must both hold width*height samples");
  }
}

Frame Frame::from_rgb(const RgbImage& image, long frame_index) {
  const auto n = static_cast<std::size_t>(image.width) * image.height;
  std::vector<std::uint8_t> luma(n);
  std::vector<std::uint8_t> satv(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto* p = image.rgb.data() + 3 * i;
    const auto ls = to_luma_satv(p[0], p[1], p[2]);
    luma[i] = ls.luma;
    satv[i] = ls.satv;
  }
  return {image.width, image.height, std::move(luma), std::move(satv),
          frame_index};
}

Frame Frame::from_gray(int width, int height, std::vector<std::uint8_t> gray,
                       long frame_index) {
  std::vector<std::uint8_t> satv(gray.size(), 128);
  return {width, height, std::move(gray), std::move(satv), frame_index};
}

Frame Frame::with_index(long index) const {
  Frame copy = *this;
  copy.frame_index_ = index;
  return copy;
}

namespace {

enum class Container { Pgm, Png, Bmp };

Container sniff(const std::vector<std::uint8_t>& bytes,
                const std::filesystem::path& path) {
  static constexpr std::array<std::uint8_t, 8> kPngMagic = {
      0x89, 'P', 'N', 'G', 0x0D, 0x0A, 0x1A, 0x0A};
  if (bytes.size() >= 2 && bytes[0] == 'P' && bytes[1] == '5') {
    return Container::Pgm;
  }
  if (bytes.size() >= kPngMagic.size() &&
      std::equal(kPngMagic.begin(), kPngMagic.end(), bytes.begin())) {
    return Container::Png;
  }
  if (bytes.size() >= 30 && bytes[0] == 'B' && bytes[1] == 'M') {
    const int bits = bytes[28] | (bytes[29] << 8);
    if (bits != 24) {
      throw Error(ErrorCode::UnsupportedFormat,
                  path.string() + ": only 24-bit BMP is supported");
    }
    return Container::Bmp;
  }
  throw Error(ErrorCode::UnsupportedFormat,
              path.string() + ": not a P5 PGM, PNG or BMP file");
}

}  // namespace

Frame load_frame(const std::filesystem::path& path, long frame_index) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::UnreadableFile, path.string() + ": cannot open");
  }
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  sniff(bytes, path);

  const cv::Mat decoded = cv::imdecode(bytes, cv::IMREAD_UNCHANGED);
  if (decoded.empty()) {
    throw Error(ErrorCode::UnreadableFile, path.string() + ": decode failed");
  }
  if (decoded.depth() != CV_8U) {
    throw Error(ErrorCode::UnsupportedFormat,
                path.string() + ": only 8-bit samples are supported");
  }

  const int w = decoded.cols;
  const int h = decoded.rows;
  const int channels = decoded.channels();
  if (channels == 1) {
    std::vector<std::uint8_t> gray(static_cast<std::size_t>(w) * h);
    for (int y = 0; y < h; ++y) {
      const auto* src = decoded.ptr<std::uint8_t>(y);
      std::copy(src, src + w, gray.begin() + static_cast<std::ptrdiff_t>(y) * w);
    }
    return Frame::from_gray(w, h, std::move(gray), frame_index);
  }
  if (channels != 3 && channels != 4) {
    throw Error(ErrorCode::UnsupportedFormat,
                path.string() + ": unexpected channel count");
  }
  RgbImage rgb(w, h);
  for (int y = 0; y < h; ++y) {
    const auto* src = decoded.ptr<std::uint8_t>(y);
    for (int x = 0; x < w; ++x) {
      const auto* bgr = src + static_cast<std::ptrdiff_t>(x) * channels;
      auto* dst = rgb.px(x, y);
      dst[0] = bgr[2];
      dst[1] = bgr[1];
      dst[2] = bgr[0];
    }
  }
  return Frame::from_rgb(rgb, frame_index);
}

void write_png(const std::filesystem::path& path, const RgbImage& image) {
  cv::Mat bgr(image.height, image.width, CV_8UC3);
  for (int y = 0; y < image.height; ++y) {
    auto* dst = bgr.ptr<std::uint8_t>(y);
    for (int x = 0; x < image.width; ++x) {
      const auto* p = image.px(x, y);
      dst[3 * x + 0] = p[2];
      dst[3 * x + 1] = p[1];
      dst[3 * x + 2] = p[0];
    }
  }
  bool ok = false;
  try {
    ok = cv::imwrite(path.string(), bgr);
  } catch (const cv::Exception& e) {
    throw Error(ErrorCode::IoError, path.string() + ": " + e.what());
  }
  if (!ok) throw Error(ErrorCode::IoError, path.string() + ": write failed");
}

void validate_region(const EyeRegion& roi, const Frame& frame) {
  if (!roi.inside(frame.width(), frame.height())) {
    throw Error(ErrorCode::OutOfBounds, "eye region lies outside the frame");
  }
  if (roi.w < EyeRegion::kMinExtent || roi.h < EyeRegion::kMinExtent) {
    throw Error(ErrorCode::OutOfBounds, "eye region smaller than 15x15");
  }
}

bool fits(const ChannelView& channel, int cx, int cy, int half_w,
          int half_h) noexcept {
  return cx - half_w >= 0 && cy - half_h >= 0 &&
         cx + half_w < channel.width() && cy + half_h < channel.height();
}

RegionView region_view(ChannelView channel, int cx, int cy, int half_w,
                       int half_h) {
  if (!fits(channel, cx, cy, half_w, half_h)) {
    throw Error(ErrorCode::OutOfBounds,
                "candidate center cannot host a mask of this size");
  }
  return {channel, cx, cy, half_w, half_h};
}

}  // namespace pupilscope
