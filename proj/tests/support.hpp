#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "pupilscope/pupilscope.hpp"

namespace testing_support {

namespace fs = std::filesystem;

/// Fresh empty directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::mt19937_64 rng(std::random_device{}());
    path_ = fs::temp_directory_path() /
            ("pupilscope_" + tag + "_" + std::to_string(rng()));
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  [[nodiscard]] const fs::path& path() const { return path_; }
  fs::path operator/(const std::string& name) const { return path_ / name; }

 private:
  fs::path path_;
};

inline void write_text(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

inline std::string read_text(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_pgm(const fs::path& p, int w, int h,
                      const std::vector<std::uint8_t>& gray) {
  std::ofstream out(p, std::ios::binary);
  out << "P5\n" << w << ' ' << h << "\n255\n";
  out.write(reinterpret_cast<const char*>(gray.data()),
            static_cast<std::streamsize>(gray.size()));
}

/// 24-bit bottom-up BMP; rgb is row-major top-down, 3 bytes per pixel.
inline void write_bmp24(const fs::path& p, int w, int h,
                        const std::vector<std::uint8_t>& rgb) {
  const int stride = (w * 3 + 3) & ~3;
  const std::uint32_t data_size = static_cast<std::uint32_t>(stride * h);
  std::vector<std::uint8_t> f(54 + data_size, 0);
  const auto put32 = [&](std::size_t at, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) f[at + i] = static_cast<std::uint8_t>(v >> (8 * i));
  };
  f[0] = 'B';
  f[1] = 'M';
  put32(2, 54 + data_size);
  put32(10, 54);
  put32(14, 40);
  put32(18, static_cast<std::uint32_t>(w));
  put32(22, static_cast<std::uint32_t>(h));
  f[26] = 1;
  f[28] = 24;
  put32(34, data_size);
  for (int y = 0; y < h; ++y) {
    const std::size_t row = 54 + static_cast<std::size_t>(h - 1 - y) * stride;
    for (int x = 0; x < w; ++x) {
      const std::size_t s = (static_cast<std::size_t>(y) * w + x) * 3;
      f[row + x * 3 + 0] = rgb[s + 2];
      f[row + x * 3 + 1] = rgb[s + 1];
      f[row + x * 3 + 2] = rgb[s + 0];
    }
  }
  std::ofstream out(p, std::ios::binary);
  out.write(reinterpret_cast<const char*>(f.data()), static_cast<std::streamsize>(f.size()));
}

/// Frame whose luma/satv are given per pixel.
inline pupilscope::Frame make_frame(
    int w, int h, const std::function<std::uint8_t(int, int)>& luma,
    const std::function<std::uint8_t(int, int)>& satv) {
  std::vector<std::uint8_t> l(static_cast<std::size_t>(w) * h);
  std::vector<std::uint8_t> s(l.size());
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      l[static_cast<std::size_t>(y) * w + x] = luma(x, y);
      s[static_cast<std::size_t>(y) * w + x] = satv(x, y);
    }
  }
  return {w, h, std::move(l), std::move(s)};
}

inline pupilscope::Frame constant_frame(int w, int h, std::uint8_t luma,
                                        std::uint8_t satv) {
  return make_frame(w, h, [=](int, int) { return luma; }, [=](int, int) { return satv; });
}

inline pupilscope::Frame random_frame(int w, int h, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> d(0, 255);
  return make_frame(
      w, h, [&](int, int) { return static_cast<std::uint8_t>(d(rng)); },
      [&](int, int) { return static_cast<std::uint8_t>(d(rng)); });
}

/// Relative comparison with an absolute floor for values near zero.
inline bool close(double a, double b, double rel = 1e-9) {
  return std::abs(a - b) <= rel * std::max(1.0, std::max(std::abs(a), std::abs(b)));
}

}  // namespace testing_support
