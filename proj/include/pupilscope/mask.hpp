#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace pupilscope {

/// Label of one mask cell: a distance ring of the iris disk, the sclera
/// collar, or the skin border.
struct CellLabel {
  enum class Kind : std::uint8_t { IrisRing, Sclera, Skin };
  Kind kind{Kind::Skin};
  int ring{0};  // 1..r for IrisRing, 0 otherwise

  static constexpr CellLabel iris_ring(int k) { return {Kind::IrisRing, k}; }
  static constexpr CellLabel sclera() { return {Kind::Sclera, 0}; }
  static constexpr CellLabel skin() { return {Kind::Skin, 0}; }

  /// Digit for rings, -1 for sclera, 0 for skin.
  [[nodiscard]] constexpr int code() const noexcept {
    return kind == Kind::IrisRing ? ring : (kind == Kind::Sclera ? -1 : 0);
  }
  bool operator==(const CellLabel&) const = default;
};

/// Iris cells are those within distance r-1 of the center and carry
/// ring = ceil(distance) + 1. The sclera is the rest of the 2:1 ellipse
/// with semi-axes 2(r-1) and r-1. Everything else in the grid is skin.
/// Precondition: |dx| <= 2r+3, |dy| <= r-1.
[[nodiscard]] CellLabel classify_cell(int dx, int dy, int r) noexcept;

/// Three-region mask for one iris radius. The grid is (2r-1) rows by
/// (4r+7) columns centered on the candidate pixel.
class MaskSet {
 public:
  explicit MaskSet(int r);

  [[nodiscard]] int radius() const noexcept { return r_; }
  [[nodiscard]] int grid_w() const noexcept { return 4 * r_ + 7; }
  [[nodiscard]] int grid_h() const noexcept { return 2 * r_ - 1; }
  [[nodiscard]] int half_w() const noexcept { return 2 * r_ + 3; }
  [[nodiscard]] int half_h() const noexcept { return r_ - 1; }

  [[nodiscard]] CellLabel label(int dx, int dy) const noexcept;
  /// Fig.-style code (ring digit, -1 sclera, 0 skin) at a grid offset.
  [[nodiscard]] std::int8_t code(int dx, int dy) const noexcept {
    return codes_[index(dx, dy)];
  }
  [[nodiscard]] const std::vector<std::int8_t>& codes() const noexcept {
    return codes_;
  }

  /// Per-row extents: iris cells satisfy |dx| <= iris_half(dy) (none when
  /// negative); sclera cells satisfy iris_half(dy) < |dx| <= sclera_half(dy).
  [[nodiscard]] int iris_half(int dy) const noexcept {
    return iris_half_[dy + half_h()];
  }
  [[nodiscard]] int sclera_half(int dy) const noexcept {
    return sclera_half_[dy + half_h()];
  }

  [[nodiscard]] int n_iris() const noexcept { return n_iris_; }
  [[nodiscard]] int n_sclera() const noexcept { return n_sclera_; }
  [[nodiscard]] int n_skin() const noexcept { return n_skin_; }
  [[nodiscard]] int ring_count(int k) const noexcept { return ring_counts_[k]; }

  // Region weights. Each criterion's mask sums to zero over the grid.
  [[nodiscard]] double w_lum_iris() const noexcept { return -1.0 / n_iris_; }
  [[nodiscard]] double w_lum_sclera() const noexcept { return 1.0 / n_sclera_; }
  [[nodiscard]] double w_sat_iris_skin() const noexcept {
    return 1.0 / (n_iris_ + n_skin_);
  }
  [[nodiscard]] double w_sat_sclera() const noexcept { return -1.0 / n_sclera_; }
  [[nodiscard]] double w_sym() const noexcept {
    return -1.0 / (n_iris_ + n_sclera_);
  }

  /// Per-cell weights of each criterion, for reference computations.
  [[nodiscard]] double lum_weight(int dx, int dy) const noexcept;
  [[nodiscard]] double sat_weight(int dx, int dy) const noexcept;
  [[nodiscard]] double sym_weight(int dx, int dy) const noexcept;

  /// Rows of space-separated codes, '-' for sclera.
  [[nodiscard]] std::string render() const;

 private:
  [[nodiscard]] std::size_t index(int dx, int dy) const noexcept {
    return static_cast<std::size_t>(dy + half_h()) * grid_w() +
           static_cast<std::size_t>(dx + half_w());
  }

  int r_;
  std::vector<std::int8_t> codes_;
  std::vector<int> iris_half_;
  std::vector<int> sclera_half_;
  std::vector<int> ring_counts_;  // index 1..r
  int n_iris_{0};
  int n_sclera_{0};
  int n_skin_{0};
};

/// Throws RadiusTooSmall for r < 2.
[[nodiscard]] MaskSet build_mask(int r);

/// Masks for a contiguous radius range, built once and then read-only.
class MaskBank {
 public:
  MaskBank(int r_min, int r_max);

  [[nodiscard]] int r_min() const noexcept { return r_min_; }
  [[nodiscard]] int r_max() const noexcept { return r_max_; }
  [[nodiscard]] std::size_t size() const noexcept { return masks_.size(); }
  [[nodiscard]] bool has(int r) const noexcept {
    return r >= r_min_ && r <= r_max_;
  }
  /// Throws InvalidArgument outside [r_min, r_max].
  [[nodiscard]] const MaskSet& at(int r) const;
  [[nodiscard]] const MaskSet& operator[](int r) const {
    return masks_[static_cast<std::size_t>(r - r_min_)];
  }

 private:
  int r_min_;
  int r_max_;
  std::vector<MaskSet> masks_;
};

}  // namespace pupilscope
