#include "pupilscope/mask.hpp"

#include <cmath>
#include <string>

#include "pupilscope/error.hpp"

namespace pupilscope {

CellLabel classify_cell(int dx, int dy, int r) noexcept {
  const int d2 = dx * dx + dy * dy;
  const int inner = r - 1;
  if (d2 <= inner * inner) {
    // ceil(sqrt(d2)) without floating point.
    int k = static_cast<int>(std::sqrt(static_cast<double>(d2)));
    while (k * k < d2) ++k;
    while (k > 0 && (k - 1) * (k - 1) >= d2) --k;
    return CellLabel::iris_ring(k + 1);
  }
  if (dx * dx + 4 * dy * dy <= 4 * inner * inner) return CellLabel::sclera();
  return CellLabel::skin();
}

MaskSet::MaskSet(int r) : r_(r) {
  if (r < 2) {
    throw Error(ErrorCode::RadiusTooSmall,
                "mask radius " + std::to_string(r) + " is below 2");
  }
  codes_.resize(static_cast<std::size_t>(grid_w()) * grid_h());
  iris_half_.assign(static_cast<std::size_t>(grid_h()), -1);
  sclera_half_.assign(static_cast<std::size_t>(grid_h()), -1);
  ring_counts_.assign(static_cast<std::size_t>(r) + 1, 0);

  for (int dy = -half_h(); dy <= half_h(); ++dy) {
    for (int dx = -half_w(); dx <= half_w(); ++dx) {
      const CellLabel lab = classify_cell(dx, dy, r);
      codes_[index(dx, dy)] = static_cast<std::int8_t>(lab.code());
      const int row = dy + half_h();
      switch (lab.kind) {
        case CellLabel::Kind::IrisRing:
          ++n_iris_;
          ++ring_counts_[static_cast<std::size_t>(lab.ring)];
          iris_half_[row] = std::max(iris_half_[row], std::abs(dx));
          sclera_half_[row] = std::max(sclera_half_[row], std::abs(dx));
          break;
        case CellLabel::Kind::Sclera:
          ++n_sclera_;
          sclera_half_[row] = std::max(sclera_half_[row], std::abs(dx));
          break;
        case CellLabel::Kind::Skin:
          ++n_skin_;
          break;
      }
    }
  }
}

CellLabel MaskSet::label(int dx, int dy) const noexcept {
  const int c = code(dx, dy);
  if (c > 0) return CellLabel::iris_ring(c);
  return c < 0 ? CellLabel::sclera() : CellLabel::skin();
}

double MaskSet::lum_weight(int dx, int dy) const noexcept {
  const int c = code(dx, dy);
  if (c > 0) return w_lum_iris();
  return c < 0 ? w_lum_sclera() : 0.0;
}

double MaskSet::sat_weight(int dx, int dy) const noexcept {
  return code(dx, dy) < 0 ? w_sat_sclera() : w_sat_iris_skin();
}

double MaskSet::sym_weight(int dx, int dy) const noexcept {
  return code(dx, dy) != 0 ? w_sym() : 0.0;
}

std::string MaskSet::render() const {
  std::string out;
  for (int dy = -half_h(); dy <= half_h(); ++dy) {
    for (int dx = -half_w(); dx <= half_w(); ++dx) {
      if (dx != -half_w()) out += ' ';
      const int c = code(dx, dy);
      out += c < 0 ? std::string("-") : std::to_string(c);
    }
    out += '\n';
  }
  return out;
}

MaskSet build_mask(int r) { return MaskSet(r); }

MaskBank::MaskBank(int r_min, int r_max) : r_min_(r_min), r_max_(r_max) {
  if (r_min < 2) {
    throw Error(ErrorCode::RadiusTooSmall,
                "mask radius " + std::to_string(r_min) + " is below 2");
  }
  if (r_max < r_min) {
    throw Error(ErrorCode::InvalidArgument, "r_max must be >= r_min");
  }
  masks_.reserve(static_cast<std::size_t>(r_max - r_min + 1));
  for (int r = r_min; r <= r_max; ++r) masks_.emplace_back(r);
}

const MaskSet& MaskBank::at(int r) const {
  if (!has(r)) {
    throw Error(ErrorCode::InvalidArgument,
                "radius " + std::to_string(r) + " not in mask bank");
  }
  return (*this)[r];
}

}  // namespace pupilscope
