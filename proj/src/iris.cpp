#include "pupilscope/iris.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numeric>
#include <optional>
#include <thread>

#include "pupilscope/error.hpp"

namespace pupilscope {

std::int64_t ScoreAccumulators::lum_iris_sum() const noexcept {
  return std::accumulate(lum_ring_sum.begin(), lum_ring_sum.end(),
                         std::int64_t{0});
}

namespace {

// Tallies every cell read into `counts` when kCount is set; the plain
// instantiation carries no bookkeeping.
template <bool kCount>
void accumulate_impl(const Frame& frame, int cx, int cy, const MaskSet& mask,
                     ScoreAccumulators& out, OpCounts* counts) {
  const int hw = mask.half_w();
  const int hh = mask.half_h();
  const int r = mask.radius();
  const ChannelView luma = frame.luma();
  const ChannelView satv = frame.satv();
  if (!fits(luma, cx, cy, hw, hh)) {
    throw Error(ErrorCode::OutOfBounds,
                "mask footprint leaves the frame at the candidate center");
  }

  out.lum_ring_sum.assign(static_cast<std::size_t>(r) + 1, 0);
  out.lum_ring_count.resize(static_cast<std::size_t>(r) + 1);
  out.lum_ring_count[0] = 0;
  for (int k = 1; k <= r; ++k) out.lum_ring_count[k] = mask.ring_count(k);

  std::int64_t* ring = out.lum_ring_sum.data();
  std::int64_t lum_sclera = 0;
  std::int64_t sat_iris = 0;
  std::int64_t sat_skin = 0;
  std::int64_t sat_sclera = 0;
  std::int64_t sym_half = 0;

  const std::int8_t* codes = mask.codes().data();
  const int gw = mask.grid_w();
  std::int32_t* map = nullptr;
  if constexpr (kCount) {
    if (counts->record_map) {
      counts->visit_map.assign(static_cast<std::size_t>(mask.grid_h()) * gw, 0);
      map = counts->visit_map.data();
    }
  }
  const auto visit = [&](int dx, int dy) {
    if constexpr (kCount) {
      ++counts->cell_visits;
      if (map != nullptr) ++map[static_cast<std::ptrdiff_t>(dy + hh) * gw + dx + hw];
    }
  };

  for (int dy = -hh; dy <= hh; ++dy) {
    const std::uint8_t* L = luma.row(cy + dy) + cx;
    const std::uint8_t* S = satv.row(cy + dy) + cx;
    const std::int8_t* code = codes + static_cast<std::ptrdiff_t>(dy + hh) * gw + hw;
    const int ih = mask.iris_half(dy);
    const int sh = mask.sclera_half(dy);

    // Center column: its own mirror, so no symmetry contribution.
    visit(0, dy);
    if (code[0] > 0) {
      ring[code[0]] += L[0];
      sat_iris += S[0];
    } else if (code[0] < 0) {
      lum_sclera += L[0];
      sat_sclera += S[0];
    } else {
      sat_skin += S[0];
    }

    int dx = 1;
    for (; dx <= ih; ++dx) {
      visit(dx, dy);
      visit(-dx, dy);
      const int a = L[dx], b = L[-dx], sa = S[dx], sb = S[-dx];
      ring[code[dx]] += a + b;
      sat_iris += sa + sb;
      sym_half += std::abs(a - b) + std::abs(sa - sb);
    }
    for (; dx <= sh; ++dx) {
      visit(dx, dy);
      visit(-dx, dy);
      const int a = L[dx], b = L[-dx], sa = S[dx], sb = S[-dx];
      lum_sclera += a + b;
      sat_sclera += sa + sb;
      sym_half += std::abs(a - b) + std::abs(sa - sb);
    }
    for (; dx <= hw; ++dx) {
      visit(dx, dy);
      visit(-dx, dy);
      sat_skin += S[dx] + S[-dx];
    }
  }

  out.lum_sclera_sum = lum_sclera;
  out.sat_iris_sum = sat_iris;
  out.sat_skin_sum = sat_skin;
  out.sat_sclera_sum = sat_sclera;
  // Each mirrored pair contributes the same difference twice.
  out.sym_sum = sym_half + sym_half;
}

}  // namespace

void accumulate_into(const Frame& frame, int cx, int cy, const MaskSet& mask,
                     ScoreAccumulators& out, OpCounts* counts) {
  if (counts != nullptr) {
    accumulate_impl<true>(frame, cx, cy, mask, out, counts);
  } else {
    accumulate_impl<false>(frame, cx, cy, mask, out, nullptr);
  }
}

ScoreAccumulators accumulate(const Frame& frame, int cx, int cy,
                             const MaskSet& mask, OpCounts* counts) {
  ScoreAccumulators acc;
  accumulate_into(frame, cx, cy, mask, acc, counts);
  return acc;
}

double luminosity_score(const ScoreAccumulators& acc, const MaskSet& mask,
                        OpCounts* counts) {
  if (counts != nullptr) counts->multiplications += 2;
  return static_cast<double>(acc.lum_sclera_sum) / mask.n_sclera() -
         static_cast<double>(acc.lum_iris_sum()) / mask.n_iris();
}

double saturation_score(const ScoreAccumulators& acc, const MaskSet& mask,
                        OpCounts* counts) {
  if (counts != nullptr) counts->multiplications += 2;
  return static_cast<double>(acc.sat_iris_sum + acc.sat_skin_sum) /
             (mask.n_iris() + mask.n_skin()) -
         static_cast<double>(acc.sat_sclera_sum) / mask.n_sclera();
}

double symmetry_score(const ScoreAccumulators& acc, const MaskSet& mask,
                      OpCounts* counts) {
  if (counts != nullptr) counts->multiplications += 1;
  return -static_cast<double>(acc.sym_sum) / (mask.n_iris() + mask.n_sclera());
}

CandidateScore score_candidate(const Frame& frame, int cx, int cy,
                               const MaskSet& mask, OpCounts* counts) {
  const ScoreAccumulators acc = accumulate(frame, cx, cy, mask, counts);
  CandidateScore out;
  out.l = luminosity_score(acc, mask, counts);
  out.s = saturation_score(acc, mask, counts);
  out.h = symmetry_score(acc, mask, counts);
  out.c = total_score(out.l, out.s, out.h);
  return out;
}

bool iris_better(const IrisEstimate& a, const IrisEstimate& b) noexcept {
  if (a.c != b.c) return a.c > b.c;
  if (a.er != b.er) return a.er < b.er;
  if (a.ey != b.ey) return a.ey < b.ey;
  return a.ex < b.ex;
}

std::pair<int, int> default_radius_range(int roi_w) noexcept {
  const int r_min = std::max(2, static_cast<int>(std::lround(0.08 * roi_w)));
  const int r_max = std::max(r_min, static_cast<int>(std::lround(0.35 * roi_w)));
  return {r_min, r_max};
}

namespace {

// Row tables shared by every candidate of one search. Region sums come from
// per-row prefix sums; the symmetry term from per-center prefix sums of the
// mirrored differences, so a candidate costs O(rows) lookups. Totals are the
// same integers accumulate() produces cell by cell.
class SearchTables {
 public:
  SearchTables(const Frame& frame, const EyeRegion& roi, const MaskBank& bank)
      : roi_(roi) {
    const ChannelView luma = frame.luma();
    const ChannelView satv = frame.satv();
    const int w = luma.width();
    const MaskSet& widest = bank[bank.r_max()];
    k_max_ = 0;
    for (int dy = -widest.half_h(); dy <= widest.half_h(); ++dy) {
      k_max_ = std::max(k_max_, widest.sclera_half(dy));
    }
    y0_ = std::max(0, roi.y - widest.half_h());
    const int y1 = std::min(luma.height() - 1, roi.y + roi.h - 1 + widest.half_h());
    rows_ = y1 - y0_ + 1;
    stride_ = w + 1;
    lum_.assign(static_cast<std::size_t>(rows_) * stride_, 0);
    sat_.assign(lum_.size(), 0);
    sym_.assign(static_cast<std::size_t>(rows_) * roi.w * (k_max_ + 1), 0);
    for (int i = 0; i < rows_; ++i) {
      const std::uint8_t* L = luma.row(y0_ + i);
      const std::uint8_t* S = satv.row(y0_ + i);
      std::int32_t* pl = &lum_[static_cast<std::size_t>(i) * stride_];
      std::int32_t* ps = &sat_[static_cast<std::size_t>(i) * stride_];
      for (int x = 0; x < w; ++x) {
        pl[x + 1] = pl[x] + L[x];
        ps[x + 1] = ps[x] + S[x];
      }
      for (int c = 0; c < roi.w; ++c) {
        const int x = roi.x + c;
        const int reach = std::min({k_max_, x, w - 1 - x});
        std::int32_t* d = sym_row(i, c);
        for (int k = 1; k <= reach; ++k) {
          d[k] = d[k - 1] + std::abs(L[x + k] - L[x - k]) +
                 std::abs(S[x + k] - S[x - k]);
        }
      }
    }
  }

  // Caller guarantees the footprint fits the frame.
  IrisEstimate score(int x, int y, const MaskSet& mask) const {
    const int hh = mask.half_h();
    const int hw = mask.half_w();
    std::int32_t lum_iris = 0, lum_disk = 0, sat_iris = 0, sat_disk = 0,
                 sat_all = 0, sym = 0;
    const int c = x - roi_.x;
    for (int dy = -hh; dy <= hh; ++dy) {
      const int i = y + dy - y0_;
      const std::int32_t* pl = &lum_[static_cast<std::size_t>(i) * stride_];
      const std::int32_t* ps = &sat_[static_cast<std::size_t>(i) * stride_];
      const int ih = mask.iris_half(dy);
      const int sh = mask.sclera_half(dy);
      sat_all += ps[x + hw + 1] - ps[x - hw];
      if (ih >= 0) {
        lum_iris += pl[x + ih + 1] - pl[x - ih];
        sat_iris += ps[x + ih + 1] - ps[x - ih];
      }
      if (sh >= 0) {
        lum_disk += pl[x + sh + 1] - pl[x - sh];
        sat_disk += ps[x + sh + 1] - ps[x - sh];
        sym += sym_row(i, c)[sh];
      }
    }
    IrisEstimate cand;
    cand.ex = x;
    cand.ey = y;
    cand.er = mask.radius();
    cand.l = static_cast<double>(lum_disk - lum_iris) / mask.n_sclera() -
             static_cast<double>(lum_iris) / mask.n_iris();
    cand.s = static_cast<double>(sat_all - sat_disk + sat_iris) /
                 (mask.n_iris() + mask.n_skin()) -
             static_cast<double>(sat_disk - sat_iris) / mask.n_sclera();
    cand.h = -static_cast<double>(2 * sym) / (mask.n_iris() + mask.n_sclera());
    cand.c = total_score(cand.l, cand.s, cand.h);
    cand.side = roi_.side;
    return cand;
  }

 private:
  const std::int32_t* sym_row(int i, int c) const {
    return &sym_[(static_cast<std::size_t>(i) * roi_.w + c) * (k_max_ + 1)];
  }
  std::int32_t* sym_row(int i, int c) {
    return &sym_[(static_cast<std::size_t>(i) * roi_.w + c) * (k_max_ + 1)];
  }

  EyeRegion roi_;
  int k_max_ = 0;
  int y0_ = 0;
  int rows_ = 0;
  int stride_ = 0;
  std::vector<std::int32_t> lum_;
  std::vector<std::int32_t> sat_;
  std::vector<std::int32_t> sym_;
};

std::optional<IrisEstimate> search_rows(const Frame& frame, const EyeRegion& roi,
                                        const MaskBank& bank,
                                        const SearchTables& tables, int stride,
                                        int row_begin, int row_end) {
  std::optional<IrisEstimate> best;
  const ChannelView luma = frame.luma();
  for (int r = bank.r_min(); r <= bank.r_max(); ++r) {
    const MaskSet& mask = bank[r];
    for (int row = row_begin; row < row_end; ++row) {
      const int y = roi.y + row * stride;
      for (int x = roi.x; x < roi.x + roi.w; x += stride) {
        if (!fits(luma, x, y, mask.half_w(), mask.half_h())) continue;
        const IrisEstimate cand = tables.score(x, y, mask);
        if (!best || iris_better(cand, *best)) best = cand;
      }
    }
  }
  return best;
}

}  // namespace

IrisEstimate detect_iris(const Frame& frame, const EyeRegion& roi,
                         const MaskBank& bank, int stride, int workers) {
  validate_region(roi, frame);
  if (stride < 1) throw Error(ErrorCode::InvalidArgument, "stride must be >= 1");
  const int rows = (roi.h + stride - 1) / stride;
  const int n_workers = std::clamp(workers, 1, rows);
  const SearchTables tables(frame, roi, bank);

  std::optional<IrisEstimate> best;
  if (n_workers == 1) {
    best = search_rows(frame, roi, bank, tables, stride, 0, rows);
  } else {
    std::vector<std::optional<IrisEstimate>> partial(
        static_cast<std::size_t>(n_workers));
    {
      std::vector<std::jthread> pool;
      pool.reserve(partial.size());
      for (int w = 0; w < n_workers; ++w) {
        const int begin = rows * w / n_workers;
        const int end = rows * (w + 1) / n_workers;
        pool.emplace_back([&, w, begin, end] {
          partial[static_cast<std::size_t>(w)] =
              search_rows(frame, roi, bank, tables, stride, begin, end);
        });
      }
    }
    for (const auto& p : partial) {
      if (p && (!best || iris_better(*p, *best))) best = p;
    }
  }
  if (!best) {
    throw Error(ErrorCode::NoValidCandidate,
                "no candidate center admits an in-frame mask footprint");
  }
  return *best;
}

IrisEstimate detect_iris(const Frame& frame, const EyeRegion& roi,
                         const IrisSearchOptions& options) {
  auto [r_min, r_max] = default_radius_range(roi.w);
  if (options.r_min > 0) r_min = options.r_min;
  if (options.r_max > 0) r_max = options.r_max;
  if (options.r_min > 0 && options.r_max <= 0) r_max = std::max(r_max, r_min);
  if (options.r_max > 0 && options.r_min <= 0) r_min = std::min(r_min, r_max);
  const MaskBank bank(r_min, r_max);
  return detect_iris(frame, roi, bank, options.stride, options.workers);
}

IrisEstimate detect_iris(const Frame& frame, const EyeRegion& roi, int r_min,
                         int r_max) {
  IrisSearchOptions options;
  options.r_min = r_min;
  options.r_max = r_max;
  if (r_min < 2) {
    throw Error(ErrorCode::RadiusTooSmall, "r_min must be at least 2");
  }
  return detect_iris(frame, roi, options);
}

}  // namespace pupilscope
