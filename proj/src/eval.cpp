#include "pupilscope/eval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include "pupilscope/error.hpp"
#include "text.hpp"

namespace pupilscope {

Circle iris_circle(const IrisEstimate& iris) noexcept {
  return {static_cast<double>(iris.ex), static_cast<double>(iris.ey),
          iris.er - 1.0};
}

Circle pupil_circle(const PupilEstimate& pupil) noexcept {
  return {static_cast<double>(pupil.px), static_cast<double>(pupil.py),
          pupil.pr + 0.5};
}

double EyeAnnotation::d_lr() const noexcept {
  return std::hypot(lx - rx, ly - ry);
}

EyeAnnotation parse_eye_file(std::string_view text) {
  std::vector<double> values;
  for (const auto line : detail::split_lines(text)) {
    const auto trimmed = detail::trim(line);
    if (trimmed.empty() || trimmed.front() == '#') continue;
    std::istringstream in{std::string(trimmed)};
    double v = 0;
    while (in >> v) values.push_back(v);
    if (!in.eof()) {
      throw Error(ErrorCode::MalformedAnnotation,
                  "non-numeric field in eye annotation");
    }
  }
  if (values.size() != 4) {
    throw Error(ErrorCode::MalformedAnnotation,
                "eye annotation needs exactly LX LY RX RY");
  }
  EyeAnnotation ann{values[0], values[1], values[2], values[3], {}};
  if (!(ann.d_lr() > 0.0)) {
    throw Error(ErrorCode::MalformedAnnotation, "coincident eye centers");
  }
  return ann;
}

EyeAnnotation load_eye_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorCode::UnreadableFile, path.string() + ": cannot open");
  }
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return parse_eye_file(buf.str());
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

Frame BioIdSample::load(long frame_index) const {
  return load_frame(image, frame_index);
}

BioIdDataset load_bioid(const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) {
    throw Error(ErrorCode::EmptyDataset, dir.string() + ": not a directory");
  }
  std::set<std::string> images;
  std::set<std::string> eyes;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const auto ext = entry.path().extension().string();
    const auto stem = entry.path().stem().string();
    if (ext == ".pgm") images.insert(stem);
    if (ext == ".eye") eyes.insert(stem);
  }
  BioIdDataset out;
  for (const auto& stem : images) {
    if (!eyes.contains(stem)) {
      out.unpaired.push_back(stem + ".pgm");
      continue;
    }
    out.samples.push_back(
        {stem, dir / (stem + ".pgm"), load_eye_file(dir / (stem + ".eye"))});
  }
  for (const auto& stem : eyes) {
    if (!images.contains(stem)) out.unpaired.push_back(stem + ".eye");
  }
  if (out.samples.empty()) {
    throw Error(ErrorCode::EmptyDataset,
                dir.string() + ": no BioID image/annotation pairs");
  }
  return out;
}

RoiMode parse_roi_mode(std::string_view text) {
  if (text == "centered") return RoiMode::Centered;
  if (text == "jittered") return RoiMode::Jittered;
  if (text == "file") return RoiMode::File;
  throw Error(ErrorCode::InvalidArgument,
              "unknown roi mode '" + std::string(text) + "'");
}

std::string_view roi_mode_name(RoiMode mode) noexcept {
  switch (mode) {
    case RoiMode::Centered: return "centered";
    case RoiMode::Jittered: return "jittered";
    case RoiMode::File: return "file";
  }
  return "centered";
}

RoiTable RoiTable::load(const std::filesystem::path& csv) {
  std::ifstream in(csv);
  if (!in) {
    throw Error(ErrorCode::UnreadableFile, csv.string() + ": cannot open");
  }
  std::stringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

RoiTable RoiTable::parse(std::string_view text) {
  RoiTable table;
  for (const auto line : detail::split_lines(text)) {
    if (detail::trim(line).empty()) continue;
    const auto fields = detail::split_csv(line);
    if (!fields.empty() && fields[0] == "sample_id") continue;
    if (fields.size() != 6) {
      throw Error(ErrorCode::MalformedAnnotation,
                  "roi row needs sample_id,x,y,w,h,side");
    }
    EyeRegion roi;
    try {
      roi.x = std::stoi(fields[1]);
      roi.y = std::stoi(fields[2]);
      roi.w = std::stoi(fields[3]);
      roi.h = std::stoi(fields[4]);
      roi.side = parse_side(fields[5]);
    } catch (const std::logic_error&) {
      throw Error(ErrorCode::MalformedAnnotation,
                  "bad roi row for '" + fields[0] + "'");
    }
    table.insert(fields[0], roi);
  }
  return table;
}

void RoiTable::insert(const std::string& sample_id, const EyeRegion& roi) {
  auto& row = rows_[sample_id];
  (roi.side == Side::Left ? row.first : row.second) = roi;
}

std::optional<RoiPair> RoiTable::find(const std::string& sample_id) const {
  const auto it = rows_.find(sample_id);
  if (it == rows_.end() || !it->second.first || !it->second.second) {
    return std::nullopt;
  }
  return RoiPair{*it->second.first, *it->second.second, false};
}

namespace {

std::uint64_t mix_seed(std::uint64_t seed, std::string_view id) {
  std::uint64_t h = 1469598103934665603ULL;  // FNV-1a
  for (const char c : id) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ULL;
  }
  std::uint64_t z = h ^ (seed + 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;  // splitmix64 finalizer
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

EyeRegion box_around(double cx, double cy, int side_len, Side side, int frame_w,
                     int frame_h, bool& clipped) {
  const int x0 = static_cast<int>(std::lround(cx)) - side_len / 2;
  const int y0 = static_cast<int>(std::lround(cy)) - side_len / 2;
  const int x1 = x0 + side_len;
  const int y1 = y0 + side_len;
  const int cx0 = std::clamp(x0, 0, frame_w);
  const int cy0 = std::clamp(y0, 0, frame_h);
  const int cx1 = std::clamp(x1, 0, frame_w);
  const int cy1 = std::clamp(y1, 0, frame_h);
  if (cx0 != x0 || cy0 != y0 || cx1 != x1 || cy1 != y1) clipped = true;
  EyeRegion roi{cx0, cy0, cx1 - cx0, cy1 - cy0, side};
  if (roi.w < EyeRegion::kMinExtent || roi.h < EyeRegion::kMinExtent) {
    throw Error(ErrorCode::RegionOutsideFrame,
                "clipped eye region is smaller than 15x15");
  }
  return roi;
}

}  // namespace

RoiPair roi_provider(const EyeAnnotation& annotation, const RoiOptions& options,
                     int frame_w, int frame_h, std::string_view sample_id) {
  if (options.mode == RoiMode::File) {
    throw Error(ErrorCode::InvalidArgument,
                "file-mode regions come from a RoiTable");
  }
  const double d_lr = annotation.d_lr();
  if (!(d_lr > 0.0)) {
    throw Error(ErrorCode::MalformedAnnotation, "coincident eye centers");
  }
  const int side_len =
      static_cast<int>(std::lround(0.8 * d_lr)) + 2 * std::max(options.pad, 0);
  double lx = annotation.lx, ly = annotation.ly;
  double rx = annotation.rx, ry = annotation.ry;
  if (options.mode == RoiMode::Jittered) {
    const auto span = static_cast<std::uint64_t>(std::lround(0.15 * d_lr));
    std::mt19937_64 rng(mix_seed(options.jitter_seed, sample_id));
    const auto draw = [&] {
      return static_cast<double>(static_cast<std::int64_t>(rng() % (2 * span + 1)) -
                                 static_cast<std::int64_t>(span));
    };
    lx += draw();
    ly += draw();
    rx += draw();
    ry += draw();
  }
  RoiPair out;
  out.left = box_around(lx, ly, side_len, Side::Left, frame_w, frame_h, out.clipped);
  out.right =
      box_around(rx, ry, side_len, Side::Right, frame_w, frame_h, out.clipped);
  return out;
}

RelativeErrors relative_errors(Point2 det_l, Point2 det_r,
                               const EyeAnnotation& ann) {
  const double d_lr = ann.d_lr();
  if (!(d_lr > 0.0)) {
    throw Error(ErrorCode::MalformedAnnotation, "coincident eye centers");
  }
  RelativeErrors out;
  out.e_l = std::hypot(det_l.x - ann.lx, det_l.y - ann.ly) / d_lr;
  out.e_r = std::hypot(det_r.x - ann.rx, det_r.y - ann.ry) / d_lr;
  out.e = (out.e_l + out.e_r) / 2.0;
  return out;
}

AggregateErrors aggregate_errors(const std::vector<RelativeErrors>& records) {
  if (records.empty()) {
    throw Error(ErrorCode::EmptyDataset, "no records to aggregate");
  }
  AggregateErrors out;
  for (const auto& r : records) {
    out.E_l += r.e_l;
    out.E_r += r.e_r;
  }
  out.E_l /= static_cast<double>(records.size());
  out.E_r /= static_cast<double>(records.size());
  out.E = (out.E_l + out.E_r) / 2.0;
  return out;
}

double tolerance_accuracy(const std::vector<RelativeErrors>& records,
                          double tolerance) {
  if (records.empty()) {
    throw Error(ErrorCode::EmptyDataset, "no records to score");
  }
  if (!(tolerance > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "tolerance must be positive");
  }
  const auto hits = std::count_if(records.begin(), records.end(), [&](const auto& r) {
    return std::max(r.e_l, r.e_r) <= tolerance;
  });
  return static_cast<double>(hits) / static_cast<double>(records.size());
}

AreaOverlap circle_overlap(const Circle& annotated, const Circle& estimated,
                           int frame_w, int frame_h) {
  if (!(annotated.r > 0.0) || !(estimated.r > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "circle radii must be positive");
  }
  const auto inside = [](const Circle& c, int i, int j) {
    const double dx = i - c.cx;
    const double dy = j - c.cy;
    return dx * dx + dy * dy <= c.r * c.r;
  };
  const auto lo = [](double v) { return static_cast<int>(std::floor(v)); };
  const auto hi = [](double v) { return static_cast<int>(std::ceil(v)); };
  const int x0 = std::max(0, std::min(lo(annotated.cx - annotated.r),
                                      lo(estimated.cx - estimated.r)));
  const int y0 = std::max(0, std::min(lo(annotated.cy - annotated.r),
                                      lo(estimated.cy - estimated.r)));
  const int x1 = std::min(frame_w - 1, std::max(hi(annotated.cx + annotated.r),
                                                hi(estimated.cx + estimated.r)));
  const int y1 = std::min(frame_h - 1, std::max(hi(annotated.cy + annotated.r),
                                                hi(estimated.cy + estimated.r)));
  AreaOverlap out;
  for (int j = y0; j <= y1; ++j) {
    for (int i = x0; i <= x1; ++i) {
      const bool a = inside(annotated, i, j);
      const bool e = inside(estimated, i, j);
      out.annotated += a;
      out.estimated += e;
      out.common += a && e;
    }
  }
  return out;
}

Prf pupil_prf(std::int64_t annotated, std::int64_t estimated,
              std::int64_t common) {
  if (annotated <= 0) {
    throw Error(ErrorCode::DegenerateAnnotation, "annotated pupil area is zero");
  }
  if (estimated <= 0) {
    throw Error(ErrorCode::InvalidArgument, "estimated pupil area is zero");
  }
  Prf out;
  out.recall = static_cast<double>(common) / static_cast<double>(annotated);
  out.precision = static_cast<double>(common) / static_cast<double>(estimated);
  const double denom = out.recall + out.precision;
  out.f1 = denom > 0.0 ? 2.0 * out.recall * out.precision / denom : 0.0;
  return out;
}

Prf pupil_prf(const AreaOverlap& overlap) {
  return pupil_prf(overlap.annotated, overlap.estimated, overlap.common);
}

Agreement inter_annotator(const std::vector<Circle>& circles, int frame_w,
                          int frame_h) {
  if (circles.size() < 2) {
    throw Error(ErrorCode::TooFewAnnotators, "agreement needs two annotators");
  }
  Agreement out;
  for (std::size_t i = 0; i < circles.size(); ++i) {
    for (std::size_t j = 0; j < circles.size(); ++j) {
      if (i == j) continue;
      const Prf p = pupil_prf(circle_overlap(circles[i], circles[j], frame_w, frame_h));
      out.mean.precision += p.precision;
      out.mean.recall += p.recall;
      out.mean.f1 += p.f1;
      ++out.pairs;
    }
  }
  const auto n = static_cast<double>(out.pairs);
  out.mean.precision /= n;
  out.mean.recall /= n;
  out.mean.f1 /= n;
  for (const auto& c : circles) {
    out.consensus.cx += c.cx;
    out.consensus.cy += c.cy;
    out.consensus.r += c.r;
  }
  const auto m = static_cast<double>(circles.size());
  out.consensus.cx /= m;
  out.consensus.cy /= m;
  out.consensus.r /= m;
  return out;
}

double diameter_accuracy(double estimated_diameter, double annotated_diameter) {
  if (!(annotated_diameter > 0.0)) {
    throw Error(ErrorCode::DegenerateAnnotation, "annotated diameter is zero");
  }
  return 1.0 - std::abs(estimated_diameter - annotated_diameter) /
                   annotated_diameter;
}

}  // namespace pupilscope
