#include "cli.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <exception>
#include <filesystem>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>
#include <variant>

#include <CLI11.hpp>

#include "pupilscope/pupilscope.hpp"

namespace pupilscope::cli {

namespace fs = std::filesystem;

namespace {

// Runs fn(i) for i in [0, n) on up to `workers` threads. Results keep
// index order, and an exception is stored in place of its slot's value.
template <class T, class Fn>
std::vector<std::variant<T, std::exception_ptr>> parallel_map(std::size_t n,
                                                              int workers, Fn fn) {
  std::vector<std::variant<T, std::exception_ptr>> out(n);
  const auto work = [&](std::size_t i) {
    try {
      out[i] = fn(i);
    } catch (...) {
      out[i] = std::current_exception();
    }
  };
  const auto threads =
      static_cast<std::size_t>(std::clamp<long>(workers, 1, static_cast<long>(std::max<std::size_t>(n, 1))));
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) work(i);
    return out;
  }
  std::atomic<std::size_t> next{0};
  {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < n; i = next++) work(i);
      });
    }
  }
  return out;
}

template <class T>
const T& value_or_rethrow(const std::variant<T, std::exception_ptr>& v) {
  if (const auto* e = std::get_if<std::exception_ptr>(&v)) std::rethrow_exception(*e);
  return std::get<T>(v);
}

bool is_image(const fs::path& p) {
  std::string ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return ext == ".pgm" || ext == ".png" || ext == ".bmp";
}

std::vector<fs::path> collect_images(const std::vector<std::string>& inputs) {
  std::vector<fs::path> out;
  for (const auto& in : inputs) {
    const fs::path p(in);
    std::error_code ec;
    if (fs::is_directory(p, ec)) {
      std::vector<fs::path> found;
      for (const auto& e : fs::directory_iterator(p)) {
        if (e.is_regular_file() && is_image(e.path())) found.push_back(e.path());
      }
      std::sort(found.begin(), found.end());
      out.insert(out.end(), found.begin(), found.end());
    } else {
      out.push_back(p);
    }
  }
  return out;
}

/// Supplies the rough eye regions for a frame from the configured source.
class RoiSource {
 public:
  explicit RoiSource(const RunConfig& config) : config_(config) {
    if (config.roi_mode == RoiMode::File) {
      if (config.roi_file.empty()) {
        throw Error(ErrorCode::InvalidArgument, "--roi-mode file needs --roi-file");
      }
      table_ = RoiTable::load(config.roi_file);
    }
  }

  [[nodiscard]] RoiPair for_image(const fs::path& image, const std::string& id,
                                  const Frame& frame) const {
    if (table_) {
      auto found = table_->find(id);
      if (!found) {
        throw Error(ErrorCode::MalformedAnnotation,
                    "no left/right regions for '" + id + "' in roi file");
      }
      return *found;
    }
    fs::path eye = image;
    eye.replace_extension(".eye");
    return for_annotation(load_eye_file(eye), id, frame);
  }

  [[nodiscard]] RoiPair for_annotation(const EyeAnnotation& ann, const std::string& id,
                                       const Frame& frame) const {
    if (table_) {
      auto found = table_->find(id);
      if (!found) {
        throw Error(ErrorCode::MalformedAnnotation,
                    "no left/right regions for '" + id + "' in roi file");
      }
      return *found;
    }
    RoiOptions opt;
    opt.mode = config_.roi_mode;
    opt.pad = config_.roi_pad;
    opt.jitter_seed = config_.jitter_seed;
    return roi_provider(ann, opt, frame.width(), frame.height(), id);
  }

 private:
  const RunConfig& config_;
  std::optional<RoiTable> table_;
};

IrisSearchOptions iris_options(const RunConfig& config) {
  IrisSearchOptions opt;
  opt.r_min = config.r_min;
  opt.r_max = config.r_max;
  opt.stride = config.stride;
  opt.workers = 1;
  return opt;
}

std::string failure_tag(Side side, const Error& e) {
  return std::string(side_name(side)) + ":" + std::string(error_code_name(e.code()));
}

}  // namespace

FrameResult process_frame(const Frame& frame, const RoiPair& rois,
                          const RunConfig& config, std::string frame_id,
                          std::vector<std::string>* failures) {
  FrameResult result;
  result.frame_index = frame.frame_index();
  result.frame_id = std::move(frame_id);
  const IrisSearchOptions opt = iris_options(config);

  const auto eye = [&](const EyeRegion& roi, std::optional<IrisEstimate>& iris,
                       std::optional<PupilEstimate>& pupil) {
    try {
      iris = detect_iris(frame, roi, opt);
      pupil = detect_pupil(frame, *iris, config.neighborhood);
    } catch (const Error& e) {
      if (failures != nullptr) failures->push_back(failure_tag(roi.side, e));
    }
  };
  eye(rois.left, result.left, result.left_pupil);
  eye(rois.right, result.right, result.right_pupil);
  result.confidence = confidence(result);
  return result;
}

namespace {

const std::vector<std::string> kDetectColumns = {
    "frame_id", "left_ex",  "left_ey",  "left_er",  "left_l",   "left_s",
    "left_h",   "left_c",   "right_ex", "right_ey", "right_er", "right_l",
    "right_s",  "right_h",  "right_c",  "left_px",  "left_py",  "left_pr",
    "left_g",   "right_px", "right_py", "right_pr", "right_g",  "confidence",
    "failures"};

std::string join(const std::vector<std::string>& parts, char sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

std::vector<Field> detect_record(const FrameResult& r,
                                 const std::vector<std::string>& failures) {
  std::vector<Field> row;
  row.emplace_back(r.frame_id);
  for (const auto* iris : {&r.left, &r.right}) {
    if (*iris) {
      row.emplace_back(std::int64_t{(*iris)->ex});
      row.emplace_back(std::int64_t{(*iris)->ey});
      row.emplace_back(std::int64_t{(*iris)->er});
      row.emplace_back((*iris)->l);
      row.emplace_back((*iris)->s);
      row.emplace_back((*iris)->h);
      row.emplace_back((*iris)->c);
    } else {
      row.insert(row.end(), 7, std::monostate{});
    }
  }
  for (const auto* pupil : {&r.left_pupil, &r.right_pupil}) {
    if (*pupil) {
      row.emplace_back(std::int64_t{(*pupil)->px});
      row.emplace_back(std::int64_t{(*pupil)->py});
      row.emplace_back(std::int64_t{(*pupil)->pr});
      row.emplace_back((*pupil)->g);
    } else {
      row.insert(row.end(), 4, std::monostate{});
    }
  }
  row.emplace_back(r.confidence);
  row.emplace_back(join(failures, ';'));
  return row;
}

struct Processed {
  FrameResult result;
  std::vector<std::string> failures;
};

Processed process_path(const fs::path& image, long index, const RoiSource& rois,
                       const RunConfig& config) {
  const Frame frame = load_frame(image, index);
  const std::string id = image.stem().string();
  Processed p;
  RoiPair pair;
  try {
    pair = rois.for_image(image, id, frame);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::UnreadableFile ||
        e.code() == ErrorCode::MalformedAnnotation ||
        e.code() == ErrorCode::RegionOutsideFrame) {
      p.result.frame_index = index;
      p.result.frame_id = id;
      p.failures.push_back("roi:" + std::string(error_code_name(e.code())));
      return p;
    }
    throw;
  }
  p.result = process_frame(frame, pair, config, id, &p.failures);
  return p;
}

int cmd_detect(const std::vector<std::string>& inputs, const RunConfig& config,
               std::ostream& out) {
  const RoiSource rois(config);
  const auto all = collect_images(inputs);
  std::vector<std::pair<fs::path, long>> frames;
  for (std::size_t i = 0; i < all.size(); i += static_cast<std::size_t>(config.frame_stride)) {
    frames.emplace_back(all[i], static_cast<long>(i));
  }
  RecordWriter writer(out, config.format, kDetectColumns);
  const std::size_t chunk = static_cast<std::size_t>(config.workers) * 4;
  for (std::size_t begin = 0; begin < frames.size(); begin += chunk) {
    const std::size_t n = std::min(chunk, frames.size() - begin);
    const auto results = parallel_map<Processed>(n, config.workers, [&](std::size_t i) {
      const auto& [path, index] = frames[begin + i];
      return process_path(path, index, rois, config);
    });
    for (const auto& r : results) {
      const Processed& p = value_or_rethrow(r);
      writer.write(detect_record(p.result, p.failures));
    }
  }
  out.flush();
  return kOk;
}

// ---------------------------------------------------------------------------
// stream

const std::vector<std::string> kStreamColumns = {
    "window_id",      "frames",        "best_frame_id",  "best_frame_index",
    "confidence",     "left_pupil_r",  "right_pupil_r",  "eq6_iris_radius",
    "eq6_iris_y",     "eq6_pupil_y",   "pupil_radius_factor", "flag"};

Field raw_dissimilarity(double l, double r) {
  try {
    return equality_dissimilarity(l, r);
  } catch (const Error&) {
    return std::monostate{};
  }
}

std::vector<Field> window_record(const WindowReport& w) {
  std::vector<Field> row;
  row.emplace_back(std::int64_t{w.window_id});
  row.emplace_back(std::int64_t{w.frames});
  if (!w.best) {
    row.insert(row.end(), 9, std::monostate{});
    row.emplace_back(std::string("NoConfidentFrame"));
    return row;
  }
  const FrameResult& b = *w.best;
  row.emplace_back(b.frame_id);
  row.emplace_back(std::int64_t{b.frame_index});
  row.emplace_back(b.confidence);
  row.emplace_back(std::int64_t{b.left_pupil->pr});
  row.emplace_back(std::int64_t{b.right_pupil->pr});
  row.push_back(raw_dissimilarity(b.left->er, b.right->er));
  row.push_back(raw_dissimilarity(b.left->ey, b.right->ey));
  row.push_back(raw_dissimilarity(b.left_pupil->py, b.right_pupil->py));
  // Diagnostic only: pupil radius agreement does not enter the confidence.
  try {
    row.emplace_back(equality_factor(b.left_pupil->pr, b.right_pupil->pr));
  } catch (const Error&) {
    row.emplace_back(std::monostate{});
  }
  row.emplace_back(std::string());
  return row;
}

int cmd_stream(const RunConfig& config, std::istream& in, std::ostream& out) {
  const RoiSource rois(config);
  WindowedSelector selector(config.window);
  RecordWriter writer(out, config.format, kStreamColumns);
  const auto emit = [&](const std::optional<WindowReport>& w) {
    if (w) {
      writer.write(window_record(*w));
      out.flush();
    }
  };

  const std::size_t chunk = static_cast<std::size_t>(config.workers) * 4;
  long ordinal = 0;
  std::vector<std::pair<fs::path, long>> pending;
  const auto drain = [&] {
    const auto results = parallel_map<Processed>(
        pending.size(), config.workers, [&](std::size_t i) {
          return process_path(pending[i].first, pending[i].second, rois, config);
        });
    for (const auto& r : results) emit(selector.push(value_or_rethrow(r).result));
    pending.clear();
  };

  std::string line;
  while (std::getline(in, line)) {
    const std::string_view t = [&] {
      std::string_view s = line;
      while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
      while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
      return s;
    }();
    if (t.empty() || t.front() == '#') continue;
    if (t == "RESET") {
      drain();
      emit(selector.tracking_lost());
      continue;
    }
    const long index = ordinal++;
    if (index % config.frame_stride != 0) continue;
    pending.emplace_back(fs::path(std::string(t)), index);
    if (pending.size() >= chunk) drain();
  }
  drain();
  emit(selector.finish());
  return kOk;
}

// ---------------------------------------------------------------------------
// eval

const std::vector<std::string> kEvalColumns = {"section", "metric", "value",
                                               "published"};

struct Report {
  std::vector<std::vector<Field>> rows;
  void add(std::string section, std::string metric, Field value,
           Field published = std::monostate{}) {
    rows.push_back({std::move(section), std::move(metric), std::move(value),
                    std::move(published)});
  }
};

std::string tol_name(double t) {
  std::ostringstream s;
  s << "A_" << t;
  return s.str();
}

Field published_accuracy(double t, bool rough) {
  const double p[3] = {0.05, 0.1, 0.25};
  const double proposed[3] = {0.47, 0.92, 0.99};
  const double shore_rough[3] = {0.15, 0.68, 0.98};
  for (int i = 0; i < 3; ++i) {
    if (std::abs(t - p[i]) < 1e-12) return rough ? shore_rough[i] : proposed[i];
  }
  return std::monostate{};
}

void add_center_metrics(Report& rep, const std::string& section,
                        const std::vector<RelativeErrors>& recs,
                        const RunConfig& config, bool rough, bool with_published) {
  const AggregateErrors agg = aggregate_errors(recs);
  const auto pub = [&](double proposed, double shore) -> Field {
    if (!with_published) return std::monostate{};
    return rough ? shore : proposed;
  };
  rep.add(section, "E_l", agg.E_l, pub(0.035, 0.054));
  rep.add(section, "E_r", agg.E_r, pub(0.021, 0.053));
  rep.add(section, "E", agg.E, pub(0.028, 0.053));
  for (const double t : config.tolerances) {
    rep.add(section, tol_name(t), tolerance_accuracy(recs, t),
            with_published ? published_accuracy(t, rough) : Field{});
  }
}

Point2 center_of(const EyeRegion& roi) {
  return {roi.x + (roi.w - 1) / 2.0, roi.y + (roi.h - 1) / 2.0};
}

Point2 point_of(const std::optional<IrisEstimate>& iris, const EyeRegion& roi) {
  if (iris) return {static_cast<double>(iris->ex), static_cast<double>(iris->ey)};
  return center_of(roi);
}

struct BioIdOutcome {
  RelativeErrors detected;
  RelativeErrors rough;
  int failures{0};
  bool clipped{false};
};

Report eval_bioid(const fs::path& dir, const RunConfig& config) {
  const BioIdDataset data = load_bioid(dir);
  const RoiSource rois(config);
  const auto results = parallel_map<BioIdOutcome>(
      data.samples.size(), config.workers, [&](std::size_t i) {
        const BioIdSample& s = data.samples[i];
        const Frame frame = s.load(static_cast<long>(i));
        const RoiPair pair = rois.for_annotation(s.annotation, s.id, frame);
        const FrameResult r = process_frame(frame, pair, config, s.id);
        BioIdOutcome o;
        o.detected = relative_errors(point_of(r.left, pair.left),
                                     point_of(r.right, pair.right), s.annotation);
        o.rough = relative_errors(center_of(pair.left), center_of(pair.right),
                                  s.annotation);
        o.failures = !r.left + !r.right;
        o.clipped = pair.clipped;
        return o;
      });
  std::vector<RelativeErrors> det;
  std::vector<RelativeErrors> rough;
  long failures = 0;
  long clipped = 0;
  for (const auto& r : results) {
    const BioIdOutcome& o = value_or_rethrow(r);
    det.push_back(o.detected);
    rough.push_back(o.rough);
    failures += o.failures;
    clipped += o.clipped;
  }
  Report rep;
  rep.add("dataset", "samples", std::int64_t(det.size()));
  rep.add("dataset", "unpaired_files", std::int64_t(data.unpaired.size()));
  rep.add("dataset", "roi_mode", std::string(roi_mode_name(config.roi_mode)));
  rep.add("dataset", "clipped_regions", std::int64_t{clipped});
  rep.add("dataset", "iris_detection_failures", std::int64_t{failures});
  add_center_metrics(rep, "iris", det, config, false, true);
  // Box-center baseline built from the substitute eye boxes; the published
  // column holds the face-detector baseline it stands in for.
  add_center_metrics(rep, "rough_substitute", rough, config, true, true);
  return rep;
}

struct ManifestEye {
  std::string image;
  EyeRegion roi;
  IrisEstimate iris;
  PupilEstimate pupil;
};

std::vector<std::pair<std::string, std::vector<ManifestEye>>> read_manifest(
    const fs::path& csv) {
  std::ifstream in(csv);
  if (!in) throw Error(ErrorCode::UnreadableFile, csv.string() + ": cannot open");
  std::vector<std::pair<std::string, std::vector<ManifestEye>>> out;
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    if (header) {
      header = false;
      continue;
    }
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    if (f.size() != 13) {
      throw Error(ErrorCode::MalformedAnnotation, "manifest row needs 13 fields");
    }
    ManifestEye e;
    try {
      e.image = f[1];
      const Side side = parse_side(f[2]);
      e.roi = {std::stoi(f[3]), std::stoi(f[4]), std::stoi(f[5]), std::stoi(f[6]), side};
      e.iris.ex = std::stoi(f[7]);
      e.iris.ey = std::stoi(f[8]);
      e.iris.er = std::stoi(f[9]);
      e.iris.side = side;
      e.pupil.px = std::stoi(f[10]);
      e.pupil.py = std::stoi(f[11]);
      e.pupil.pr = std::stoi(f[12]);
      e.pupil.side = side;
    } catch (const std::logic_error&) {
      throw Error(ErrorCode::MalformedAnnotation, "bad manifest row for " + f[0]);
    }
    if (out.empty() || out.back().first != f[0]) out.emplace_back(f[0], std::vector<ManifestEye>{});
    out.back().second.push_back(e);
  }
  if (out.empty()) throw Error(ErrorCode::EmptyDataset, csv.string() + ": no rows");
  return out;
}

struct EyeOutcome {
  bool iris_found{false};
  bool pupil_found{false};
  int center_err{0};  // Chebyshev distance, pixels
  int radius_err{0};
  int pupil_radius_err{0};
  Prf prf;
  double diameter_acc{0};
  Point2 detected;
};

EyeOutcome score_eye(const Frame& frame, const ManifestEye& e, const RunConfig& config) {
  EyeOutcome o;
  o.detected = center_of(e.roi);
  try {
    const IrisEstimate iris = detect_iris(frame, e.roi, iris_options(config));
    o.iris_found = true;
    o.detected = {static_cast<double>(iris.ex), static_cast<double>(iris.ey)};
    o.center_err = std::max(std::abs(iris.ex - e.iris.ex), std::abs(iris.ey - e.iris.ey));
    o.radius_err = std::abs(iris.er - e.iris.er);
    const PupilEstimate pupil = detect_pupil(frame, iris, config.neighborhood);
    o.pupil_found = true;
    o.pupil_radius_err = std::abs(pupil.pr - e.pupil.pr);
    const Circle truth = pupil_circle(e.pupil);
    const Circle est = pupil_circle(pupil);
    o.prf = pupil_prf(circle_overlap(truth, est, frame.width(), frame.height()));
    o.diameter_acc = diameter_accuracy(2 * est.r, 2 * truth.r);
  } catch (const Error& err) {
    if (err.code() != ErrorCode::NoValidCandidate &&
        err.code() != ErrorCode::NoPupilContrast &&
        err.code() != ErrorCode::OutOfBounds) {
      throw;
    }
  }
  return o;
}

Report eval_synth(const fs::path& dir, const RunConfig& config) {
  const auto samples = read_manifest(dir / "manifest.csv");
  const auto results = parallel_map<std::vector<EyeOutcome>>(
      samples.size(), config.workers, [&](std::size_t i) {
        const auto& eyes = samples[i].second;
        const Frame frame = load_frame(dir / eyes.front().image, static_cast<long>(i));
        std::vector<EyeOutcome> out;
        for (const auto& e : eyes) out.push_back(score_eye(frame, e, config));
        return out;
      });

  long eyes = 0, iris_found = 0, pupil_found = 0;
  std::map<int, long> center_hist, radius_hist, pupil_hist;
  Prf prf_sum;
  double diam_sum = 0;
  std::vector<RelativeErrors> rel;
  for (std::size_t i = 0; i < results.size(); ++i) {
    const auto& outcome = value_or_rethrow(results[i]);
    const auto& truth = samples[i].second;
    for (const auto& o : outcome) {
      ++eyes;
      if (!o.iris_found) continue;
      ++iris_found;
      ++center_hist[std::min(o.center_err, 3)];
      ++radius_hist[std::min(o.radius_err, 2)];
      if (!o.pupil_found) continue;
      ++pupil_found;
      ++pupil_hist[std::min(o.pupil_radius_err, 2)];
      prf_sum.precision += o.prf.precision;
      prf_sum.recall += o.prf.recall;
      prf_sum.f1 += o.prf.f1;
      diam_sum += o.diameter_acc;
    }
    // Relative errors need a left/right pair.
    const ManifestEye* l = nullptr;
    const ManifestEye* r = nullptr;
    Point2 dl, dr;
    for (std::size_t k = 0; k < truth.size(); ++k) {
      if (truth[k].roi.side == Side::Left) { l = &truth[k]; dl = outcome[k].detected; }
      if (truth[k].roi.side == Side::Right) { r = &truth[k]; dr = outcome[k].detected; }
    }
    if (l && r) {
      EyeAnnotation ann{static_cast<double>(l->iris.ex), static_cast<double>(l->iris.ey),
                        static_cast<double>(r->iris.ex), static_cast<double>(r->iris.ey), {}};
      rel.push_back(relative_errors(dl, dr, ann));
    }
  }
  Report rep;
  rep.add("dataset", "samples", std::int64_t(samples.size()));
  rep.add("dataset", "eyes", std::int64_t{eyes});
  rep.add("dataset", "iris_found", std::int64_t{iris_found});
  rep.add("dataset", "pupil_found", std::int64_t{pupil_found});
  const auto hist = [&](const std::string& name, const std::map<int, long>& h, int top) {
    for (int b = 0; b <= top; ++b) {
      const auto it = h.find(b);
      rep.add("histogram", name + "_" + std::to_string(b) + (b == top ? "+" : ""),
              std::int64_t{it == h.end() ? 0 : it->second});
    }
  };
  hist("center_err_px", center_hist, 3);
  hist("radius_err_px", radius_hist, 2);
  hist("pupil_radius_err_px", pupil_hist, 2);
  if (pupil_found > 0) {
    const double n = static_cast<double>(pupil_found);
    rep.add("pupil", "P", prf_sum.precision / n, 0.66);
    rep.add("pupil", "R", prf_sum.recall / n, 0.68);
    rep.add("pupil", "F1", prf_sum.f1 / n, 0.67);
    rep.add("pupil", "diameter_accuracy", diam_sum / n, 0.85);
  }
  if (!rel.empty()) add_center_metrics(rep, "iris", rel, config, false, false);
  return rep;
}

struct PupilSample {
  std::string id;
  std::vector<AnnotatedCircle> circles;
};

std::vector<PupilSample> read_pupil_csv(const fs::path& csv) {
  std::ifstream in(csv);
  if (!in) throw Error(ErrorCode::UnreadableFile, csv.string() + ": cannot open");
  std::map<std::string, PupilSample> by_id;
  std::vector<std::string> order;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    if (!f.empty() && f[0] == "sample_id") continue;
    if (f.size() != 7) {
      throw Error(ErrorCode::MalformedAnnotation,
                  "annotation row needs sample_id,annotator_id,side,kind,cx,cy,r");
    }
    AnnotatedCircle c;
    try {
      c.annotator = f[1];
      c.side = parse_side(f[2]);
      if (f[3] == "iris") c.kind = CircleKind::Iris;
      else if (f[3] == "pupil") c.kind = CircleKind::Pupil;
      else throw std::invalid_argument("kind");
      c.circle = {std::stod(f[4]), std::stod(f[5]), std::stod(f[6])};
    } catch (const std::exception&) {
      throw Error(ErrorCode::MalformedAnnotation, "bad annotation row for " + f[0]);
    }
    if (!by_id.contains(f[0])) order.push_back(f[0]);
    auto& s = by_id[f[0]];
    s.id = f[0];
    s.circles.push_back(c);
  }
  std::vector<PupilSample> out;
  for (const auto& id : order) out.push_back(by_id[id]);
  if (out.empty()) throw Error(ErrorCode::EmptyDataset, csv.string() + ": no rows");
  return out;
}

fs::path find_image(const fs::path& dir, const std::string& id) {
  for (const char* ext : {".png", ".pgm", ".bmp", ".PNG", ".PGM", ".BMP"}) {
    const fs::path p = dir / (id + ext);
    if (fs::exists(p)) return p;
  }
  throw Error(ErrorCode::UnreadableFile, "no image for sample '" + id + "'");
}

struct PupilOutcome {
  std::optional<Prf> prf[2];
  std::optional<double> diameter[2];
  std::optional<Agreement> agreement[2];
  int annotators{0};
};

Circle consensus_of(const std::vector<Circle>& cs) {
  Circle m;
  for (const auto& c : cs) {
    m.cx += c.cx;
    m.cy += c.cy;
    m.r += c.r;
  }
  const auto n = static_cast<double>(cs.size());
  return {m.cx / n, m.cy / n, m.r / n};
}

Report eval_pupil(const fs::path& dir, const RunConfig& config) {
  const auto samples = read_pupil_csv(dir / "annotations.csv");
  const RoiSource rois(config);
  const auto results = parallel_map<PupilOutcome>(
      samples.size(), config.workers, [&](std::size_t i) {
        const PupilSample& s = samples[i];
        const Frame frame = load_frame(find_image(dir, s.id), static_cast<long>(i));
        std::vector<Circle> iris[2], pupil[2];
        std::set<std::string> annotators;
        for (const auto& c : s.circles) {
          const int side = c.side == Side::Left ? 0 : 1;
          (c.kind == CircleKind::Iris ? iris : pupil)[side].push_back(c.circle);
          annotators.insert(c.annotator);
        }
        PupilOutcome o;
        o.annotators = static_cast<int>(annotators.size());
        Circle center[2];
        for (int side = 0; side < 2; ++side) {
          const auto& ref = iris[side].empty() ? pupil[side] : iris[side];
          if (ref.empty()) {
            throw Error(ErrorCode::MalformedAnnotation,
                        "sample '" + s.id + "' lacks a circle for each eye");
          }
          center[side] = consensus_of(ref);
        }
        const EyeAnnotation ann{center[0].cx, center[0].cy, center[1].cx, center[1].cy, {}};
        const RoiPair pair = rois.for_annotation(ann, s.id, frame);
        const FrameResult r = process_frame(frame, pair, config, s.id);
        const std::optional<PupilEstimate>* est[2] = {&r.left_pupil, &r.right_pupil};
        for (int side = 0; side < 2; ++side) {
          if (pupil[side].empty()) continue;
          if (pupil[side].size() >= 2) {
            o.agreement[side] = inter_annotator(pupil[side], frame.width(), frame.height());
          }
          const Circle truth = consensus_of(pupil[side]);
          if (*est[side]) {
            const Circle e = pupil_circle(**est[side]);
            o.prf[side] = pupil_prf(circle_overlap(truth, e, frame.width(), frame.height()));
            o.diameter[side] = diameter_accuracy(2 * e.r, 2 * truth.r);
          } else {
            o.prf[side] = Prf{};
            o.diameter[side] = 0.0;
          }
        }
        return o;
      });

  Prf det, agree;
  double diam = 0;
  long n_det = 0, n_agree = 0;
  int max_annotators = 0;
  for (const auto& r : results) {
    const PupilOutcome& o = value_or_rethrow(r);
    max_annotators = std::max(max_annotators, o.annotators);
    for (int side = 0; side < 2; ++side) {
      if (o.prf[side]) {
        det.precision += o.prf[side]->precision;
        det.recall += o.prf[side]->recall;
        det.f1 += o.prf[side]->f1;
        diam += *o.diameter[side];
        ++n_det;
      }
      if (o.agreement[side]) {
        agree.precision += o.agreement[side]->mean.precision;
        agree.recall += o.agreement[side]->mean.recall;
        agree.f1 += o.agreement[side]->mean.f1;
        ++n_agree;
      }
    }
  }
  if (n_det == 0) throw Error(ErrorCode::EmptyDataset, "no annotated pupils");
  Report rep;
  rep.add("dataset", "samples", std::int64_t(samples.size()));
  rep.add("dataset", "annotated_pupils", std::int64_t{n_det});
  rep.add("dataset", "annotators", std::int64_t{max_annotators});
  const double n = static_cast<double>(n_det);
  rep.add("pupil", "P", det.precision / n, 0.66);
  rep.add("pupil", "R", det.recall / n, 0.68);
  rep.add("pupil", "F1", det.f1 / n, 0.67);
  rep.add("pupil", "diameter_accuracy", diam / n, 0.85);
  if (n_agree > 0) {
    const double m = static_cast<double>(n_agree);
    rep.add("inter_annotator", "P", agree.precision / m, 0.82);
    rep.add("inter_annotator", "R", agree.recall / m, 0.84);
    rep.add("inter_annotator", "F1", agree.f1 / m, 0.79);
  }
  return rep;
}

int cmd_eval(const std::string& dir, const std::string& kind, const RunConfig& config,
             std::ostream& out) {
  Report rep;
  if (kind == "bioid") {
    rep = eval_bioid(dir, config);
  } else if (kind == "synth-manifest") {
    rep = eval_synth(dir, config);
  } else if (kind == "pupil-csv") {
    rep = eval_pupil(dir, config);
  } else {
    throw Error(ErrorCode::InvalidArgument, "unknown dataset kind '" + kind + "'");
  }
  RecordWriter writer(out, config.format, kEvalColumns);
  for (const auto& row : rep.rows) writer.write(row);
  return kOk;
}

// ---------------------------------------------------------------------------
// synth

int cmd_synth(int count, const std::string& preset_text, std::uint64_t seed,
              const std::string& out_dir, const RunConfig& config, std::ostream& out) {
  if (count < 1) throw Error(ErrorCode::InvalidArgument, "--count must be >= 1");
  const SynthPreset preset = parse_preset(preset_text);
  const fs::path dir(out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::IoError, dir.string() + ": " + ec.message());

  std::ofstream truth_file(dir / "truth.csv");
  std::ofstream roi_file(dir / "rois.csv");
  std::ofstream manifest_file(dir / "manifest.csv");
  if (!truth_file || !roi_file || !manifest_file) {
    throw Error(ErrorCode::IoError, dir.string() + ": cannot create csv files");
  }
  RecordWriter truth(truth_file, Format::Csv,
                     {"sample_id", "side", "ex", "ey", "er", "px", "py", "pr"});
  RecordWriter roi(roi_file, Format::Csv, {"sample_id", "x", "y", "w", "h", "side"});
  RecordWriter manifest(manifest_file, Format::Csv,
                        {"sample_id", "image", "side", "roi_x", "roi_y", "roi_w",
                         "roi_h", "ex", "ey", "er", "px", "py", "pr"});

  SplitRng master(seed);
  for (int i = 0; i < count; ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "synth_%04d", i);
    const std::string id = name;
    const std::uint64_t spec_seed = master.next();
    const std::uint64_t noise_seed = master.next();
    const std::uint64_t roi_seed = master.next();
    const auto [ls, rs] = random_face_specs(spec_seed, preset);
    const SynthFace face = synth_face(ls, rs, noise_seed);
    write_png(dir / (id + ".png"), face.image);
    {
      std::ofstream eye(dir / (id + ".eye"));
      eye << "#LX\tLY\tRX\tRY\n"
          << ls.iris_cx << '\t' << ls.iris_cy << '\t' << rs.iris_cx << '\t' << rs.iris_cy
          << '\n';
      if (!eye) throw Error(ErrorCode::IoError, id + ".eye: write failed");
    }
    for (const auto* eye : {&face.left, &face.right}) {
      const SynthEyeSpec& spec = eye == &face.left ? ls : rs;
      const EyeRegion r = synth_roi(spec, roi_seed + (eye == &face.left ? 0 : 1));
      const std::string side(side_name(spec.side));
      truth.write({id, side, std::int64_t{eye->iris.ex}, std::int64_t{eye->iris.ey},
                   std::int64_t{eye->iris.er}, std::int64_t{eye->pupil.px},
                   std::int64_t{eye->pupil.py}, std::int64_t{eye->pupil.pr}});
      roi.write({id, std::int64_t{r.x}, std::int64_t{r.y}, std::int64_t{r.w},
                 std::int64_t{r.h}, side});
      manifest.write({id, id + ".png", side, std::int64_t{r.x}, std::int64_t{r.y},
                      std::int64_t{r.w}, std::int64_t{r.h}, std::int64_t{eye->iris.ex},
                      std::int64_t{eye->iris.ey}, std::int64_t{eye->iris.er},
                      std::int64_t{eye->pupil.px}, std::int64_t{eye->pupil.py},
                      std::int64_t{eye->pupil.pr}});
    }
  }
  truth_file.flush();
  roi_file.flush();
  manifest_file.flush();
  if (!truth_file || !roi_file || !manifest_file) {
    throw Error(ErrorCode::IoError, dir.string() + ": csv write failed");
  }
  (void)config;
  out << "wrote " << count << " samples to " << dir.string() << '\n';
  return kOk;
}

int cmd_maskdump(int r, std::ostream& out) {
  out << build_mask(r).render();
  return kOk;
}

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument:
    case ErrorCode::RadiusTooSmall:
      return kBadUsage;
    default:
      return kDataError;
  }
}

std::string one_line(std::string text) {
  std::replace(text.begin(), text.end(), '\n', ' ');
  std::replace(text.begin(), text.end(), '\r', ' ');
  return text;
}

}  // namespace

int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out,
        std::ostream& err) {
  RunConfig config;
  std::string roi_mode = "centered";
  std::string format = "csv";

  const CLI::Range kAtLeastOne(1, std::numeric_limits<int>::max());
  const CLI::Range kNonNegative(0, std::numeric_limits<int>::max());

  CLI::App app{"Iris and pupil detection for low-resolution eye images", "pupilscope"};
  app.set_config("--config", "", "key=value settings file (flags take precedence)");
  app.fallthrough();
  app.require_subcommand(1);
  app.add_option("--roi-mode", roi_mode, "centered | jittered | file")
      ->check(CLI::IsMember({"centered", "jittered", "file"}));
  app.add_option("--roi-pad", config.roi_pad, "pixels added around each eye box")
      ->check(kNonNegative);
  app.add_option("--jitter-seed", config.jitter_seed, "seed for jittered eye boxes");
  app.add_option("--roi-file", config.roi_file, "CSV of sample_id,x,y,w,h,side");
  app.add_option("--r-min", config.r_min, "smallest iris radius (0: from box width)")
      ->check(kNonNegative);
  app.add_option("--r-max", config.r_max, "largest iris radius (0: from box width)")
      ->check(kNonNegative);
  app.add_option("--stride", config.stride, "iris center grid stride")
      ->check(kAtLeastOne);
  app.add_option("--frame-stride", config.frame_stride, "process every n-th frame")
      ->check(kAtLeastOne);
  app.add_option("--neighborhood", config.neighborhood,
                 "pupil center search half-size (default: round(er/4), min 1)")
      ->check(kNonNegative);
  app.add_option("--window", config.window, "frames per selection window")
      ->check(kAtLeastOne);
  app.add_option("--workers", config.workers, "worker threads")->check(kAtLeastOne);
  app.add_option("--format", format, "csv | jsonl")->check(CLI::IsMember({"csv", "jsonl"}));
  app.add_option("--tolerances", config.tolerances, "tolerance list for A_T")
      ->delimiter(',')
      ->check(CLI::PositiveNumber);

  std::vector<std::string> inputs;
  auto* detect = app.add_subcommand("detect", "detect irises and pupils per frame");
  detect->add_option("inputs", inputs, "image files or directories")->required();

  app.add_subcommand("stream", "best-frame selection over paths read from stdin");

  std::string eval_dir;
  std::string eval_kind = "bioid";
  auto* eval = app.add_subcommand("eval", "evaluate against a dataset");
  eval->add_option("dataset", eval_dir, "dataset directory")->required();
  eval->add_option("--kind", eval_kind, "bioid | pupil-csv | synth-manifest")
      ->check(CLI::IsMember({"bioid", "pupil-csv", "synth-manifest"}));

  int synth_count = 1;
  std::string synth_preset = "clean";
  std::uint64_t synth_seed = 0;
  std::string synth_out;
  auto* synth = app.add_subcommand("synth", "write synthetic two-eye images");
  synth->add_option("--count", synth_count, "number of images")->check(kAtLeastOne);
  synth->add_option("--preset", synth_preset, "clean | noisy")
      ->check(CLI::IsMember({"clean", "noisy"}));
  synth->add_option("--seed", synth_seed, "generator seed");
  synth->add_option("--out", synth_out, "output directory")->required();

  int mask_r = 0;
  auto* maskdump = app.add_subcommand("maskdump", "print the mask label grid");
  maskdump->add_option("r", mask_r, "iris radius")->required();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: BAD_USAGE: " << one_line(e.what()) << '\n';
    return kBadUsage;
  }

  try {
    config.roi_mode = parse_roi_mode(roi_mode);
    config.format = format == "jsonl" ? Format::Jsonl : Format::Csv;
    if (config.r_min == 1) {
      throw Error(ErrorCode::RadiusTooSmall, "--r-min must be 0 or >= 2");
    }
    if (config.r_min > 0 && config.r_max > 0 && config.r_max < config.r_min) {
      throw Error(ErrorCode::InvalidArgument, "--r-max must be >= --r-min");
    }
    if (*detect) return cmd_detect(inputs, config, out);
    if (app.got_subcommand("stream")) return cmd_stream(config, in, out);
    if (*eval) return cmd_eval(eval_dir, eval_kind, config, out);
    if (*synth) return cmd_synth(synth_count, synth_preset, synth_seed, synth_out, config, out);
    if (*maskdump) return cmd_maskdump(mask_r, out);
  } catch (const Error& e) {
    out.flush();
    err << "error: " << error_code_name(e.code()) << ": " << one_line(e.what()) << '\n';
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    out.flush();
    err << "error: INTERNAL: " << one_line(e.what()) << '\n';
    return kInternal;
  }
  err << "error: BAD_USAGE: no subcommand\n";
  return kBadUsage;
}

}  // namespace pupilscope::cli
