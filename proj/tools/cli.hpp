#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "pupilscope/eval.hpp"
#include "pupilscope/selector.hpp"
#include "records.hpp"

namespace pupilscope::cli {

enum ExitCode : int { kOk = 0, kBadUsage = 2, kDataError = 3, kInternal = 4 };

/// Settings shared by every subcommand. Precedence: flags, then the
/// --config key=value file, then these defaults.
struct RunConfig {
  RoiMode roi_mode{RoiMode::Centered};
  int roi_pad{0};
  std::uint64_t jitter_seed{0};
  std::string roi_file;
  int r_min{0};  // 0: derived from the eye box width
  int r_max{0};
  int stride{1};
  int frame_stride{1};
  int neighborhood{-1};  // -1: derived from the iris radius
  long window{300};
  int workers{1};
  Format format{Format::Csv};
  std::vector<double> tolerances{0.05, 0.1, 0.25};
};

/// Detection of both eyes plus the frame confidence. Per-eye failures are
/// left empty and listed in `failures` as "<side>:<ERROR_CODE>".
FrameResult process_frame(const Frame& frame, const RoiPair& rois,
                          const RunConfig& config, std::string frame_id,
                          std::vector<std::string>* failures = nullptr);

/// Entry point used by main() and the tests. `args` excludes argv[0].
int run(const std::vector<std::string>& args, std::istream& in,
        std::ostream& out, std::ostream& err);

}  // namespace pupilscope::cli
