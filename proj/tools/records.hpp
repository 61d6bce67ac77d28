#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <variant>
#include <vector>

namespace pupilscope::cli {

enum class Format { Csv, Jsonl };

/// Empty, text, integer or real value of one output column.
using Field = std::variant<std::monostate, std::string, std::int64_t, double>;

/// Append-only CSV (RFC 4180, one header line) or JSON-lines writer.
/// Reals are printed with fixed six decimals so reports are byte-stable.
class RecordWriter {
 public:
  RecordWriter(std::ostream& out, Format format, std::vector<std::string> columns);

  void write(const std::vector<Field>& values);

 private:
  std::ostream& out_;
  Format format_;
  std::vector<std::string> columns_;
  bool header_written_{false};
};

std::string format_real(double value);
std::string csv_escape(const std::string& text);

}  // namespace pupilscope::cli
