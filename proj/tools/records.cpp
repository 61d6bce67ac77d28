#include "records.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

#include <json.hpp>

namespace pupilscope::cli {

std::string format_real(double value) {
  if (!std::isfinite(value)) return std::isnan(value) ? "nan" : (value > 0 ? "inf" : "-inf");
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", value);
  std::string s(buf);
  if (s == "-0.000000") s = "0.000000";
  return s;
}

std::string csv_escape(const std::string& text) {
  if (text.find_first_of(",\"\r\n") == std::string::npos) return text;
  std::string out = "\"";
  for (const char c : text) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

RecordWriter::RecordWriter(std::ostream& out, Format format,
                           std::vector<std::string> columns)
    : out_(out), format_(format), columns_(std::move(columns)) {}

void RecordWriter::write(const std::vector<Field>& values) {
  if (values.size() != columns_.size()) {
    throw std::logic_error("record width does not match the column list");
  }
  if (format_ == Format::Csv) {
    if (!header_written_) {
      for (std::size_t i = 0; i < columns_.size(); ++i) {
        out_ << (i ? "," : "") << csv_escape(columns_[i]);
      }
      out_ << '\n';
      header_written_ = true;
    }
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (i) out_ << ',';
      std::visit(
          [&](const auto& v) {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, std::string>) {
              out_ << csv_escape(v);
            } else if constexpr (std::is_same_v<T, std::int64_t>) {
              out_ << v;
            } else if constexpr (std::is_same_v<T, double>) {
              out_ << format_real(v);
            }
          },
          values[i]);
    }
    out_ << '\n';
    return;
  }

  // Keys keep column order.
  nlohmann::ordered_json obj = nlohmann::ordered_json::object();
  for (std::size_t i = 0; i < values.size(); ++i) {
    std::visit(
        [&](const auto& v) {
          using T = std::decay_t<decltype(v)>;
          if constexpr (std::is_same_v<T, std::monostate>) {
            obj[columns_[i]] = nullptr;
          } else if constexpr (std::is_same_v<T, double>) {
            // Same rounding as CSV, emitted as a JSON number.
            obj[columns_[i]] = std::isfinite(v) ? nlohmann::ordered_json::parse(format_real(v))
                                                : nlohmann::ordered_json(nullptr);
          } else {
            obj[columns_[i]] = v;
          }
        },
        values[i]);
  }
  out_ << obj.dump() << '\n';
}

}  // namespace pupilscope::cli
