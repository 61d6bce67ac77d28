#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace pupilscope::detail {

inline std::string_view trim(std::string_view s) {
  const auto ws = " \t\r\n";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) {
      if (pos < text.size()) out.push_back(text.substr(pos));
      break;
    }
    out.push_back(text.substr(pos, nl - pos));
    pos = nl + 1;
  }
  return out;
}

// Plain comma split with surrounding whitespace trimmed; quoted fields
// with embedded commas are not used by any of our inputs.
inline std::vector<std::string> split_csv(std::string_view line) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (true) {
    const auto comma = line.find(',', pos);
    const auto field = line.substr(pos, comma == std::string_view::npos
                                            ? std::string_view::npos
                                            : comma - pos);
    auto t = trim(field);
    if (t.size() >= 2 && t.front() == '"' && t.back() == '"') {
      t = t.substr(1, t.size() - 2);
    }
    out.emplace_back(t);
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  return out;
}

}  // namespace pupilscope::detail
