#pragma once

#include <initializer_list>
#include <ostream>
#include <string_view>

#include <fmt/core.h>

namespace tfrw::csv {

// 17 significant digits round-trip every double exactly.
inline void write_row(std::ostream& os, std::initializer_list<double> values) {
  bool first = true;
  for (double v : values) {
    if (!first) os << ',';
    os << fmt::format("{:.17g}", v);
    first = false;
  }
  os << '\n';
}

inline void write_header(std::ostream& os, std::string_view header) {
  os << header << '\n';
}

}  // namespace tfrw::csv
