#pragma once

#include <charconv>
#include <string>

namespace valsel {

// 17 significant digits: enough to round-trip any double exactly.
inline std::string fmt_g17(double x) {
  char buf[64];
  auto [ptr, ec] =
      std::to_chars(buf, buf + sizeof(buf), x, std::chars_format::general, 17);
  (void)ec;
  return std::string(buf, ptr);
}

}  // namespace valsel
