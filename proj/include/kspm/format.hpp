#ifndef KSPM_FORMAT_HPP
#define KSPM_FORMAT_HPP

#include <charconv>
#include <string>

namespace kspm::detail {

/// Shortest text that reads back to the same double.
inline std::string format_double(double v) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

}  // namespace kspm::detail

#endif  // KSPM_FORMAT_HPP
