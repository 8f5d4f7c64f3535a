#include "rail/time.hpp"

#include <cstdio>

#include "rail/error.hpp"

namespace rail {

Minutes parse_hhmm(const std::string& text) {
  int h = 0, m = 0;
  char extra = 0;
  int n = std::sscanf(text.c_str(), "%d:%d%c", &h, &m, &extra);
  if (n != 2 || h < 0 || m < 0 || m > 59) {
    throw Error(ErrorCode::ParseError, "bad time-of-day '" + text + "'");
  }
  return h * 60 + m;
}

std::string format_hhmm(Minutes m) {
  if (m < 0) throw Error(ErrorCode::ParseError, "negative time");
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%02d:%02d", m / 60, m % 60);
  return buf;
}

}  // namespace rail
