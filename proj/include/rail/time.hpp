#pragma once

#include <stdexcept>
#include <string>

namespace rail {

// All schedule arithmetic is integer minutes since midnight of day 0.
// Horizons past midnight keep counting up (1440 = 00:00 of day 1).
using Minutes = int;

constexpr Minutes kMinutesPerDay = 1440;

// Parses "HH:MM" (hours may exceed 23 for multi-day horizons).
Minutes parse_hhmm(const std::string& text);

// Formats minutes as HH:MM without rounding; hours grow past 23.
std::string format_hhmm(Minutes m);

// Time-of-day component, used for busy-window checks.
inline Minutes time_of_day(Minutes m) {
  Minutes d = m % kMinutesPerDay;
  return d < 0 ? d + kMinutesPerDay : d;
}

}  // namespace rail
