#pragma once

// Civil-time helpers and calendar covariate derivation. Timestamps are UTC
// epoch seconds paired with one fixed UTC offset; no DST arithmetic happens
// here.

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace gamevo {

struct CivilTime {
  int year = 1970;
  unsigned month = 1; // 1..12
  unsigned day = 1;   // 1..31
  int hour = 0;
  int minute = 0;
  int second = 0;
  int weekday = 4; // ISO: Monday = 1 .. Sunday = 7
};

CivilTime to_civil(std::int64_t utc_seconds, int offset_seconds);
std::int64_t from_civil(int year, unsigned month, unsigned day, int hour, int minute, int second, int offset_seconds);
// Days since 1970-01-01 of the local calendar date.
std::int64_t local_day_number(std::int64_t utc_seconds, int offset_seconds);

struct ParsedTimestamp {
  std::int64_t utc_seconds = 0;
  int offset_seconds = 0;
};

// Accepts YYYY-MM-DDTHH:MM[:SS](Z|+HH:MM|-HH:MM); a space may replace 'T'.
ParsedTimestamp parse_iso8601(std::string_view text);
std::string format_iso8601(std::int64_t utc_seconds, int offset_seconds);
// "+01:00" / "-05:30" / "Z"
int parse_utc_offset(std::string_view text);

// Linear position in the local civil year: 0 on Jan 1 00:00, 1 on Dec 31 23:59.
double position_in_year(std::int64_t utc_seconds, int offset_seconds);

// date,label file: one labelled local date per line.
struct DateCalendar {
  std::map<std::int64_t, std::string> labels; // local day number -> label
  bool empty() const { return labels.empty(); }
};

DateCalendar load_date_calendar(const std::string &path);
DateCalendar parse_date_calendar(std::string_view csv_text);

// Default break modalities; code 0 is "none".
std::vector<std::string> default_break_labels();

struct CalendarColumn {
  std::string name;
  bool categorical = false;
  int modalities = 0;  // categorical
  double period = 0.0; // cyclic numeric when > 0
  std::vector<double> values;
};

struct CalendarOptions {
  const DateCalendar *holidays = nullptr;
  const DateCalendar *breaks = nullptr;
  std::vector<std::string> break_labels = default_break_labels();
};

// Hour (cyclic, 24), Day (1..7), PosYear (cyclic, 1), Month (1..12),
// Weekend (1 weekday / 2 weekend), and Holiday / Break when calendars are
// given. Timestamps must be strictly increasing with a uniform step.
std::vector<CalendarColumn> derive_calendar(std::span<const std::int64_t> timestamps, int offset_seconds,
                                            const CalendarOptions &options = {});

// Per local day maximum and minimum of a numeric series.
std::pair<std::vector<double>, std::vector<double>> daily_extrema(std::span<const std::int64_t> timestamps,
                                                                  int offset_seconds, std::span<const double> values);

} // namespace gamevo
