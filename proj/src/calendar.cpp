#include "gamevo/calendar.hpp"

#include "gamevo/error.hpp"
#include "gamevo/text.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <sstream>

namespace gamevo {
namespace {

constexpr std::int64_t kDay = 86400;

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

std::int64_t days_from_ymd(int y, unsigned m, unsigned d) {
  using namespace std::chrono;
  const sys_days sd = year_month_day{year{y}, month{m}, day{d}};
  return sd.time_since_epoch().count();
}

int two_digits(std::string_view s, std::size_t pos, std::string_view text) {
  if (pos + 2 > s.size() || !std::isdigit(static_cast<unsigned char>(s[pos])) ||
      !std::isdigit(static_cast<unsigned char>(s[pos + 1]))) {
    throw DataError("malformed timestamp '" + std::string(text) + "'");
  }
  return (s[pos] - '0') * 10 + (s[pos + 1] - '0');
}

} // namespace

CivilTime to_civil(std::int64_t utc_seconds, int offset_seconds) {
  using namespace std::chrono;
  const std::int64_t local = utc_seconds + offset_seconds;
  const std::int64_t days = floor_div(local, kDay);
  const std::int64_t secs = local - days * kDay;
  const sys_days sd{std::chrono::days{days}};
  const year_month_day ymd{sd};
  const weekday wd{sd};
  CivilTime c;
  c.year = static_cast<int>(ymd.year());
  c.month = static_cast<unsigned>(ymd.month());
  c.day = static_cast<unsigned>(ymd.day());
  c.hour = static_cast<int>(secs / 3600);
  c.minute = static_cast<int>((secs % 3600) / 60);
  c.second = static_cast<int>(secs % 60);
  c.weekday = static_cast<int>(wd.iso_encoding());
  return c;
}

std::int64_t from_civil(int year, unsigned month, unsigned day, int hour, int minute, int second, int offset_seconds) {
  return days_from_ymd(year, month, day) * kDay + hour * 3600 + minute * 60 + second - offset_seconds;
}

std::int64_t local_day_number(std::int64_t utc_seconds, int offset_seconds) {
  return floor_div(utc_seconds + offset_seconds, kDay);
}

int parse_utc_offset(std::string_view text) {
  text = trim(text);
  if (text == "Z" || text == "z" || text.empty()) return 0;
  if ((text[0] != '+' && text[0] != '-') || text.size() != 6 || text[3] != ':') {
    throw DataError("malformed UTC offset '" + std::string(text) + "'");
  }
  const int h = two_digits(text, 1, text);
  const int m = two_digits(text, 4, text);
  const int v = h * 3600 + m * 60;
  return text[0] == '-' ? -v : v;
}

ParsedTimestamp parse_iso8601(std::string_view text) {
  const std::string_view s = trim(text);
  // YYYY-MM-DDTHH:MM
  if (s.size() < 16 || s[4] != '-' || s[7] != '-' || (s[10] != 'T' && s[10] != ' ') || s[13] != ':') {
    throw DataError("malformed timestamp '" + std::string(text) + "'");
  }
  const auto year = parse_int(s.substr(0, 4));
  if (!year) throw DataError("malformed timestamp '" + std::string(text) + "'");
  const int month = two_digits(s, 5, text);
  const int day = two_digits(s, 8, text);
  const int hour = two_digits(s, 11, text);
  const int minute = two_digits(s, 14, text);
  std::size_t pos = 16;
  int second = 0;
  if (pos < s.size() && s[pos] == ':') {
    second = two_digits(s, pos + 1, text);
    pos += 3;
  }
  const int offset = parse_utc_offset(s.substr(pos));
  using namespace std::chrono;
  const year_month_day ymd{std::chrono::year{static_cast<int>(*year)}, std::chrono::month{static_cast<unsigned>(month)},
                           std::chrono::day{static_cast<unsigned>(day)}};
  if (!ymd.ok() || hour > 23 || minute > 59 || second > 59) {
    throw DataError("invalid date/time in '" + std::string(text) + "'");
  }
  return {from_civil(static_cast<int>(*year), month, day, hour, minute, second, offset), offset};
}

std::string format_iso8601(std::int64_t utc_seconds, int offset_seconds) {
  const CivilTime c = to_civil(utc_seconds, offset_seconds);
  char buf[40];
  const int off = offset_seconds < 0 ? -offset_seconds : offset_seconds;
  std::snprintf(buf, sizeof(buf), "%04d-%02u-%02uT%02d:%02d:%02d%c%02d:%02d", c.year, c.month, c.day, c.hour,
                c.minute, c.second, offset_seconds < 0 ? '-' : '+', off / 3600, (off % 3600) / 60);
  return buf;
}

double position_in_year(std::int64_t utc_seconds, int offset_seconds) {
  const CivilTime c = to_civil(utc_seconds, offset_seconds);
  const std::int64_t start = from_civil(c.year, 1, 1, 0, 0, 0, offset_seconds);
  const std::int64_t last_minute = from_civil(c.year, 12, 31, 23, 59, 0, offset_seconds);
  const double p = static_cast<double>(utc_seconds - start) / static_cast<double>(last_minute - start);
  return std::clamp(p, 0.0, 1.0);
}

DateCalendar parse_date_calendar(std::string_view csv_text) {
  DateCalendar cal;
  std::istringstream in{std::string(csv_text)};
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string_view l = trim(line);
    if (l.empty() || l[0] == '#') continue;
    const auto comma = l.find(',');
    if (comma == std::string_view::npos) {
      throw DataError("calendar line " + std::to_string(lineno) + ": expected date,label");
    }
    const std::string_view date = trim(l.substr(0, comma));
    const std::string_view label = trim(l.substr(comma + 1));
    if (lineno == 1 && date == "date") continue;
    if (date.size() != 10 || date[4] != '-' || date[7] != '-') {
      throw DataError("calendar line " + std::to_string(lineno) + ": malformed date '" + std::string(date) + "'");
    }
    const auto y = parse_int(date.substr(0, 4));
    const auto m = parse_int(date.substr(5, 2));
    const auto d = parse_int(date.substr(8, 2));
    if (!y || !m || !d) {
      throw DataError("calendar line " + std::to_string(lineno) + ": malformed date '" + std::string(date) + "'");
    }
    cal.labels[days_from_ymd(static_cast<int>(*y), static_cast<unsigned>(*m), static_cast<unsigned>(*d))] =
        std::string(label);
  }
  return cal;
}

DateCalendar load_date_calendar(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open calendar file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_date_calendar(ss.str());
}

std::vector<std::string> default_break_labels() {
  return {"winter-time", "summer-time", "august", "christmas", "other-school-holiday"};
}

std::pair<std::vector<double>, std::vector<double>> daily_extrema(std::span<const std::int64_t> timestamps,
                                                                  int offset_seconds, std::span<const double> values) {
  const std::size_t n = timestamps.size();
  std::vector<double> hi(n), lo(n);
  std::size_t start = 0;
  while (start < n) {
    const std::int64_t day = local_day_number(timestamps[start], offset_seconds);
    std::size_t end = start;
    double mx = values[start], mn = values[start];
    while (end < n && local_day_number(timestamps[end], offset_seconds) == day) {
      mx = std::max(mx, values[end]);
      mn = std::min(mn, values[end]);
      ++end;
    }
    std::fill(hi.begin() + start, hi.begin() + end, mx);
    std::fill(lo.begin() + start, lo.begin() + end, mn);
    start = end;
  }
  return {hi, lo};
}

std::vector<CalendarColumn> derive_calendar(std::span<const std::int64_t> timestamps, int offset_seconds,
                                            const CalendarOptions &options) {
  const std::size_t n = timestamps.size();
  if (n >= 2) {
    const std::int64_t step = timestamps[1] - timestamps[0];
    if (step <= 0) throw DataError("timestamps must be strictly increasing");
    for (std::size_t i = 1; i < n; ++i) {
      const std::int64_t d = timestamps[i] - timestamps[i - 1];
      if (d <= 0) throw DataError("timestamps must be strictly increasing at " + format_iso8601(timestamps[i], offset_seconds));
      if (d != step) throw DataError("non-uniform time step at " + format_iso8601(timestamps[i], offset_seconds));
    }
  }
  CalendarColumn hour{"Hour", false, 0, 24.0, std::vector<double>(n)};
  CalendarColumn day{"Day", true, 7, 0.0, std::vector<double>(n)};
  CalendarColumn pos{"PosYear", false, 0, 1.0, std::vector<double>(n)};
  CalendarColumn month{"Month", true, 12, 0.0, std::vector<double>(n)};
  CalendarColumn weekend{"Weekend", true, 2, 0.0, std::vector<double>(n)};
  for (std::size_t i = 0; i < n; ++i) {
    const CivilTime c = to_civil(timestamps[i], offset_seconds);
    hour.values[i] = c.hour + c.minute / 60.0;
    day.values[i] = c.weekday;
    pos.values[i] = position_in_year(timestamps[i], offset_seconds);
    month.values[i] = c.month;
    weekend.values[i] = c.weekday >= 6 ? 2 : 1;
  }
  std::vector<CalendarColumn> out{std::move(hour), std::move(day), std::move(pos), std::move(month),
                                  std::move(weekend)};
  if (options.holidays) {
    CalendarColumn holiday{"Holiday", true, 2, 0.0, std::vector<double>(n)};
    for (std::size_t i = 0; i < n; ++i) {
      holiday.values[i] = options.holidays->labels.count(local_day_number(timestamps[i], offset_seconds)) ? 2 : 1;
    }
    out.push_back(std::move(holiday));
  }
  if (options.breaks) {
    std::vector<std::string> labels = options.break_labels;
    for (const auto &[d, label] : options.breaks->labels) {
      if (label != "none" && std::find(labels.begin(), labels.end(), label) == labels.end()) {
        labels.push_back(label);
      }
    }
    CalendarColumn brk{"Break", true, static_cast<int>(labels.size()), 0.0, std::vector<double>(n, 0.0)};
    for (std::size_t i = 0; i < n; ++i) {
      auto it = options.breaks->labels.find(local_day_number(timestamps[i], offset_seconds));
      if (it == options.breaks->labels.end() || it->second == "none") continue;
      brk.values[i] = static_cast<double>(std::find(labels.begin(), labels.end(), it->second) - labels.begin() + 1);
    }
    if (brk.modalities < 2) brk.modalities = 2;
    out.push_back(std::move(brk));
  }
  return out;
}

} // namespace gamevo
