#include "stua/csv_io.hpp"

#include "stua/errors.hpp"

#include <charconv>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace stua::io {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r' || s.back() == '\n')) {
    s.remove_suffix(1);
  }
  return s;
}

std::vector<std::string> split(std::string_view line, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(sep, start);
    out.emplace_back(trim(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

CsvTable read_csv(const std::filesystem::path& path, std::string_view expected_header) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::Io, "cannot open " + path.string());
  CsvTable table;
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  const std::vector<std::string> header = split(expected_header);
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view = trim(line);
    if (line_no == 1 && view.size() >= 3 && static_cast<unsigned char>(view[0]) == 0xEF) view.remove_prefix(3);
    if (view.empty()) continue;
    auto fields = split(view);
    if (!header_seen) {
      if (fields != header) {
        fail(ErrorKind::Parse, path.string() + ": expected header '" + std::string(expected_header) + "'");
      }
      header_seen = true;
      continue;
    }
    if (fields.size() != header.size()) {
      fail(ErrorKind::Parse, path.string() + ":" + std::to_string(line_no) + ": expected " +
                                 std::to_string(header.size()) + " fields");
    }
    table.rows.push_back(std::move(fields));
    table.line_numbers.push_back(line_no);
  }
  if (!header_seen) fail(ErrorKind::Parse, path.string() + ": missing header");
  return table;
}

double parse_double(std::string_view text, const std::string& context) {
  double value = 0.0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end || text.empty()) {
    fail(ErrorKind::Parse, context + ": not a number '" + std::string(text) + "'");
  }
  return value;
}

long parse_long(std::string_view text, const std::string& context) {
  long value = 0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end || text.empty()) {
    fail(ErrorKind::Parse, context + ": not an integer '" + std::string(text) + "'");
  }
  return value;
}

std::int64_t parse_timestamp(std::string_view text, const std::string& context) {
  if (!text.empty() && text.back() == 'Z') text.remove_suffix(1);
  int y = 0, mo = 0, d = 0, h = 0, mi = 0, s = 0;
  char tail = 0;
  const std::string buf(text);
  const int n = std::sscanf(buf.c_str(), "%4d-%2d-%2dT%2d:%2d:%2d%c", &y, &mo, &d, &h, &mi, &s, &tail);
  if (n != 6 || buf.size() != 19) fail(ErrorKind::Parse, context + ": bad timestamp '" + buf + "'");
  using namespace std::chrono;
  const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
  if (!ymd.ok() || h > 23 || mi > 59 || s > 59) fail(ErrorKind::Parse, context + ": invalid date '" + buf + "'");
  const auto days_since = sys_days{ymd}.time_since_epoch().count();
  return static_cast<std::int64_t>(days_since) * 86400 + h * 3600 + mi * 60 + s;
}

std::string format_timestamp(std::int64_t seconds) {
  using namespace std::chrono;
  std::int64_t days_since = seconds / 86400;
  std::int64_t rem = seconds % 86400;
  if (rem < 0) {
    rem += 86400;
    --days_since;
  }
  const year_month_day ymd{sys_days{days{days_since}}};
  char out[32];
  std::snprintf(out, sizeof out, "%04d-%02u-%02uT%02d:%02d:%02dZ", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()), static_cast<int>(rem / 3600),
                static_cast<int>((rem % 3600) / 60), static_cast<int>(rem % 60));
  return out;
}

std::string format_double(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  if (ec != std::errc()) return "nan";
  return std::string(buf, ptr);
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorKind::Io, "cannot write " + tmp.string());
    out << content;
    if (!out) fail(ErrorKind::Io, "write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) fail(ErrorKind::Io, "rename to " + path.string() + " failed: " + ec.message());
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::Io, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace stua::io
