#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iterator>
#include <sstream>

#include "mlcslm/error.hpp"
#include "mlcslm/io.hpp"

namespace mlcslm {

namespace {

using Where = FormatError::Where;

// Calls fn(line_number, line) for each LF-separated line, CR stripped.
template <typename Fn>
void for_each_line(std::string_view text, Fn&& fn) {
  std::size_t line_no = 0;
  while (!text.empty()) {
    ++line_no;
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    fn(line_no, line);
  }
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    const std::size_t b = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t') ++i;
    if (i > b) fields.push_back(line.substr(b, i - b));
  }
  return fields;
}

bool parse_double(std::string_view s, double& out) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
  return res.ec == std::errc{} && res.ptr == s.data() + s.size() &&
         std::isfinite(out);
}

std::string fixed3(long long millis) {
  std::ostringstream os;
  if (millis < 0) {
    os << '-';
    millis = -millis;
  }
  os << millis / 1000 << '.' << std::setw(3) << std::setfill('0') << millis % 1000;
  return os.str();
}

}  // namespace

std::vector<Segment> parse_rttm(std::string_view text) {
  std::vector<Segment> out;
  for_each_line(text, [&](std::size_t line_no, std::string_view line) {
    const auto fields = split_fields(line);
    if (fields.empty() || fields[0].starts_with(";;")) return;
    if (fields[0] != "SPEAKER") return;
    if (fields.size() < 9)
      throw FormatError("expected at least 9 fields, got " +
                            std::to_string(fields.size()),
                        Where::kLine, line_no);
    double onset = 0, dur = 0;
    if (!parse_double(fields[3], onset))
      throw FormatError("bad onset '" + std::string(fields[3]) + "'", Where::kLine, line_no);
    if (!parse_double(fields[4], dur))
      throw FormatError("bad duration '" + std::string(fields[4]) + "'", Where::kLine, line_no);
    if (dur <= 0) throw FormatError("non-positive duration", Where::kLine, line_no);
    if (onset < 0) throw FormatError("negative onset", Where::kLine, line_no);
    Segment s{std::string(fields[1]), std::string(fields[7]), onset, onset + dur,
              std::nullopt, std::nullopt};
    if (auto v = validate_segment(s)) throw FormatError(*v, Where::kLine, line_no);
    out.push_back(std::move(s));
  });
  return out;
}

std::vector<Segment> parse_rttm(std::istream& in) {
  const std::string text{std::istreambuf_iterator<char>(in), {}};
  return parse_rttm(text);
}

std::string write_rttm(std::span<const Segment> segments) {
  std::string out;
  for (const auto& s : segments) {
    const long long on = std::llround(s.start * 1000.0);
    // Sub-millisecond segments still get a parseable positive duration.
    const long long dur = std::max(1LL, std::llround(s.end * 1000.0) - on);
    out += "SPEAKER " + s.session_id + " 1 " + fixed3(on) + " " + fixed3(dur) +
           " <NA> <NA> " + s.speaker + " <NA> <NA>\n";
  }
  return out;
}

std::vector<Trial> parse_trials(std::string_view text) {
  std::vector<Trial> out;
  for_each_line(text, [&](std::size_t line_no, std::string_view line) {
    const auto fields = split_fields(line);
    if (fields.empty()) return;
    if (fields.size() != 2)
      throw FormatError("expected '<label> <score>'", Where::kLine, line_no);
    Trial t;
    if (fields[0] == "target") t.target = true;
    else if (fields[0] != "nontarget")
      throw FormatError("unknown label '" + std::string(fields[0]) + "'",
                        Where::kLine, line_no);
    if (!parse_double(fields[1], t.score))
      throw FormatError("bad score '" + std::string(fields[1]) + "'", Where::kLine, line_no);
    out.push_back(t);
  });
  return out;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  if (in.bad()) throw Error("read failed: " + path.string());
  return os.str();
}

void write_file(const std::filesystem::path& path, std::string_view contents) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) throw Error("write failed: " + path.string());
}

}  // namespace mlcslm
