#include <set>

#include <json.hpp>

#include "mlcslm/error.hpp"
#include "mlcslm/io.hpp"

namespace mlcslm {

namespace {

using Where = FormatError::Where;
using nlohmann::json;

json parse_json_array(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw FormatError(std::string("invalid JSON: ") + e.what());
  }
  if (!doc.is_array()) throw FormatError("top-level value must be an array");
  return doc;
}

const json& require(const json& obj, const char* key, std::size_t index) {
  const auto it = obj.find(key);
  if (it == obj.end())
    throw FormatError(std::string("missing key \"") + key + "\"", Where::kIndex, index);
  return *it;
}

std::string require_string(const json& obj, const char* key, std::size_t index) {
  const json& v = require(obj, key, index);
  if (!v.is_string())
    throw FormatError(std::string("\"") + key + "\" must be a string", Where::kIndex, index);
  return v.get<std::string>();
}

double require_number(const json& obj, const char* key, std::size_t index) {
  const json& v = require(obj, key, index);
  if (!v.is_number())
    throw FormatError(std::string("\"") + key + "\" must be a number", Where::kIndex, index);
  return v.get<double>();
}

std::string resolve(const std::filesystem::path& base, const std::string& p) {
  const std::filesystem::path path(p);
  if (path.is_absolute()) return path.lexically_normal().string();
  return (base / path).lexically_normal().string();
}

}  // namespace

std::vector<Segment> parse_seglst(std::string_view text) {
  const json doc = parse_json_array(text);
  std::vector<Segment> out;
  out.reserve(doc.size());
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const json& obj = doc[i];
    if (!obj.is_object()) throw FormatError("element must be an object", Where::kIndex, i);
    Segment s;
    s.session_id = require_string(obj, "session_id", i);
    s.speaker = require_string(obj, "speaker", i);
    s.start = require_number(obj, "start_time", i);
    s.end = require_number(obj, "end_time", i);
    s.text = require_string(obj, "words", i);
    if (obj.contains("language")) {
      const std::string lang = require_string(obj, "language", i);
      if (lang.empty()) throw FormatError("empty language", Where::kIndex, i);
      s.language = LanguageId(lang);
    }
    if (auto v = validate_segment(s)) throw FormatError(*v, Where::kIndex, i);
    out.push_back(std::move(s));
  }
  return out;
}

std::string write_seglst(std::span<const Segment> segments) {
  if (segments.empty()) return "[]";
  std::string out = "[\n";
  for (std::size_t i = 0; i < segments.size(); ++i) {
    const Segment& s = segments[i];
    if (!s.text) throw Error("segment " + std::to_string(i) + " has no text");
    nlohmann::ordered_json obj;
    obj["session_id"] = s.session_id;
    obj["speaker"] = s.speaker;
    obj["start_time"] = s.start;
    obj["end_time"] = s.end;
    obj["words"] = *s.text;
    if (s.language) obj["language"] = s.language->str();
    try {
      out += "  " + obj.dump();
    } catch (const json::exception& e) {
      throw Error("segment " + std::to_string(i) + ": " + e.what());
    }
    out += i + 1 < segments.size() ? ",\n" : "\n";
  }
  out += "]";
  return out;
}

std::vector<Session> parse_manifest(std::string_view text,
                                    const std::filesystem::path& base_dir) {
  const json doc = parse_json_array(text);
  std::vector<Session> out;
  std::set<std::string> seen;
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const json& obj = doc[i];
    if (!obj.is_object()) throw FormatError("element must be an object", Where::kIndex, i);
    std::string id = require_string(obj, "session_id", i);
    if (id.empty()) throw FormatError("empty session_id", Where::kIndex, i);
    if (!seen.insert(id).second)
      throw FormatError("duplicate session_id '" + id + "'", Where::kIndex, i);
    const std::string audio = require_string(obj, "audio", i);
    const std::string lang = require_string(obj, "language", i);
    if (lang.empty()) throw FormatError("empty language", Where::kIndex, i);
    Session s(std::move(id), resolve(base_dir, audio), LanguageId(lang));
    if (obj.contains("reference"))
      s.set_reference_path(resolve(base_dir, require_string(obj, "reference", i)));
    if (obj.contains("rttm"))
      s.set_rttm_path(resolve(base_dir, require_string(obj, "rttm", i)));
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<Session> load_manifest(const std::filesystem::path& path) {
  return parse_manifest(read_file(path), path.parent_path());
}

}  // namespace mlcslm
