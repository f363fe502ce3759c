#include "mlcslm/backend.hpp"

#include <cmath>
#include <set>

#include <json.hpp>

namespace mlcslm {

std::string encode_backend_request(const DecodingRequest& request) {
  return request_to_json(request).dump();
}

std::vector<Segment> decode_backend_response(std::string_view line,
                                             const DecodingRequest& request) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw ProtocolError(std::string("malformed response: ") + e.what());
  }
  if (!doc.is_object()) throw ProtocolError("response is not a JSON object");
  if (!doc.contains("id") || !doc["id"].is_string())
    throw ProtocolError("response lacks a string \"id\"");
  if (doc["id"].get<std::string>() != request.id)
    throw ProtocolError("response id '" + doc["id"].get<std::string>() +
                        "' does not match request '" + request.id + "'");
  if (!doc.contains("segments") || !doc["segments"].is_array())
    throw ProtocolError("response lacks a \"segments\" array");

  std::set<std::string> speakers;
  for (const auto& t : request.triplets) speakers.insert(t.speaker());

  std::vector<Segment> out;
  std::size_t i = 0;
  for (const auto& s : doc["segments"]) {
    const std::string where = "segment " + std::to_string(i++) + ": ";
    if (!s.is_object()) throw ProtocolError(where + "not an object");
    const auto field = [&](const char* key, auto check) -> const nlohmann::json& {
      const auto it = s.find(key);
      if (it == s.end() || !check(*it))
        throw ProtocolError(where + "missing or mistyped \"" + key + "\"");
      return *it;
    };
    const auto is_str = [](const nlohmann::json& v) { return v.is_string(); };
    const auto is_num = [](const nlohmann::json& v) { return v.is_number(); };
    Segment seg;
    seg.session_id = request.session_id;
    seg.speaker = field("speaker", is_str).get<std::string>();
    seg.start = field("start", is_num).get<double>();
    seg.end = field("end", is_num).get<double>();
    seg.text = field("text", is_str).get<std::string>();
    seg.language = request.language;
    if (!speakers.contains(seg.speaker))
      throw ProtocolError(where + "speaker '" + seg.speaker + "' is not among the request's triplets");
    if (auto v = validate_segment(seg)) throw ProtocolError(where + *v);
    if (seg.start < request.window_start - kWindowTolerance ||
        seg.end > request.window_end + kWindowTolerance)
      throw ProtocolError(where + "interval outside the request window");
    out.push_back(std::move(seg));
  }
  return out;
}

std::vector<Segment> backend_invoke(const DecodingRequest& request, ChildProcess& backend,
                                    std::chrono::milliseconds timeout) {
  const std::string reply = backend.exchange(encode_backend_request(request), timeout);
  return decode_backend_response(reply, request);
}

std::vector<Segment> backend_invoke(const DecodingRequest& request, const std::string& command,
                                    std::chrono::milliseconds timeout) {
  ChildProcess backend(command);
  auto out = backend_invoke(request, backend, timeout);
  backend.finish();
  return out;
}

}  // namespace mlcslm
