#pragma once

#include <chrono>
#include <string>
#include <string_view>
#include <vector>

#include "mlcslm/process.hpp"
#include "mlcslm/triplets.hpp"

namespace mlcslm {

// The transcription backend is an external process speaking
// newline-delimited JSON. Request line:
//   {"id", "audio", "language", "window": [s, e],
//    "triplets": [{"speaker", "start", "end", "embedding": [...]}]}
// Response line:
//   {"id", "segments": [{"speaker", "start", "end", "text"}]}

inline constexpr Seconds kWindowTolerance = 0.1;
inline constexpr std::chrono::milliseconds kDefaultBackendTimeout{300'000};

class ProtocolError : public Error {
 public:
  using Error::Error;
};

std::string encode_backend_request(const DecodingRequest& request);

// Validates a response against its request: matching id, speakers drawn
// from the request's triplets, intervals inside the window +/- 0.1 s.
// Segments carry the request's session id and language.
std::vector<Segment> decode_backend_response(std::string_view line,
                                             const DecodingRequest& request);

// Sends one request over a running backend and decodes the answer.
std::vector<Segment> backend_invoke(const DecodingRequest& request, ChildProcess& backend,
                                    std::chrono::milliseconds timeout = kDefaultBackendTimeout);

// Spawns `command` for a single request, then shuts it down.
std::vector<Segment> backend_invoke(const DecodingRequest& request, const std::string& command,
                                    std::chrono::milliseconds timeout = kDefaultBackendTimeout);

}  // namespace mlcslm
