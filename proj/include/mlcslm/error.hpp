#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace mlcslm {

// Thrown for invalid arguments and violated domain invariants.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input text or bytes. `location` is a 1-based line number for
// line-oriented formats, a 0-based array index for JSON arrays, or a byte
// offset for the binary archive; kind() says which.
class FormatError : public Error {
 public:
  enum class Where { kLine, kIndex, kOffset, kNone };

  FormatError(const std::string& what, Where where = Where::kNone,
              std::size_t location = 0)
      : Error(decorate(what, where, location)), where_(where),
        location_(location) {}

  Where kind() const { return where_; }
  std::size_t location() const { return location_; }

 private:
  static std::string decorate(const std::string& what, Where where,
                              std::size_t location) {
    switch (where) {
      case Where::kLine: return "line " + std::to_string(location) + ": " + what;
      case Where::kIndex: return "index " + std::to_string(location) + ": " + what;
      case Where::kOffset: return "offset " + std::to_string(location) + ": " + what;
      case Where::kNone: break;
    }
    return what;
  }

  Where where_;
  std::size_t location_;
};

}  // namespace mlcslm
