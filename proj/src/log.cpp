#include "mlcslm/log.hpp"

#include <cstdlib>
#include <mutex>
#include <string_view>

#include <spdlog/sinks/stdout_sinks.h>

namespace mlcslm {

void init_logging() {
  static std::once_flag once;
  std::call_once(once, [] {
    auto logger = spdlog::stderr_logger_mt("mlcslm");
    logger->set_pattern("[%l] %v");
    spdlog::set_default_logger(logger);
  });
  spdlog::level::level_enum level = spdlog::level::warn;
  if (const char* env = std::getenv("MLCSLM_LOG")) {
    const std::string_view v(env);
    if (v == "error") level = spdlog::level::err;
    else if (v == "warn") level = spdlog::level::warn;
    else if (v == "info") level = spdlog::level::info;
    else if (v == "debug") level = spdlog::level::debug;
  }
  spdlog::set_level(level);
}

}  // namespace mlcslm
