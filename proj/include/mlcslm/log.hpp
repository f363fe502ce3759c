#pragma once

#include <spdlog/spdlog.h>

namespace mlcslm {

// Sets the spdlog level from MLCSLM_LOG (error|warn|info|debug, default
// warn) and routes output to stderr. Safe to call more than once.
void init_logging();

}  // namespace mlcslm
