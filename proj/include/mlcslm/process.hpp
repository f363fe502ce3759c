#pragma once

#include <chrono>
#include <map>
#include <string>
#include <string_view>

#include <sys/types.h>

#include "mlcslm/error.hpp"

namespace mlcslm {

class ProcessError : public Error {
 public:
  using Error::Error;
};

using EnvVars = std::map<std::string, std::string>;

// A child running `/bin/sh -c command` with pipes on stdin and stdout;
// stderr is inherited. Line-oriented request/response exchange.
class ChildProcess {
 public:
  explicit ChildProcess(const std::string& command, const EnvVars& extra_env = {});
  ~ChildProcess();

  ChildProcess(const ChildProcess&) = delete;
  ChildProcess& operator=(const ChildProcess&) = delete;

  // Writes `line` plus LF and waits for one LF-terminated line of output.
  // Throws ProcessError on timeout, EOF or a broken pipe.
  std::string exchange(std::string_view line, std::chrono::milliseconds timeout);

  // Writes all of `input`, closes stdin and returns everything the child
  // prints until it closes stdout.
  std::string communicate(std::string_view input, std::chrono::milliseconds timeout);

  // Closes stdin and reaps the child, killing it if it has not exited
  // within `grace`. Returns the exit status (128 + signal when killed).
  int finish(std::chrono::milliseconds grace = std::chrono::milliseconds(2000));

  pid_t pid() const { return pid_; }

 private:
  void write_all(std::string_view data);
  void kill_and_reap();

  pid_t pid_ = -1;
  int to_child_ = -1;
  int from_child_ = -1;
  std::string pending_;  // bytes read past the last returned line
  bool reaped_ = false;
  int status_ = 0;
};

// Runs `command` to completion feeding `input` on stdin; returns stdout.
// Non-zero exit or timeout throws ProcessError.
std::string run_capture(const std::string& command, std::string_view input,
                        const EnvVars& extra_env, std::chrono::milliseconds timeout);

}  // namespace mlcslm
