#include "mlcslm/process.hpp"

#include <algorithm>
#include <cerrno>
#include <csignal>
#include <cstring>
#include <mutex>
#include <thread>
#include <vector>

#include <fcntl.h>
#include <poll.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

extern char** environ;

namespace mlcslm {

namespace {

using Clock = std::chrono::steady_clock;

void ignore_sigpipe() {
  static std::once_flag once;
  std::call_once(once, [] { std::signal(SIGPIPE, SIG_IGN); });
}

std::string errno_text(const char* what) {
  return std::string(what) + ": " + std::strerror(errno);
}

int decode_status(int status) {
  if (WIFEXITED(status)) return WEXITSTATUS(status);
  if (WIFSIGNALED(status)) return 128 + WTERMSIG(status);
  return -1;
}

// Environment block with `extra` overriding inherited variables.
std::vector<std::string> build_env(const EnvVars& extra) {
  std::vector<std::string> env;
  for (char** e = environ; e && *e; ++e) {
    const std::string_view kv(*e);
    const auto key = kv.substr(0, kv.find('='));
    if (!extra.contains(std::string(key))) env.emplace_back(kv);
  }
  for (const auto& [k, v] : extra) env.push_back(k + "=" + v);
  return env;
}

}  // namespace

ChildProcess::ChildProcess(const std::string& command, const EnvVars& extra_env) {
  ignore_sigpipe();
  int in_pipe[2], out_pipe[2];
  if (pipe2(in_pipe, O_CLOEXEC) != 0) throw ProcessError(errno_text("pipe"));
  if (pipe2(out_pipe, O_CLOEXEC) != 0) {
    close(in_pipe[0]);
    close(in_pipe[1]);
    throw ProcessError(errno_text("pipe"));
  }
  posix_spawn_file_actions_t actions;
  posix_spawn_file_actions_init(&actions);
  posix_spawn_file_actions_adddup2(&actions, in_pipe[0], STDIN_FILENO);
  posix_spawn_file_actions_adddup2(&actions, out_pipe[1], STDOUT_FILENO);

  const auto env = build_env(extra_env);
  std::vector<char*> envp;
  for (const auto& e : env) envp.push_back(const_cast<char*>(e.c_str()));
  envp.push_back(nullptr);
  std::string cmd = command;
  char sh[] = "/bin/sh", dash_c[] = "-c";
  char* argv[] = {sh, dash_c, cmd.data(), nullptr};

  const int rc = posix_spawn(&pid_, "/bin/sh", &actions, nullptr, argv, envp.data());
  posix_spawn_file_actions_destroy(&actions);
  close(in_pipe[0]);
  close(out_pipe[1]);
  if (rc != 0) {
    close(in_pipe[1]);
    close(out_pipe[0]);
    errno = rc;
    throw ProcessError(errno_text("posix_spawn"));
  }
  to_child_ = in_pipe[1];
  from_child_ = out_pipe[0];
}

ChildProcess::~ChildProcess() {
  if (to_child_ >= 0) close(to_child_);
  if (from_child_ >= 0) close(from_child_);
  if (!reaped_) kill_and_reap();
}

void ChildProcess::write_all(std::string_view data) {
  while (!data.empty()) {
    const ssize_t n = write(to_child_, data.data(), data.size());
    if (n < 0) {
      if (errno == EINTR) continue;
      throw ProcessError(errno == EPIPE ? "backend closed its input" : errno_text("write"));
    }
    data.remove_prefix(static_cast<std::size_t>(n));
  }
}

std::string ChildProcess::exchange(std::string_view line, std::chrono::milliseconds timeout) {
  if (to_child_ < 0) throw ProcessError("process input already closed");
  std::string msg(line);
  msg.push_back('\n');
  write_all(msg);

  const auto deadline = Clock::now() + timeout;
  char buf[65536];
  for (;;) {
    if (const auto nl = pending_.find('\n'); nl != std::string::npos) {
      std::string out = pending_.substr(0, nl);
      pending_.erase(0, nl + 1);
      if (!out.empty() && out.back() == '\r') out.pop_back();
      return out;
    }
    const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - Clock::now());
    if (left.count() <= 0) throw ProcessError("backend timed out");
    pollfd pfd{from_child_, POLLIN, 0};
    const int pr = poll(&pfd, 1, static_cast<int>(left.count()));
    if (pr < 0) {
      if (errno == EINTR) continue;
      throw ProcessError(errno_text("poll"));
    }
    if (pr == 0) continue;
    const ssize_t n = read(from_child_, buf, sizeof buf);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw ProcessError(errno_text("read"));
    }
    if (n == 0) throw ProcessError("backend exited without answering");
    pending_.append(buf, static_cast<std::size_t>(n));
  }
}

void ChildProcess::kill_and_reap() {
  if (pid_ <= 0 || reaped_) return;
  ::kill(pid_, SIGKILL);
  int status = 0;
  while (waitpid(pid_, &status, 0) < 0 && errno == EINTR) {
  }
  status_ = decode_status(status);
  reaped_ = true;
}

int ChildProcess::finish(std::chrono::milliseconds grace) {
  if (to_child_ >= 0) {
    close(to_child_);
    to_child_ = -1;
  }
  if (reaped_) return status_;
  const auto deadline = Clock::now() + grace;
  for (;;) {
    int status = 0;
    const pid_t r = waitpid(pid_, &status, WNOHANG);
    if (r == pid_) {
      reaped_ = true;
      status_ = decode_status(status);
      return status_;
    }
    if (r < 0 && errno != EINTR) {
      reaped_ = true;
      return status_ = -1;
    }
    if (Clock::now() >= deadline) {
      kill_and_reap();
      return status_;
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(5));
  }
}

std::string ChildProcess::communicate(std::string_view input,
                                      std::chrono::milliseconds timeout) {
  if (to_child_ < 0) throw ProcessError("process input already closed");
  const auto deadline = Clock::now() + timeout;
  std::string collected = std::move(pending_);
  pending_.clear();
  if (input.empty()) {
    close(to_child_);
    to_child_ = -1;
  }
  char buf[65536];
  // Feed stdin and drain stdout together so large outputs cannot deadlock.
  for (;;) {
    pollfd fds[2];
    nfds_t n = 0;
    fds[n++] = {from_child_, POLLIN, 0};
    if (to_child_ >= 0) fds[n++] = {to_child_, POLLOUT, 0};
    const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - Clock::now());
    if (left.count() <= 0) throw ProcessError("command timed out");
    const int pr = poll(fds, n, static_cast<int>(left.count()));
    if (pr < 0) {
      if (errno == EINTR) continue;
      throw ProcessError(errno_text("poll"));
    }
    if (to_child_ >= 0 && (fds[1].revents & (POLLOUT | POLLERR | POLLHUP))) {
      const ssize_t w = write(to_child_, input.data(), std::min<std::size_t>(input.size(), 65536));
      if (w > 0) input.remove_prefix(static_cast<std::size_t>(w));
      if ((w < 0 && errno != EINTR) || input.empty()) {
        close(to_child_);
        to_child_ = -1;
      }
    }
    if (fds[0].revents & (POLLIN | POLLHUP | POLLERR)) {
      const ssize_t r = read(from_child_, buf, sizeof buf);
      if (r < 0) {
        if (errno == EINTR) continue;
        throw ProcessError(errno_text("read"));
      }
      if (r == 0) return collected;
      collected.append(buf, static_cast<std::size_t>(r));
    }
  }
}

std::string run_capture(const std::string& command, std::string_view input,
                        const EnvVars& extra_env, std::chrono::milliseconds timeout) {
  ChildProcess child(command, extra_env);
  std::string out = child.communicate(input, timeout);
  const int status = child.finish(timeout);
  if (status != 0)
    throw ProcessError("command exited with status " + std::to_string(status) + ": " + command);
  return out;
}

}  // namespace mlcslm
