/*
 * Copyright 2026 The hdrbench Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Child process execution through /bin/sh with resource accounting.
// POSIX only.

#pragma once

#include <fcntl.h>
#include <sched.h>
#include <sys/resource.h>
#include <sys/time.h>
#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <chrono>
#include <map>
#include <string>
#include <string_view>

#include "hdrbench/error.hpp"

namespace hdrbench {

struct ProcessOptions {
  bool capture_stdout = false;
  /// Restrict the child to the first CPU of the current affinity mask.
  bool pin_to_single_cpu = false;
};

struct ProcessResult {
  int exit_code = 0;
  std::string stdout_text;
  double user_seconds = 0.0;
  double system_seconds = 0.0;
  double wall_seconds = 0.0;
  long max_rss_kb = 0;
  bool pinned = false;
  std::chrono::steady_clock::time_point started;
  std::chrono::steady_clock::time_point finished;

  double cpu_seconds() const { return user_seconds + system_seconds; }
};

namespace detail {

inline double to_seconds(const timeval& tv) { return static_cast<double>(tv.tv_sec) + tv.tv_usec * 1e-6; }

class Pipe {
 public:
  Pipe() {
    if (::pipe2(fds_, O_CLOEXEC) != 0) {
      throw ProcessError(std::string("pipe failed: ") + std::strerror(errno), -1);
    }
  }
  ~Pipe() {
    close_read();
    close_write();
  }
  Pipe(const Pipe&) = delete;
  Pipe& operator=(const Pipe&) = delete;

  int read_end() const { return fds_[0]; }
  int write_end() const { return fds_[1]; }
  void close_read() {
    if (fds_[0] >= 0) ::close(fds_[0]);
    fds_[0] = -1;
  }
  void close_write() {
    if (fds_[1] >= 0) ::close(fds_[1]);
    fds_[1] = -1;
  }

  std::string drain() {
    std::string out;
    char buf[4096];
    for (;;) {
      ssize_t n = ::read(fds_[0], buf, sizeof(buf));
      if (n > 0) {
        out.append(buf, static_cast<std::size_t>(n));
      } else if (n == 0 || errno != EINTR) {
        break;
      }
    }
    return out;
  }

 private:
  int fds_[2] = {-1, -1};
};

// Status bytes written by the child before exec.
inline constexpr char kPinFailed = 'p';
inline constexpr char kExecFailed = 'e';

}  // namespace detail

/// Runs `command` with /bin/sh -c and waits for it. A nonzero exit is
/// reported in the result, not thrown; only failure to start throws.
inline ProcessResult run_shell(const std::string& command, const ProcessOptions& options = {}) {
  detail::Pipe status;
  detail::Pipe output;

  int pin_cpu = -1;
  if (options.pin_to_single_cpu) {
    cpu_set_t mask;
    CPU_ZERO(&mask);
    if (::sched_getaffinity(0, sizeof(mask), &mask) == 0) {
      for (int cpu = 0; cpu < CPU_SETSIZE; ++cpu) {
        if (CPU_ISSET(cpu, &mask)) {
          pin_cpu = cpu;
          break;
        }
      }
    }
  }

  ProcessResult result;
  result.started = std::chrono::steady_clock::now();
  pid_t pid = ::fork();
  if (pid < 0) {
    throw ProcessError(std::string("fork failed: ") + std::strerror(errno), -1);
  }
  if (pid == 0) {
    if (options.pin_to_single_cpu) {
      bool ok = false;
      if (pin_cpu >= 0) {
        cpu_set_t one;
        CPU_ZERO(&one);
        CPU_SET(pin_cpu, &one);
        ok = ::sched_setaffinity(0, sizeof(one), &one) == 0;
      }
      if (!ok) {
        [[maybe_unused]] auto n = ::write(status.write_end(), &detail::kPinFailed, 1);
      }
    }
    if (options.capture_stdout) {
      ::dup2(output.write_end(), STDOUT_FILENO);
    }
    const char* argv[] = {"/bin/sh", "-c", command.c_str(), nullptr};
    ::execv("/bin/sh", const_cast<char* const*>(argv));
    [[maybe_unused]] auto n = ::write(status.write_end(), &detail::kExecFailed, 1);
    ::_exit(127);
  }

  status.close_write();
  output.close_write();
  if (options.capture_stdout) {
    result.stdout_text = output.drain();
  }

  int wstatus = 0;
  rusage usage{};
  while (::wait4(pid, &wstatus, 0, &usage) < 0) {
    if (errno != EINTR) {
      throw ProcessError(std::string("wait4 failed: ") + std::strerror(errno), -1);
    }
  }
  result.finished = std::chrono::steady_clock::now();
  result.wall_seconds = std::chrono::duration<double>(result.finished - result.started).count();
  result.user_seconds = detail::to_seconds(usage.ru_utime);
  result.system_seconds = detail::to_seconds(usage.ru_stime);
  result.max_rss_kb = usage.ru_maxrss;

  const std::string flags = status.drain();
  if (flags.find(detail::kExecFailed) != std::string::npos) {
    throw ProcessError("could not execute /bin/sh for: " + command, 127);
  }
  result.pinned = options.pin_to_single_cpu && flags.find(detail::kPinFailed) == std::string::npos;

  if (WIFEXITED(wstatus)) {
    result.exit_code = WEXITSTATUS(wstatus);
  } else if (WIFSIGNALED(wstatus)) {
    result.exit_code = 128 + WTERMSIG(wstatus);
  }
  return result;
}

/// Single-quotes `s` for /bin/sh.
inline std::string shell_quote(std::string_view s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\'') {
      out += "'\\''";
    } else {
      out += c;
    }
  }
  out += '\'';
  return out;
}

/// Replaces every `{KEY}` in `tpl` with its value. Placeholders without a
/// binding are left untouched.
inline std::string expand_template(std::string_view tpl, const std::map<std::string, std::string>& values) {
  std::string out;
  out.reserve(tpl.size());
  std::size_t i = 0;
  while (i < tpl.size()) {
    if (tpl[i] == '{') {
      auto close = tpl.find('}', i + 1);
      if (close != std::string_view::npos) {
        auto it = values.find(std::string(tpl.substr(i + 1, close - i - 1)));
        if (it != values.end()) {
          out += it->second;
          i = close + 1;
          continue;
        }
      }
    }
    out += tpl[i++];
  }
  return out;
}

}  // namespace hdrbench
