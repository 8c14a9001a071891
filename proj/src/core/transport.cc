/*
 * Copyright 2026 The attnfilter Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "core/transport.h"

#include <cerrno>
#include <csignal>
#include <cstring>
#include <thread>

#include <fcntl.h>
#include <netdb.h>
#include <poll.h>
#include <pthread.h>
#include <spawn.h>
#include <sys/socket.h>
#include <sys/wait.h>
#include <unistd.h>

#include "core/error.h"

extern char** environ;

namespace attnfilter {
namespace {

std::string Errno(const char* what) { return std::string(what) + ": " + std::strerror(errno); }

// Writes with SIGPIPE blocked for this thread, so a vanished peer surfaces as
// EPIPE instead of terminating the process.
class ScopedSigpipeBlock {
 public:
  ScopedSigpipeBlock() {
    sigset_t set;
    sigemptyset(&set);
    sigaddset(&set, SIGPIPE);
    sigset_t pending;
    sigpending(&pending);
    already_pending_ = sigismember(&pending, SIGPIPE) == 1;
    pthread_sigmask(SIG_BLOCK, &set, &old_);
  }
  ~ScopedSigpipeBlock() {
    if (!already_pending_) {
      sigset_t set;
      sigemptyset(&set);
      sigaddset(&set, SIGPIPE);
      const timespec zero{0, 0};
      while (sigtimedwait(&set, nullptr, &zero) > 0) {
      }
    }
    pthread_sigmask(SIG_SETMASK, &old_, nullptr);
  }

 private:
  sigset_t old_;
  bool already_pending_ = false;
};

}  // namespace

FdTransport::FdTransport(int read_fd, int write_fd) : read_fd_(read_fd), write_fd_(write_fd) {}

FdTransport::~FdTransport() {
  CloseWrite();
  CloseRead();
}

void FdTransport::CloseWrite() {
  if (write_fd_ >= 0 && write_fd_ != read_fd_) ::close(write_fd_);
  if (write_fd_ == read_fd_) {
    if (write_fd_ >= 0) ::shutdown(write_fd_, SHUT_WR);
  }
  write_fd_ = -1;
}

void FdTransport::CloseRead() {
  if (read_fd_ >= 0) ::close(read_fd_);
  read_fd_ = -1;
}

void FdTransport::WriteAll(std::string_view bytes) {
  if (write_fd_ < 0) Fail(ErrorCode::kOracle, "oracle transport is closed");
  ScopedSigpipeBlock guard;
  std::size_t done = 0;
  while (done < bytes.size()) {
    const ssize_t n = ::write(write_fd_, bytes.data() + done, bytes.size() - done);
    if (n < 0) {
      if (errno == EINTR) continue;
      Fail(ErrorCode::kOracle, Errno("oracle write failed"));
    }
    done += static_cast<std::size_t>(n);
  }
}

std::string FdTransport::ReadExact(std::size_t n, std::chrono::milliseconds timeout) {
  if (read_fd_ < 0) Fail(ErrorCode::kOracle, "oracle transport is closed");
  std::string out(n, '\0');
  std::size_t done = 0;
  const auto deadline = std::chrono::steady_clock::now() + timeout;
  while (done < n) {
    const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(
        deadline - std::chrono::steady_clock::now());
    if (left.count() <= 0) Fail(ErrorCode::kOracle, "oracle timed out");
    pollfd pfd{read_fd_, POLLIN, 0};
    const int ready = ::poll(&pfd, 1, static_cast<int>(left.count()));
    if (ready < 0) {
      if (errno == EINTR) continue;
      Fail(ErrorCode::kOracle, Errno("oracle poll failed"));
    }
    if (ready == 0) Fail(ErrorCode::kOracle, "oracle timed out");
    const ssize_t got = ::read(read_fd_, out.data() + done, n - done);
    if (got < 0) {
      if (errno == EINTR || errno == EAGAIN) continue;
      Fail(ErrorCode::kOracle, Errno("oracle read failed"));
    }
    if (got == 0) Fail(ErrorCode::kOracle, "oracle closed the stream");
    done += static_cast<std::size_t>(got);
  }
  return out;
}

ChildProcessTransport::ChildProcessTransport(int read_fd, int write_fd, pid_t pid)
    : FdTransport(read_fd, write_fd), pid_(pid) {}

std::unique_ptr<ChildProcessTransport> ChildProcessTransport::Spawn(
    const std::vector<std::string>& argv) {
  if (argv.empty()) Fail(ErrorCode::kInvalidArgument, "empty oracle command");
  int to_child[2], from_child[2];
  if (::pipe2(to_child, O_CLOEXEC) != 0) Fail(ErrorCode::kOracle, Errno("pipe"));
  if (::pipe2(from_child, O_CLOEXEC) != 0) {
    ::close(to_child[0]);
    ::close(to_child[1]);
    Fail(ErrorCode::kOracle, Errno("pipe"));
  }
  posix_spawn_file_actions_t actions;
  posix_spawn_file_actions_init(&actions);
  posix_spawn_file_actions_adddup2(&actions, to_child[0], STDIN_FILENO);
  posix_spawn_file_actions_adddup2(&actions, from_child[1], STDOUT_FILENO);

  std::vector<char*> args;
  for (const std::string& a : argv) args.push_back(const_cast<char*>(a.c_str()));
  args.push_back(nullptr);
  pid_t pid = 0;
  const int rc = ::posix_spawnp(&pid, args[0], &actions, nullptr, args.data(), environ);
  posix_spawn_file_actions_destroy(&actions);
  ::close(to_child[0]);
  ::close(from_child[1]);
  if (rc != 0) {
    ::close(to_child[1]);
    ::close(from_child[0]);
    Fail(ErrorCode::kOracle, "cannot spawn oracle '" + argv[0] + "': " + std::strerror(rc));
  }
  return std::unique_ptr<ChildProcessTransport>(
      new ChildProcessTransport(from_child[0], to_child[1], pid));
}

ChildProcessTransport::~ChildProcessTransport() {
  // EOF on stdin asks the oracle to exit; escalate if it lingers.
  CloseWrite();
  CloseRead();
  int status = 0;
  for (int i = 0; i < 200; ++i) {
    if (::waitpid(pid_, &status, WNOHANG) != 0) return;
    std::this_thread::sleep_for(std::chrono::milliseconds(10));
  }
  ::kill(pid_, SIGKILL);
  ::waitpid(pid_, &status, 0);
}

TcpTransport::TcpTransport(int fd) : FdTransport(fd, fd) {}

std::unique_ptr<TcpTransport> TcpTransport::Connect(const std::string& host, int port) {
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  const std::string service = std::to_string(port);
  const int rc = ::getaddrinfo(host.c_str(), service.c_str(), &hints, &res);
  if (rc != 0) {
    Fail(ErrorCode::kOracle, "cannot resolve '" + host + "': " + ::gai_strerror(rc));
  }
  int fd = -1;
  for (addrinfo* ai = res; ai != nullptr; ai = ai->ai_next) {
    fd = ::socket(ai->ai_family, ai->ai_socktype | SOCK_CLOEXEC, ai->ai_protocol);
    if (fd < 0) continue;
    if (::connect(fd, ai->ai_addr, ai->ai_addrlen) == 0) break;
    ::close(fd);
    fd = -1;
  }
  ::freeaddrinfo(res);
  if (fd < 0) Fail(ErrorCode::kOracle, "cannot connect to " + host + ":" + service);
  return std::unique_ptr<TcpTransport>(new TcpTransport(fd));
}

std::vector<std::string> SplitCommandLine(std::string_view line) {
  std::vector<std::string> out;
  std::string current;
  bool in_token = false;
  char quote = 0;
  for (char c : line) {
    if (quote != 0) {
      if (c == quote) {
        quote = 0;
      } else {
        current.push_back(c);
      }
    } else if (c == '\'' || c == '"') {
      quote = c;
      in_token = true;
    } else if (c == ' ' || c == '\t' || c == '\n') {
      if (in_token) out.push_back(std::move(current));
      current.clear();
      in_token = false;
    } else {
      current.push_back(c);
      in_token = true;
    }
  }
  if (quote != 0) Fail(ErrorCode::kInvalidArgument, "unterminated quote in oracle command");
  if (in_token) out.push_back(std::move(current));
  return out;
}

std::unique_ptr<Transport> OpenTransport(std::string_view spec) {
  if (spec.starts_with("cmd:")) return ChildProcessTransport::Spawn(SplitCommandLine(spec.substr(4)));
  if (spec.starts_with("tcp:")) {
    const std::string_view rest = spec.substr(4);
    const std::size_t colon = rest.rfind(':');
    if (colon == std::string_view::npos || colon == 0) {
      Fail(ErrorCode::kInvalidArgument, "expected tcp:<host>:<port>, got '" + std::string(spec) + "'");
    }
    int port = 0;
    try {
      port = std::stoi(std::string(rest.substr(colon + 1)));
    } catch (const std::exception&) {
      Fail(ErrorCode::kInvalidArgument, "bad port in '" + std::string(spec) + "'");
    }
    return TcpTransport::Connect(std::string(rest.substr(0, colon)), port);
  }
  Fail(ErrorCode::kInvalidArgument,
       "oracle spec must be cmd:<argv> or tcp:<host>:<port>, got '" + std::string(spec) + "'");
}

}  // namespace attnfilter
