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

#ifndef ATTNFILTER_CORE_TRANSPORT_H_
#define ATTNFILTER_CORE_TRANSPORT_H_

#include <chrono>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include <sys/types.h>

namespace attnfilter {

// Bidirectional byte stream to a model oracle. Failures (EOF, timeout, I/O
// errors) throw Error(kOracle).
class Transport {
 public:
  virtual ~Transport() = default;
  virtual void WriteAll(std::string_view bytes) = 0;
  virtual std::string ReadExact(std::size_t n, std::chrono::milliseconds timeout) = 0;
};

// Stream over a pair of file descriptors (identical for pipes and sockets).
class FdTransport : public Transport {
 public:
  FdTransport(int read_fd, int write_fd);
  ~FdTransport() override;
  FdTransport(const FdTransport&) = delete;
  FdTransport& operator=(const FdTransport&) = delete;

  void WriteAll(std::string_view bytes) override;
  std::string ReadExact(std::size_t n, std::chrono::milliseconds timeout) override;

 protected:
  void CloseWrite();
  void CloseRead();

 private:
  int read_fd_;
  int write_fd_;
};

// Child process speaking the protocol on its stdin/stdout.
class ChildProcessTransport : public FdTransport {
 public:
  static std::unique_ptr<ChildProcessTransport> Spawn(const std::vector<std::string>& argv);
  ~ChildProcessTransport() override;

 private:
  ChildProcessTransport(int read_fd, int write_fd, pid_t pid);
  pid_t pid_;
};

class TcpTransport : public FdTransport {
 public:
  static std::unique_ptr<TcpTransport> Connect(const std::string& host, int port);

 private:
  explicit TcpTransport(int fd);
};

// Splits a command line on whitespace; single and double quotes group.
std::vector<std::string> SplitCommandLine(std::string_view line);

// "cmd:<argv>" spawns a child process, "tcp:<host>:<port>" connects a socket.
// Throws Error(kInvalidArgument) on an unrecognized spec.
std::unique_ptr<Transport> OpenTransport(std::string_view spec);

}  // namespace attnfilter

#endif  // ATTNFILTER_CORE_TRANSPORT_H_
