/*
 * Copyright 2026 The CID Authors.
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

// Client for classifiers running in a separate process.
//
// The process speaks a line-delimited JSON protocol on its stdin/stdout:
//
//   -> {"op":"hello"}                      <- {"op":"hello","d":<int>}
//   -> {"op":"predict","x":[[...],...]}    <- {"op":"proba","p":[...]}
//   -> {"op":"bye"}                        (stream closed afterwards)
//
// One JSON object per line. Every probability must lie in [0, 1] and the
// reply batch must have one entry per request row.

#pragma once

#include <fcntl.h>
#include <signal.h>
#include <sys/socket.h>
#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cmath>
#include <cstring>
#include <memory>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"

#include "cid/error.hpp"
#include "cid/log.hpp"
#include "cid/model.hpp"

namespace cid {

// A live session with one external classifier process. The session is
// stateful: calls are serialized internally, and callers wanting parallel
// predictions should open one session per worker.
class ExternalClassifier : public Classifier {
 public:
  explicit ExternalClassifier(std::vector<std::string> command)
      : command_(std::move(command)) {
    if (command_.empty() || command_.front().empty()) {
      throw std::invalid_argument("external model command is empty");
    }
    launch();
    handshake();
  }

  ExternalClassifier(const ExternalClassifier&) = delete;
  ExternalClassifier& operator=(const ExternalClassifier&) = delete;

  ~ExternalClassifier() override { shutdown(); }

  std::size_t dim() const override { return d_; }

  double predict_proba(std::span<const double> x) const override {
    check_input(x);
    RowMatrix one(dim());
    one.append_row(x);
    return predict_proba_batch(one).front();
  }

  std::vector<double> predict_proba_batch(const RowMatrix& xs) const override {
    if (xs.empty()) return {};
    for (std::size_t i = 0; i < xs.rows(); ++i) check_input(xs.row(i));
    nlohmann::json rows = nlohmann::json::array();
    for (std::size_t i = 0; i < xs.rows(); ++i) {
      const auto r = xs.row(i);
      rows.push_back(std::vector<double>(r.begin(), r.end()));
    }
    const nlohmann::json request = {{"op", "predict"}, {"x", std::move(rows)}};

    std::lock_guard<std::mutex> lock(mu_);
    const nlohmann::json reply = round_trip(request);
    if (reply.value("op", "") != "proba" || !reply.contains("p") ||
        !reply.at("p").is_array()) {
      throw ProtocolError("external model: expected {\"op\":\"proba\",\"p\":[...]}, got " +
                          reply.dump());
    }
    const auto& p = reply.at("p");
    if (p.size() != xs.rows()) {
      throw ProtocolError("external model: reply has " + std::to_string(p.size()) +
                          " probabilities for a batch of " +
                          std::to_string(xs.rows()));
    }
    std::vector<double> out;
    out.reserve(p.size());
    for (const auto& v : p) {
      if (!v.is_number()) throw ProtocolError("external model: non-numeric probability " + v.dump());
      const double value = v.get<double>();
      if (!(value >= 0.0 && value <= 1.0)) {
        throw ProtocolError("external model: probability " + v.dump() +
                            " is out of range [0, 1]");
      }
      out.push_back(value);
    }
    return out;
  }

  pid_t pid() const { return pid_; }

 private:
  void launch() {
    int sv[2];
    if (::socketpair(AF_UNIX, SOCK_STREAM | SOCK_CLOEXEC, 0, sv) != 0) {
      throw ProtocolError(std::string("socketpair failed: ") + std::strerror(errno));
    }
    // Carries the exec errno back to the parent; closes on successful exec.
    int err_pipe[2];
    if (::pipe2(err_pipe, O_CLOEXEC) != 0) {
      ::close(sv[0]);
      ::close(sv[1]);
      throw ProtocolError(std::string("pipe failed: ") + std::strerror(errno));
    }
    std::vector<char*> argv;
    for (auto& s : command_) argv.push_back(s.data());
    argv.push_back(nullptr);

    pid_ = ::fork();
    if (pid_ < 0) {
      ::close(sv[0]);
      ::close(sv[1]);
      ::close(err_pipe[0]);
      ::close(err_pipe[1]);
      throw ProtocolError(std::string("fork failed: ") + std::strerror(errno));
    }
    if (pid_ == 0) {
      ::dup2(sv[1], STDIN_FILENO);
      ::dup2(sv[1], STDOUT_FILENO);
      ::execvp(argv[0], argv.data());
      const int e = errno;
      [[maybe_unused]] auto n = ::write(err_pipe[1], &e, sizeof(e));
      ::_exit(127);
    }
    ::close(sv[1]);
    ::close(err_pipe[1]);
    fd_ = sv[0];
    int child_errno = 0;
    ssize_t n;
    do {
      n = ::read(err_pipe[0], &child_errno, sizeof(child_errno));
    } while (n < 0 && errno == EINTR);
    ::close(err_pipe[0]);
    if (n == static_cast<ssize_t>(sizeof(child_errno))) {
      ::waitpid(pid_, nullptr, 0);
      pid_ = -1;
      ::close(fd_);
      fd_ = -1;
      throw ProtocolError("cannot launch external model '" + command_.front() +
                          "': " + std::strerror(child_errno));
    }
    log().debug("external model '{}' started (pid {})", command_.front(), pid_);
  }

  void handshake() {
    nlohmann::json reply;
    try {
      reply = round_trip({{"op", "hello"}});
    } catch (...) {
      shutdown();
      throw;
    }
    if (reply.value("op", "") != "hello" || !reply.contains("d") ||
        !reply.at("d").is_number_integer() || reply.at("d").get<long long>() <= 0) {
      shutdown();
      throw ProtocolError("external model: bad handshake reply " + reply.dump());
    }
    d_ = reply.at("d").get<std::size_t>();
  }

  nlohmann::json round_trip(const nlohmann::json& request) const {
    send_line(request.dump());
    const std::string line = read_line();
    try {
      auto j = nlohmann::json::parse(line);
      if (!j.is_object()) throw ProtocolError("external model: reply is not a JSON object: " + line);
      return j;
    } catch (const nlohmann::json::parse_error&) {
      throw ProtocolError("external model: malformed reply line: " + line);
    }
  }

  void send_line(const std::string& payload) const {
    std::string msg = payload;
    msg.push_back('\n');
    std::size_t off = 0;
    while (off < msg.size()) {
      const ssize_t n = ::send(fd_, msg.data() + off, msg.size() - off, MSG_NOSIGNAL);
      if (n < 0) {
        if (errno == EINTR) continue;
        throw ProtocolError("external model: process exited mid-session (write: " +
                            std::string(std::strerror(errno)) + ")" + exit_note());
      }
      off += static_cast<std::size_t>(n);
    }
  }

  std::string read_line() const {
    while (true) {
      const std::size_t nl = buffer_.find('\n');
      if (nl != std::string::npos) {
        std::string line = buffer_.substr(0, nl);
        buffer_.erase(0, nl + 1);
        if (!line.empty() && line.back() == '\r') line.pop_back();
        return line;
      }
      char chunk[4096];
      const ssize_t n = ::recv(fd_, chunk, sizeof(chunk), 0);
      if (n < 0 && errno == EINTR) continue;
      if (n <= 0) {
        throw ProtocolError("external model: process exited mid-session" + exit_note());
      }
      buffer_.append(chunk, static_cast<std::size_t>(n));
    }
  }

  std::string exit_note() const {
    if (pid_ <= 0) return "";
    int status = 0;
    for (int i = 0; i < 50; ++i) {
      const pid_t r = ::waitpid(pid_, &status, WNOHANG);
      if (r == pid_) {
        pid_ = -1;
        if (WIFEXITED(status)) return " (exit status " + std::to_string(WEXITSTATUS(status)) + ")";
        if (WIFSIGNALED(status)) return " (killed by signal " + std::to_string(WTERMSIG(status)) + ")";
        return "";
      }
      std::this_thread::sleep_for(std::chrono::milliseconds(2));
    }
    return "";
  }

  void shutdown() noexcept {
    if (fd_ >= 0) {
      const std::string bye = "{\"op\":\"bye\"}\n";
      [[maybe_unused]] auto n = ::send(fd_, bye.data(), bye.size(), MSG_NOSIGNAL);
      ::shutdown(fd_, SHUT_RDWR);
      ::close(fd_);
      fd_ = -1;
    }
    if (pid_ > 0) {
      for (int i = 0; i < 200; ++i) {
        if (::waitpid(pid_, nullptr, WNOHANG) == pid_) {
          pid_ = -1;
          return;
        }
        std::this_thread::sleep_for(std::chrono::milliseconds(5));
      }
      ::kill(pid_, SIGKILL);
      ::waitpid(pid_, nullptr, 0);
      pid_ = -1;
    }
  }

  std::vector<std::string> command_;
  mutable pid_t pid_ = -1;
  int fd_ = -1;
  std::size_t d_ = 0;
  mutable std::string buffer_;
  mutable std::mutex mu_;
};

// Splits on whitespace; no quoting.
inline std::vector<std::string> split_command(const std::string& command) {
  std::istringstream in(command);
  std::vector<std::string> out;
  for (std::string tok; in >> tok;) out.push_back(tok);
  return out;
}

inline std::unique_ptr<Classifier> connect_external(std::vector<std::string> command) {
  return std::make_unique<ExternalClassifier>(std::move(command));
}

}  // namespace cid
