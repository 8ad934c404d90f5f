#pragma once

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstdint>
#include <mutex>
#include <string>
#include <variant>

#include <json.hpp>

#include "mfes/config_space.hpp"
#include "mfes/errors.hpp"
#include "mfes/evaluator.hpp"

namespace mfes {

namespace detail {

inline void ignore_sigpipe_once() {
  static std::once_flag flag;
  std::call_once(flag, [] { ::signal(SIGPIPE, SIG_IGN); });
}

inline nlohmann::json param_value_to_json(const ParamValue& value) {
  if (std::holds_alternative<double>(value)) return std::get<double>(value);
  if (std::holds_alternative<std::int64_t>(value)) return std::get<std::int64_t>(value);
  return std::get<std::string>(value);
}

}  // namespace detail

inline nlohmann::json config_values_to_json(const Configuration& config) {
  nlohmann::json out = nlohmann::json::object();
  for (const auto& [name, value] : config.values()) {
    out[name] = detail::param_value_to_json(value);
  }
  return out;
}

/// Runs `command` through the shell, writes one JSON request object to its
/// standard input, and reads one JSON reply object from its standard
/// output:
///
///   stdin:  {"request_id": ..., "resource": ..., "config": {name: value, ...}}
///   stdout: {"request_id": ..., "loss": ...}
///
/// A nonzero exit, malformed reply, or timeout yields a failure marker
/// carrying the captured standard-error text. The child is killed on
/// timeout.
inline EvaluationResult subprocess_evaluate(const std::string& command,
                                            const EvaluationRequest& request,
                                            double timeout_seconds) {
  detail::ignore_sigpipe_once();

  EvaluationResult result;
  result.request_id = request.request_id;
  auto started = std::chrono::steady_clock::now();
  auto finish = [&](std::optional<double> loss, bool timed_out,
                    const std::string& error) {
    result.loss = loss;
    result.timed_out = timed_out;
    result.error = error;
    result.duration_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started)
            .count();
    return result;
  };

  // O_CLOEXEC keeps concurrently forked evaluator children from holding
  // each other's pipe ends open, which would delay EOF indefinitely.
  int in_pipe[2], out_pipe[2], err_pipe[2];
  if (::pipe2(in_pipe, O_CLOEXEC) != 0 || ::pipe2(out_pipe, O_CLOEXEC) != 0 ||
      ::pipe2(err_pipe, O_CLOEXEC) != 0) {
    return finish(std::nullopt, false, "failed to create pipes");
  }

  pid_t pid = ::fork();
  if (pid < 0) {
    for (int fd : {in_pipe[0], in_pipe[1], out_pipe[0], out_pipe[1], err_pipe[0],
                   err_pipe[1]}) {
      ::close(fd);
    }
    return finish(std::nullopt, false, "fork failed");
  }
  if (pid == 0) {
    ::dup2(in_pipe[0], STDIN_FILENO);
    ::dup2(out_pipe[1], STDOUT_FILENO);
    ::dup2(err_pipe[1], STDERR_FILENO);
    for (int fd : {in_pipe[0], in_pipe[1], out_pipe[0], out_pipe[1], err_pipe[0],
                   err_pipe[1]}) {
      ::close(fd);
    }
    ::execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
    ::_exit(127);
  }

  ::close(in_pipe[0]);
  ::close(out_pipe[1]);
  ::close(err_pipe[1]);

  nlohmann::json request_json = {{"request_id", request.request_id},
                                 {"resource", request.resource},
                                 {"config", config_values_to_json(request.config)}};
  std::string payload = request_json.dump();
  payload.push_back('\n');
  std::size_t written = 0;
  while (written < payload.size()) {
    ssize_t n = ::write(in_pipe[1], payload.data() + written,
                        payload.size() - written);
    if (n < 0) {
      if (errno == EINTR) continue;
      break;  // child may have exited without reading; its output decides
    }
    written += static_cast<std::size_t>(n);
  }
  ::close(in_pipe[1]);

  auto deadline = started + std::chrono::duration_cast<
                                std::chrono::steady_clock::duration>(
                                std::chrono::duration<double>(timeout_seconds));
  std::string out_text, err_text;
  bool timed_out = false;
  struct pollfd fds[2] = {{out_pipe[0], POLLIN, 0}, {err_pipe[0], POLLIN, 0}};
  bool open_fds[2] = {true, true};
  std::string* sinks[2] = {&out_text, &err_text};
  char buffer[4096];

  while (open_fds[0] || open_fds[1]) {
    auto now = std::chrono::steady_clock::now();
    if (timeout_seconds > 0.0 && now >= deadline) {
      timed_out = true;
      break;
    }
    int wait_ms = 50;
    if (timeout_seconds > 0.0) {
      auto remaining =
          std::chrono::duration_cast<std::chrono::milliseconds>(deadline - now)
              .count();
      wait_ms = static_cast<int>(std::min<long long>(remaining + 1, 50));
    }
    for (int i = 0; i < 2; ++i) fds[i].events = open_fds[i] ? POLLIN : 0;
    int rc = ::poll(fds, 2, wait_ms);
    if (rc < 0) {
      if (errno == EINTR) continue;
      break;
    }
    for (int i = 0; i < 2; ++i) {
      if (!open_fds[i] || !(fds[i].revents & (POLLIN | POLLHUP))) continue;
      ssize_t n = ::read(fds[i].fd, buffer, sizeof(buffer));
      if (n > 0) {
        sinks[i]->append(buffer, static_cast<std::size_t>(n));
      } else if (n == 0 || (n < 0 && errno != EINTR)) {
        open_fds[i] = false;
      }
    }
  }

  int status = 0;
  if (timed_out) {
    ::kill(pid, SIGKILL);
    ::waitpid(pid, &status, 0);
  } else {
    ::waitpid(pid, &status, 0);
    // Drain whatever is still buffered after exit.
    for (int i = 0; i < 2; ++i) {
      while (open_fds[i]) {
        ssize_t n = ::read(fds[i].fd, buffer, sizeof(buffer));
        if (n > 0) {
          sinks[i]->append(buffer, static_cast<std::size_t>(n));
        } else {
          open_fds[i] = false;
        }
      }
    }
  }
  ::close(out_pipe[0]);
  ::close(err_pipe[0]);

  if (timed_out) {
    return finish(std::nullopt, true,
                  "evaluator timed out after " + std::to_string(timeout_seconds) +
                      "s; stderr: " + err_text);
  }
  if (!WIFEXITED(status) || WEXITSTATUS(status) != 0) {
    return finish(std::nullopt, false,
                  "evaluator exited with status " +
                      std::to_string(WIFEXITED(status) ? WEXITSTATUS(status) : -1) +
                      "; stderr: " + err_text);
  }

  nlohmann::json reply = nlohmann::json::parse(out_text, nullptr, false);
  if (reply.is_discarded() || !reply.is_object() || !reply.contains("loss") ||
      !reply["loss"].is_number()) {
    return finish(std::nullopt, false, "malformed evaluator reply; stderr: " + err_text);
  }
  if (reply.contains("request_id") &&
      reply["request_id"].get<std::string>() != request.request_id) {
    return finish(std::nullopt, false,
                  "evaluator reply carries a different request_id");
  }
  return finish(reply["loss"].get<double>(), false, "");
}

/// Evaluator backed by an external command. Every call spawns a fresh
/// process, so concurrent workers are safe.
class SubprocessEvaluator final : public Evaluator {
 public:
  SubprocessEvaluator(std::string command, double timeout_seconds)
      : command_(std::move(command)), timeout_seconds_(timeout_seconds) {
    if (command_.empty()) {
      throw EvaluatorSetupError("subprocess evaluator needs a command");
    }
    if (!(timeout_seconds_ > 0.0)) {
      throw EvaluatorSetupError("subprocess evaluator needs a positive timeout");
    }
  }

  EvaluationResult evaluate(const EvaluationRequest& request) override {
    return subprocess_evaluate(command_, request, timeout_seconds_);
  }

  const std::string& command() const { return command_; }
  double timeout_seconds() const { return timeout_seconds_; }

 private:
  std::string command_;
  double timeout_seconds_;
};

}  // namespace mfes
