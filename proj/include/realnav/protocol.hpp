#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "realnav/error.hpp"
#include "realnav/sim.hpp"

namespace realnav {

inline constexpr int kProtocolVersion = 1;

/// Newline-delimited frame channel.
class Transport {
 public:
  virtual ~Transport() = default;
  /// Sends one frame; `line` must not contain a newline. Throws kIo.
  virtual void send_line(std::string_view line) = 0;
  /// Next frame without its newline, or nullopt when none arrived within
  /// `timeout`. Throws kIo when the peer closed the channel.
  virtual std::optional<std::string> recv_line(std::chrono::milliseconds timeout) = 0;
};

/// Transport over a pair of file descriptors (pipes or a socket).
class FdTransport : public Transport {
 public:
  FdTransport(int read_fd, int write_fd, bool owns_fds = true);
  ~FdTransport() override;
  FdTransport(const FdTransport&) = delete;
  FdTransport& operator=(const FdTransport&) = delete;

  void send_line(std::string_view line) override;
  std::optional<std::string> recv_line(std::chrono::milliseconds timeout) override;

 private:
  int read_fd_;
  int write_fd_;
  bool owns_;
  std::string buffer_;
};

/// Two connected in-memory endpoints (a local socket pair).
std::pair<std::unique_ptr<Transport>, std::unique_ptr<Transport>> make_transport_pair();

/// Spawns `argv` and talks to it over its stdin/stdout; stderr is inherited.
/// The child is terminated when the transport is destroyed.
class SubprocessTransport : public Transport {
 public:
  explicit SubprocessTransport(const std::vector<std::string>& argv);
  ~SubprocessTransport() override;

  void send_line(std::string_view line) override { fds_->send_line(line); }
  std::optional<std::string> recv_line(std::chrono::milliseconds timeout) override {
    return fds_->recv_line(timeout);
  }
  int pid() const noexcept { return pid_; }

 private:
  std::unique_ptr<FdTransport> fds_;
  int pid_ = -1;
};

/// Listening TCP socket; each accepted connection is one session transport.
class TcpListener {
 public:
  /// Port 0 binds an ephemeral port.
  explicit TcpListener(std::uint16_t port, const std::string& host = "127.0.0.1");
  ~TcpListener();
  TcpListener(const TcpListener&) = delete;
  TcpListener& operator=(const TcpListener&) = delete;

  std::uint16_t port() const noexcept { return port_; }
  /// Throws kTimeout when no client connects within `timeout`.
  std::unique_ptr<Transport> accept(std::chrono::milliseconds timeout);

 private:
  int fd_ = -1;
  std::uint16_t port_ = 0;
};

std::unique_ptr<Transport> connect_tcp(const std::string& host, std::uint16_t port);

struct SessionOptions {
  std::chrono::milliseconds timeout{30'000};
  /// Send image bytes base64-encoded instead of the path.
  bool inline_images = false;
  /// Relative image references are resolved against this directory.
  std::filesystem::path image_root;
  /// Announced in `hello` when known.
  std::optional<int> image_width;
  std::optional<int> image_height;
};

/// Simulator side of one policy session:
///   hello -> (reset -> (observe -> act)* -> done)*
/// Any malformed, unexpected or late frame sends an `error` frame, closes the
/// session and throws (kProtocol or kTimeout).
class PolicySession {
 public:
  PolicySession(std::unique_ptr<Transport> transport, SessionOptions options = {});
  ~PolicySession();

  void handshake();
  void begin_episode(std::int64_t episode_id);
  Action request_action(const StepObservation& obs);
  void end_episode(const Trajectory& trajectory);
  /// Sends an error frame (best effort) and closes the session.
  void fail(const std::string& message);

  bool open() const noexcept { return transport_ != nullptr; }

 private:
  enum class State { kFresh, kReady, kInEpisode, kClosed };

  void send(const std::string& frame);
  std::string receive(std::string_view expecting);
  [[noreturn]] void violation(ErrorCode code, const std::string& message);
  std::string image_payload(const StepObservation& obs) const;

  std::unique_ptr<Transport> transport_;
  SessionOptions options_;
  State state_ = State::kFresh;
};

/// Policy adapter driving an external agent through a PolicySession.
class RemotePolicy : public Policy {
 public:
  explicit RemotePolicy(std::unique_ptr<PolicySession> session);

  void reset(const EpisodeSpec& spec) override;
  Action act(const StepObservation& obs) override;
  void episode_finished(const Trajectory& trajectory) override;

 private:
  std::unique_ptr<PolicySession> session_;
  bool handshaken_ = false;
};

/// Frame builders shared by the simulator and test clients.
std::string hello_frame(std::optional<int> width = {}, std::optional<int> height = {});
std::string act_frame(Action action);

std::string base64_encode(std::string_view bytes);

}  // namespace realnav
