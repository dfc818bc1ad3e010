#include "realnav/protocol.hpp"

#include <arpa/inet.h>
#include <fcntl.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <signal.h>
#include <spawn.h>
#include <sys/socket.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <mutex>
#include <thread>

#include <json.hpp>

#include "realnav/error.hpp"
#include "text_util.hpp"

extern char** environ;

namespace realnav {

namespace {

using ojson = nlohmann::ordered_json;
using Clock = std::chrono::steady_clock;

constexpr std::size_t kMaxFrameBytes = 64u << 20;

void ignore_sigpipe() {
  static std::once_flag once;
  std::call_once(once, [] { ::signal(SIGPIPE, SIG_IGN); });
}

std::string errno_text(const char* what) {
  return std::string(what) + ": " + std::strerror(errno);
}

std::string json_error_text(const std::string& raw) {
  constexpr std::size_t kShown = 120;
  return raw.size() <= kShown ? raw : raw.substr(0, kShown) + "...";
}

}  // namespace

// --- FdTransport -----------------------------------------------------------

FdTransport::FdTransport(int read_fd, int write_fd, bool owns_fds)
    : read_fd_(read_fd), write_fd_(write_fd), owns_(owns_fds) {
  ignore_sigpipe();
}

FdTransport::~FdTransport() {
  if (!owns_) return;
  if (read_fd_ >= 0) ::close(read_fd_);
  if (write_fd_ >= 0 && write_fd_ != read_fd_) ::close(write_fd_);
}

void FdTransport::send_line(std::string_view line) {
  if (line.find('\n') != std::string_view::npos) {
    throw Error(ErrorCode::kInvalidArgument, "frame contains a newline");
  }
  std::string data(line);
  data += '\n';
  std::size_t done = 0;
  while (done < data.size()) {
    const ssize_t n = ::write(write_fd_, data.data() + done, data.size() - done);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw Error(ErrorCode::kIo, errno_text("send failed"));
    }
    done += static_cast<std::size_t>(n);
  }
}

std::optional<std::string> FdTransport::recv_line(std::chrono::milliseconds timeout) {
  const auto deadline = Clock::now() + timeout;
  while (true) {
    if (const auto nl = buffer_.find('\n'); nl != std::string::npos) {
      std::string line = buffer_.substr(0, nl);
      buffer_.erase(0, nl + 1);
      if (!line.empty() && line.back() == '\r') line.pop_back();
      return line;
    }
    if (buffer_.size() > kMaxFrameBytes) {
      throw Error(ErrorCode::kProtocol, "frame exceeds size limit");
    }
    const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(
        deadline - Clock::now());
    pollfd pfd{read_fd_, POLLIN, 0};
    const int ready = ::poll(&pfd, 1, static_cast<int>(std::max<long long>(left.count(), 0)));
    if (ready < 0) {
      if (errno == EINTR) continue;
      throw Error(ErrorCode::kIo, errno_text("poll failed"));
    }
    if (ready == 0) return std::nullopt;
    char chunk[4096];
    const ssize_t n = ::read(read_fd_, chunk, sizeof chunk);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw Error(ErrorCode::kIo, errno_text("receive failed"));
    }
    if (n == 0) throw Error(ErrorCode::kIo, "peer closed the connection");
    buffer_.append(chunk, static_cast<std::size_t>(n));
  }
}

std::pair<std::unique_ptr<Transport>, std::unique_ptr<Transport>> make_transport_pair() {
  int fds[2];
  if (::socketpair(AF_UNIX, SOCK_STREAM | SOCK_CLOEXEC, 0, fds) != 0) {
    throw Error(ErrorCode::kIo, errno_text("socketpair"));
  }
  return {std::make_unique<FdTransport>(fds[0], fds[0]),
          std::make_unique<FdTransport>(fds[1], fds[1])};
}

// --- SubprocessTransport ---------------------------------------------------

SubprocessTransport::SubprocessTransport(const std::vector<std::string>& argv) {
  if (argv.empty()) throw Error(ErrorCode::kInvalidArgument, "empty policy command");
  int to_child[2];
  int from_child[2];
  if (::pipe2(to_child, O_CLOEXEC) != 0) throw Error(ErrorCode::kIo, errno_text("pipe"));
  if (::pipe2(from_child, O_CLOEXEC) != 0) {
    ::close(to_child[0]);
    ::close(to_child[1]);
    throw Error(ErrorCode::kIo, errno_text("pipe"));
  }
  posix_spawn_file_actions_t actions;
  posix_spawn_file_actions_init(&actions);
  posix_spawn_file_actions_adddup2(&actions, to_child[0], STDIN_FILENO);
  posix_spawn_file_actions_adddup2(&actions, from_child[1], STDOUT_FILENO);

  std::vector<char*> args;
  for (const auto& a : argv) args.push_back(const_cast<char*>(a.c_str()));
  args.push_back(nullptr);
  pid_t pid = -1;
  const int rc = ::posix_spawnp(&pid, args[0], &actions, nullptr, args.data(), environ);
  posix_spawn_file_actions_destroy(&actions);
  ::close(to_child[0]);
  ::close(from_child[1]);
  if (rc != 0) {
    ::close(to_child[1]);
    ::close(from_child[0]);
    throw Error(ErrorCode::kIo,
                "cannot start policy '" + argv[0] + "': " + std::strerror(rc));
  }
  pid_ = pid;
  fds_ = std::make_unique<FdTransport>(from_child[0], to_child[1]);
}

SubprocessTransport::~SubprocessTransport() {
  fds_.reset();  // EOF on the child's stdin asks it to exit
  if (pid_ <= 0) return;
  int status = 0;
  for (int i = 0; i < 100; ++i) {
    if (::waitpid(pid_, &status, WNOHANG) == pid_) return;
    std::this_thread::sleep_for(std::chrono::milliseconds(10));
  }
  ::kill(pid_, SIGKILL);
  ::waitpid(pid_, &status, 0);
}

// --- TCP -------------------------------------------------------------------

TcpListener::TcpListener(std::uint16_t port, const std::string& host) {
  ignore_sigpipe();
  fd_ = ::socket(AF_INET, SOCK_STREAM | SOCK_CLOEXEC, 0);
  if (fd_ < 0) throw Error(ErrorCode::kIo, errno_text("socket"));
  const int one = 1;
  ::setsockopt(fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(port);
  if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1) {
    ::close(fd_);
    throw Error(ErrorCode::kInvalidArgument, "bad IPv4 address '" + host + "'");
  }
  if (::bind(fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0 ||
      ::listen(fd_, 16) != 0) {
    const std::string msg = errno_text(("cannot listen on port " + std::to_string(port)).c_str());
    ::close(fd_);
    throw Error(ErrorCode::kIo, msg);
  }
  socklen_t len = sizeof addr;
  ::getsockname(fd_, reinterpret_cast<sockaddr*>(&addr), &len);
  port_ = ntohs(addr.sin_port);
}

TcpListener::~TcpListener() {
  if (fd_ >= 0) ::close(fd_);
}

std::unique_ptr<Transport> TcpListener::accept(std::chrono::milliseconds timeout) {
  pollfd pfd{fd_, POLLIN, 0};
  int ready;
  do {
    ready = ::poll(&pfd, 1, static_cast<int>(timeout.count()));
  } while (ready < 0 && errno == EINTR);
  if (ready < 0) throw Error(ErrorCode::kIo, errno_text("poll failed"));
  if (ready == 0) {
    throw Error(ErrorCode::kTimeout,
                "no policy client connected to port " + std::to_string(port_));
  }
  const int fd = ::accept4(fd_, nullptr, nullptr, SOCK_CLOEXEC);
  if (fd < 0) throw Error(ErrorCode::kIo, errno_text("accept"));
  const int one = 1;
  ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
  return std::make_unique<FdTransport>(fd, fd);
}

std::unique_ptr<Transport> connect_tcp(const std::string& host, std::uint16_t port) {
  ignore_sigpipe();
  const int fd = ::socket(AF_INET, SOCK_STREAM | SOCK_CLOEXEC, 0);
  if (fd < 0) throw Error(ErrorCode::kIo, errno_text("socket"));
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(port);
  if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1) {
    ::close(fd);
    throw Error(ErrorCode::kInvalidArgument, "bad IPv4 address '" + host + "'");
  }
  if (::connect(fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0) {
    const std::string msg = errno_text("connect");
    ::close(fd);
    throw Error(ErrorCode::kIo, msg);
  }
  const int one = 1;
  ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
  return std::make_unique<FdTransport>(fd, fd);
}

// --- frames ----------------------------------------------------------------

std::string hello_frame(std::optional<int> width, std::optional<int> height) {
  ojson j;
  j["kind"] = "hello";
  j["version"] = kProtocolVersion;
  if (width) j["image_width"] = *width;
  if (height) j["image_height"] = *height;
  return j.dump();
}

std::string act_frame(Action action) {
  ojson j;
  j["kind"] = "act";
  j["action"] = action_name(action);
  return j.dump();
}

std::string base64_encode(std::string_view bytes) {
  static constexpr char kAlphabet[] =
      "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
  std::string out;
  out.reserve((bytes.size() + 2) / 3 * 4);
  std::size_t i = 0;
  for (; i + 2 < bytes.size(); i += 3) {
    const auto b = (static_cast<unsigned char>(bytes[i]) << 16) |
                   (static_cast<unsigned char>(bytes[i + 1]) << 8) |
                   static_cast<unsigned char>(bytes[i + 2]);
    out += kAlphabet[(b >> 18) & 63];
    out += kAlphabet[(b >> 12) & 63];
    out += kAlphabet[(b >> 6) & 63];
    out += kAlphabet[b & 63];
  }
  if (i < bytes.size()) {
    unsigned b = static_cast<unsigned char>(bytes[i]) << 16;
    if (i + 1 < bytes.size()) b |= static_cast<unsigned char>(bytes[i + 1]) << 8;
    out += kAlphabet[(b >> 18) & 63];
    out += kAlphabet[(b >> 12) & 63];
    out += i + 1 < bytes.size() ? kAlphabet[(b >> 6) & 63] : '=';
    out += '=';
  }
  return out;
}

// --- PolicySession ---------------------------------------------------------

PolicySession::PolicySession(std::unique_ptr<Transport> transport, SessionOptions options)
    : transport_(std::move(transport)), options_(std::move(options)) {
  if (!transport_) throw Error(ErrorCode::kInvalidArgument, "null transport");
}

PolicySession::~PolicySession() = default;

void PolicySession::send(const std::string& frame) {
  if (!transport_) throw Error(ErrorCode::kProtocol, "policy session is closed");
  try {
    transport_->send_line(frame);
  } catch (const Error& e) {
    transport_.reset();
    state_ = State::kClosed;
    throw Error(ErrorCode::kProtocol, std::string("policy session lost: ") + e.what());
  }
}

void PolicySession::fail(const std::string& message) {
  if (!transport_) return;
  ojson j;
  j["kind"] = "error";
  j["message"] = message;
  try {
    transport_->send_line(j.dump());
  } catch (const Error&) {
  }
  transport_.reset();
  state_ = State::kClosed;
}

void PolicySession::violation(ErrorCode code, const std::string& message) {
  fail(message);
  throw Error(code, message);
}

std::string PolicySession::receive(std::string_view expecting) {
  if (!transport_) throw Error(ErrorCode::kProtocol, "policy session is closed");
  std::optional<std::string> line;
  try {
    line = transport_->recv_line(options_.timeout);
  } catch (const Error& e) {
    transport_.reset();
    state_ = State::kClosed;
    throw Error(ErrorCode::kProtocol, std::string("policy session lost: ") + e.what());
  }
  if (!line) {
    violation(ErrorCode::kTimeout, "no '" + std::string(expecting) + "' frame within " +
                                       std::to_string(options_.timeout.count()) + " ms");
  }
  ojson j;
  try {
    j = ojson::parse(*line);
  } catch (const ojson::exception&) {
    violation(ErrorCode::kProtocol, "malformed frame: " + json_error_text(*line));
  }
  if (!j.is_object() || !j.contains("kind") || !j["kind"].is_string()) {
    violation(ErrorCode::kProtocol, "frame without a string 'kind': " + json_error_text(*line));
  }
  const std::string kind = j["kind"].get<std::string>();
  if (kind == "error") {
    const std::string msg = j.contains("message") && j["message"].is_string()
                                ? j["message"].get<std::string>()
                                : std::string("(no message)");
    violation(ErrorCode::kProtocol, "client reported an error: " + msg);
  }
  if (kind != expecting) {
    violation(ErrorCode::kProtocol, "expected '" + std::string(expecting) +
                                        "' frame, got '" + kind + "'");
  }
  return *line;
}

void PolicySession::handshake() {
  if (state_ != State::kFresh) {
    violation(ErrorCode::kProtocol, "handshake already performed");
  }
  send(hello_frame(options_.image_width, options_.image_height));
  const ojson reply = ojson::parse(receive("hello"));
  if (!reply.contains("version") || !reply["version"].is_number_integer() ||
      reply["version"].get<int>() != kProtocolVersion) {
    violation(ErrorCode::kProtocol,
              "unsupported protocol version (expected " +
                  std::to_string(kProtocolVersion) + ")");
  }
  state_ = State::kReady;
}

void PolicySession::begin_episode(std::int64_t episode_id) {
  if (state_ == State::kClosed) throw Error(ErrorCode::kProtocol, "policy session is closed");
  if (state_ != State::kReady) {
    violation(ErrorCode::kProtocol, "reset outside of the ready state");
  }
  ojson j;
  j["kind"] = "reset";
  j["episode_id"] = episode_id;
  send(j.dump());
  state_ = State::kInEpisode;
}

std::string PolicySession::image_payload(const StepObservation& obs) const {
  std::filesystem::path path = obs.image_ref;
  if (obs.record_id && path.is_relative() && !options_.image_root.empty()) {
    path = options_.image_root / path;
  }
  return obs.record_id ? path.string() : obs.image_ref;
}

Action PolicySession::request_action(const StepObservation& obs) {
  if (state_ == State::kClosed) throw Error(ErrorCode::kProtocol, "policy session is closed");
  if (state_ != State::kInEpisode) {
    violation(ErrorCode::kProtocol, "observe outside of an episode");
  }
  // Anything already waiting was sent before this observe: out of order.
  std::optional<std::string> early;
  try {
    early = transport_->recv_line(std::chrono::milliseconds(0));
  } catch (const Error& e) {
    transport_.reset();
    state_ = State::kClosed;
    throw Error(ErrorCode::kProtocol, std::string("policy session lost: ") + e.what());
  }
  if (early) {
    violation(ErrorCode::kProtocol, "unsolicited frame before observe: " + json_error_text(*early));
  }

  ojson j;
  j["kind"] = "observe";
  j["step"] = obs.step;
  const std::string image = image_payload(obs);
  if (options_.inline_images && obs.record_id) {
    ojson inline_image;
    inline_image["path"] = image;
    inline_image["encoding"] = "base64";
    inline_image["data"] = base64_encode(detail::read_file(image));
    j["image"] = inline_image;
  } else {
    j["image"] = image;
  }
  j["goal_distance"] = obs.goal.distance;
  j["goal_bearing"] = obs.goal.bearing;
  j["prev_action"] = obs.prev_action ? ojson(action_name(*obs.prev_action)) : ojson(nullptr);
  send(j.dump());

  const ojson reply = ojson::parse(receive("act"));
  if (!reply.contains("action") || !reply["action"].is_string()) {
    violation(ErrorCode::kProtocol, "act frame without a string 'action'");
  }
  const auto action = parse_action(reply["action"].get<std::string>());
  if (!action) {
    violation(ErrorCode::kProtocol,
              "invalid action name '" + reply["action"].get<std::string>() + "'");
  }
  return *action;
}

void PolicySession::end_episode(const Trajectory& trajectory) {
  if (state_ != State::kInEpisode) {
    violation(ErrorCode::kProtocol, "done outside of an episode");
  }
  ojson j;
  j["kind"] = "done";
  j["outcome"] = trajectory.outcome == Outcome::kSuccess ? "success" : "failure";
  j["final_distance"] = trajectory.final_distance;
  send(j.dump());
  state_ = State::kReady;
}

// --- RemotePolicy ----------------------------------------------------------

RemotePolicy::RemotePolicy(std::unique_ptr<PolicySession> session)
    : session_(std::move(session)) {}

void RemotePolicy::reset(const EpisodeSpec& spec) {
  if (!handshaken_) {
    handshaken_ = true;
    session_->handshake();
  }
  session_->begin_episode(spec.id);
}

Action RemotePolicy::act(const StepObservation& obs) {
  return session_->request_action(obs);
}

void RemotePolicy::episode_finished(const Trajectory& trajectory) {
  session_->end_episode(trajectory);
}

}  // namespace realnav
