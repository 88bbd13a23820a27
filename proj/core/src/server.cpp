#include "slugbot/server.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <system_error>

namespace slugbot::telemetry {

namespace {

constexpr std::size_t kMaxLineBytes = 64 * 1024;
constexpr auto kIdlePoll = std::chrono::milliseconds(20);

[[noreturn]] void throw_errno(const std::string& what) {
  throw std::system_error(errno, std::generic_category(), what);
}

}  // namespace

void SendQueue::push(std::string line, bool frame) {
  {
    std::lock_guard lk(mu_);
    if (frame && frames_queued_ >= frame_limit_) {
      // Slow consumer: shed the oldest frame. The receiver sees a seq gap.
      auto oldest = std::find_if(items_.begin(), items_.end(), [](const Item& i) { return i.frame; });
      if (oldest != items_.end()) {
        items_.erase(oldest);
        --frames_queued_;
        ++frames_dropped_;
      }
    }
    items_.push_back({frame, std::move(line)});
    if (frame) ++frames_queued_;
  }
  cv_.notify_one();
}

std::optional<std::string> SendQueue::pop() {
  std::unique_lock lk(mu_);
  cv_.wait(lk, [&] { return closed_ || !items_.empty(); });
  if (closed_) return std::nullopt;
  Item item = std::move(items_.front());
  items_.pop_front();
  if (item.frame) --frames_queued_;
  return std::move(item.line);
}

void SendQueue::close() {
  {
    std::lock_guard lk(mu_);
    closed_ = true;
  }
  cv_.notify_all();
}

std::size_t SendQueue::size() const {
  std::lock_guard lk(mu_);
  return items_.size();
}

std::uint64_t SendQueue::frames_dropped() const {
  std::lock_guard lk(mu_);
  return frames_dropped_;
}

struct TelemetryServer::Client {
  explicit Client(std::size_t frame_limit) : out(frame_limit) {}

  std::uint64_t id = 0;
  int fd = -1;
  SendQueue out;
  std::thread reader;
  std::thread writer;
};

TelemetryServer::TelemetryServer(SimConfig config, ServerOptions options)
    : session_(std::move(config), options.decimation), options_(std::move(options)) {}

TelemetryServer::~TelemetryServer() { stop(); }

void TelemetryServer::start() {
  addrinfo hints{};
  hints.ai_family = AF_INET;
  hints.ai_socktype = SOCK_STREAM;
  hints.ai_flags = AI_PASSIVE;
  addrinfo* res = nullptr;
  const std::string service = std::to_string(options_.port);
  if (int rc = ::getaddrinfo(options_.host.c_str(), service.c_str(), &hints, &res); rc != 0) {
    throw std::system_error(EINVAL, std::generic_category(),
                            "resolve " + options_.host + ": " + ::gai_strerror(rc));
  }

  listen_fd_ = ::socket(res->ai_family, res->ai_socktype, res->ai_protocol);
  if (listen_fd_ < 0) {
    ::freeaddrinfo(res);
    throw_errno("socket");
  }
  int one = 1;
  ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
  if (::bind(listen_fd_, res->ai_addr, res->ai_addrlen) < 0) {
    const int err = errno;
    ::freeaddrinfo(res);
    ::close(listen_fd_);
    listen_fd_ = -1;
    throw std::system_error(err, std::generic_category(), "bind " + options_.host + ":" + service);
  }
  ::freeaddrinfo(res);
  if (::listen(listen_fd_, 16) < 0) throw_errno("listen");

  sockaddr_in bound{};
  socklen_t len = sizeof bound;
  ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&bound), &len);
  port_ = ntohs(bound.sin_port);

  if (options_.autostart) session_.apply(ClientCommand{CommandKind::Start, nullptr, {}, false, 1.0});
  accept_thread_ = std::thread([this] { accept_loop(); });
  sim_thread_ = std::thread([this] { sim_loop(); });
}

void TelemetryServer::stop() {
  if (stopping_.exchange(true)) return;
  queue_cv_.notify_all();
  if (sim_thread_.joinable()) sim_thread_.join();
  if (accept_thread_.joinable()) accept_thread_.join();
  reap_clients(true);
  if (listen_fd_ >= 0) {
    ::close(listen_fd_);
    listen_fd_ = -1;
  }
  {
    std::lock_guard lk(stop_mu_);
    stopped_ = true;
  }
  stop_cv_.notify_all();
}

bool TelemetryServer::wait_for(std::chrono::milliseconds timeout) {
  std::unique_lock lk(stop_mu_);
  return stop_cv_.wait_for(lk, timeout, [this] { return stopped_; });
}

std::size_t TelemetryServer::client_count() const {
  std::lock_guard lk(clients_mu_);
  return static_cast<std::size_t>(
      std::count_if(clients_.begin(), clients_.end(), [](const auto& c) { return !c->out.closed(); }));
}

void TelemetryServer::accept_loop() {
  while (!stopping_) {
    pollfd pfd{listen_fd_, POLLIN, 0};
    const int rc = ::poll(&pfd, 1, 100);
    reap_clients(false);
    if (rc <= 0 || !(pfd.revents & POLLIN)) continue;

    const int fd = ::accept(listen_fd_, nullptr, nullptr);
    if (fd < 0) continue;
    int one = 1;
    ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);

    auto c = std::make_shared<Client>(options_.client_queue_limit);
    c->fd = fd;
    {
      std::lock_guard lk(clients_mu_);
      c->id = next_client_id_++;
      clients_.push_back(c);
    }
    c->reader = std::thread([this, c] { reader_loop(c); });
    c->writer = std::thread([this, c] { writer_loop(c); });
  }
}

void TelemetryServer::reap_clients(bool all) {
  std::vector<std::shared_ptr<Client>> dead;
  {
    std::lock_guard lk(clients_mu_);
    auto keep = std::stable_partition(clients_.begin(), clients_.end(),
                                      [all](const auto& c) { return !all && !c->out.closed(); });
    dead.assign(keep, clients_.end());
    clients_.erase(keep, clients_.end());
  }
  for (auto& c : dead) {
    c->out.close();
    ::shutdown(c->fd, SHUT_RDWR);
    if (c->reader.joinable()) c->reader.join();
    if (c->writer.joinable()) c->writer.join();
    ::close(c->fd);
  }
}

void TelemetryServer::reader_loop(const std::shared_ptr<Client>& c) {
  std::string buf;
  char chunk[4096];
  while (!c->out.closed()) {
    const ssize_t n = ::recv(c->fd, chunk, sizeof chunk, 0);
    if (n <= 0) break;
    buf.append(chunk, static_cast<std::size_t>(n));

    std::size_t start = 0;
    for (auto nl = buf.find('\n', start); nl != std::string::npos; nl = buf.find('\n', start)) {
      std::string_view line(buf.data() + start, nl - start);
      start = nl + 1;
      if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
      if (line.empty()) continue;
      try {
        ClientCommand cmd = parse_command(line);
        {
          std::lock_guard lk(queue_mu_);
          commands_.push_back({c->id, std::move(cmd)});
        }
        queue_cv_.notify_all();
      } catch (const ProtocolError& e) {
        c->out.push(error_reply(e.what(), e.id()).dump() + "\n", false);
      }
    }
    buf.erase(0, start);
    if (buf.size() > kMaxLineBytes) {
      c->out.push(error_reply("line too long", nullptr).dump() + "\n", false);
      buf.clear();
    }
  }
  c->out.close();
}

void TelemetryServer::writer_loop(const std::shared_ptr<Client>& c) {
  while (auto line = c->out.pop()) {
    std::size_t sent = 0;
    while (sent < line->size()) {
      const ssize_t n = ::send(c->fd, line->data() + sent, line->size() - sent, MSG_NOSIGNAL);
      if (n <= 0) {
        c->out.close();
        return;
      }
      sent += static_cast<std::size_t>(n);
    }
  }
}

void TelemetryServer::send_to(std::uint64_t client_id, std::string line) {
  std::lock_guard lk(clients_mu_);
  for (auto& c : clients_) {
    if (c->id == client_id && !c->out.closed()) {
      c->out.push(std::move(line), false);
      return;
    }
  }
}

void TelemetryServer::broadcast(const std::string& line) {
  std::lock_guard lk(clients_mu_);
  for (auto& c : clients_) {
    if (!c->out.closed()) c->out.push(line, true);
  }
}

void TelemetryServer::sim_loop() {
  using Clock = std::chrono::steady_clock;
  // Ticks are paced against an anchor that is reset whenever the run state or
  // speed changes. A host that falls behind runs late ticks back to back
  // rather than skipping them.
  Clock::time_point anchor = Clock::now();
  std::uint64_t ticks_since_anchor = 0;

  while (!stopping_) {
    std::deque<Pending> batch;
    {
      std::unique_lock lk(queue_mu_);
      if (!session_.running()) {
        queue_cv_.wait_for(lk, kIdlePoll, [this] { return stopping_ || !commands_.empty(); });
      }
      batch.swap(commands_);
    }
    if (stopping_) break;

    for (auto& p : batch) {
      const bool was_running = session_.running();
      const double old_speed = session_.speed();
      const auto reply = session_.apply(p.command);
      send_to(p.client_id, reply.dump() + "\n");
      if (session_.running() != was_running || session_.speed() != old_speed ||
          p.command.kind == CommandKind::Reset) {
        anchor = Clock::now();
        ticks_since_anchor = 0;
      }
    }
    if (!session_.running()) continue;

    const auto due = anchor + std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double, std::milli>(
                                  static_cast<double>(ticks_since_anchor) * session_.dt_ms() / session_.speed()));
    if (due > Clock::now()) {
      std::unique_lock lk(queue_mu_);
      queue_cv_.wait_until(lk, due, [this] { return stopping_ || !commands_.empty(); });
      continue;
    }

    if (auto frame = session_.tick()) broadcast(to_json(*frame).dump() + "\n");
    ++ticks_since_anchor;
  }
}

}  // namespace slugbot::telemetry
