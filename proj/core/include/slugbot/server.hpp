#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "slugbot/session.hpp"

namespace slugbot::telemetry {

/// Outgoing lines for one client. Replies are never dropped; once `frame_limit`
/// frames are waiting, the oldest frame is discarded to make room.
class SendQueue {
 public:
  explicit SendQueue(std::size_t frame_limit) : frame_limit_(frame_limit) {}

  void push(std::string line, bool frame);
  /// Blocks for the next line; nullopt once closed.
  std::optional<std::string> pop();
  void close();
  bool closed() const { return closed_; }

  std::size_t size() const;
  std::uint64_t frames_dropped() const;

 private:
  struct Item {
    bool frame;
    std::string line;
  };
  std::size_t frame_limit_;
  mutable std::mutex mu_;
  std::condition_variable cv_;
  std::deque<Item> items_;
  std::size_t frames_queued_ = 0;
  std::uint64_t frames_dropped_ = 0;
  std::atomic<bool> closed_{false};
};

struct ServerOptions {
  std::string host = "127.0.0.1";
  std::uint16_t port = 0;             // 0 picks an ephemeral port
  std::size_t client_queue_limit = 256;  // frames buffered per client before dropping the oldest
  int decimation = kDefaultDecimation;
  bool autostart = false;  // otherwise the session waits paused for a start command
};

/// Newline-delimited JSON over TCP. One thread paces the simulation, one
/// accepts connections, and each client gets a reader and a writer thread.
class TelemetryServer {
 public:
  TelemetryServer(SimConfig config, ServerOptions options);
  ~TelemetryServer();

  TelemetryServer(const TelemetryServer&) = delete;
  TelemetryServer& operator=(const TelemetryServer&) = delete;

  /// Binds and spawns the worker threads. Throws std::system_error.
  void start();
  void stop();

  /// Blocks until stop() or the timeout; returns true once stopped.
  bool wait_for(std::chrono::milliseconds timeout);

  std::uint16_t port() const { return port_; }
  std::size_t client_count() const;

 private:
  struct Client;
  struct Pending {
    std::uint64_t client_id;
    ClientCommand command;
  };

  void accept_loop();
  void sim_loop();
  void reader_loop(const std::shared_ptr<Client>& c);
  void writer_loop(const std::shared_ptr<Client>& c);
  void send_to(std::uint64_t client_id, std::string line);
  void broadcast(const std::string& line);
  void reap_clients(bool all);

  LiveSession session_;
  ServerOptions options_;
  int listen_fd_ = -1;
  std::uint16_t port_ = 0;

  std::atomic<bool> stopping_{false};
  std::thread accept_thread_;
  std::thread sim_thread_;

  mutable std::mutex clients_mu_;
  std::vector<std::shared_ptr<Client>> clients_;
  std::uint64_t next_client_id_ = 1;

  std::mutex queue_mu_;
  std::condition_variable queue_cv_;
  std::deque<Pending> commands_;

  std::mutex stop_mu_;
  std::condition_variable stop_cv_;
  bool stopped_ = false;
};

}  // namespace slugbot::telemetry
