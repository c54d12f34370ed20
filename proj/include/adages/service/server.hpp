#pragma once

#include <atomic>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "adages/service/coordinator.hpp"

namespace adages::service {

/// Newline-delimited-JSON TCP front end for a Coordinator. One thread per
/// connection; any number of requests per connection. stop() (or destruction)
/// closes the listener and every live connection, then joins all threads.
class Server {
 public:
  /// Binds immediately (port 0 in `bind_addr` picks an ephemeral port) but
  /// accepts nothing until start(). Throws std::runtime_error on bind failure.
  Server(Coordinator& coordinator, const std::string& bind_addr);
  ~Server();

  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  void start();
  void stop();

  int port() const { return port_; }
  std::string address() const;

 private:
  void accept_loop();
  void serve_connection(int fd);

  Coordinator& coordinator_;
  std::string host_;
  int listen_fd_ = -1;
  int port_ = 0;
  std::atomic<bool> stopping_{false};
  bool started_ = false;
  std::thread accept_thread_;
  std::mutex conn_mutex_;
  std::vector<int> conn_fds_;
  std::vector<std::thread> conn_threads_;
};

}  // namespace adages::service
