#include "adages/service/server.hpp"

#include <sys/socket.h>
#include <unistd.h>

#include <algorithm>
#include <utility>

#include "socket_io.hpp"

namespace adages::service {

Server::Server(Coordinator& coordinator, const std::string& bind_addr)
    : coordinator_(coordinator) {
  int requested_port = 0;
  net::split_address(bind_addr, host_, requested_port);
  auto [fd, port] = net::listen_on(bind_addr, 64);
  listen_fd_ = fd;
  port_ = port;
}

Server::~Server() { stop(); }

std::string Server::address() const {
  return host_ + ":" + std::to_string(port_);
}

void Server::start() {
  if (started_ || stopping_.load()) return;
  started_ = true;
  accept_thread_ = std::thread([this] { accept_loop(); });
}

void Server::stop() {
  if (stopping_.exchange(true)) return;
  if (listen_fd_ >= 0) {
    ::shutdown(listen_fd_, SHUT_RDWR);
    ::close(listen_fd_);
    listen_fd_ = -1;
  }
  {
    std::lock_guard<std::mutex> lock(conn_mutex_);
    for (int fd : conn_fds_) ::shutdown(fd, SHUT_RDWR);
  }
  if (accept_thread_.joinable()) accept_thread_.join();
  std::vector<std::thread> to_join;
  {
    std::lock_guard<std::mutex> lock(conn_mutex_);
    to_join.swap(conn_threads_);
  }
  for (std::thread& t : to_join) {
    if (t.joinable()) t.join();
  }
}

void Server::accept_loop() {
  for (;;) {
    const int fd = ::accept(listen_fd_, nullptr, nullptr);
    if (fd < 0) {
      if (stopping_.load()) return;
      continue;
    }
    std::lock_guard<std::mutex> lock(conn_mutex_);
    if (stopping_.load()) {
      ::close(fd);
      return;
    }
    conn_fds_.push_back(fd);
    conn_threads_.emplace_back([this, fd] { serve_connection(fd); });
  }
}

void Server::serve_connection(int fd) {
  std::string carry;
  std::string line;
  while (net::read_line(fd, carry, line)) {
    Reply reply;
    try {
      reply = coordinator_.handle(parse_request(line));
    } catch (const ServiceError& e) {
      reply = ErrorReply{e.code(), e.what()};
    } catch (const std::exception& e) {
      reply = ErrorReply{ErrorCode::BadRequest, e.what()};
    }
    if (!net::send_all(fd, to_wire(reply) + "\n")) break;
  }
  // Deregister before closing so stop() never touches a recycled descriptor.
  {
    std::lock_guard<std::mutex> lock(conn_mutex_);
    conn_fds_.erase(std::remove(conn_fds_.begin(), conn_fds_.end(), fd),
                    conn_fds_.end());
  }
  ::close(fd);
}

}  // namespace adages::service
