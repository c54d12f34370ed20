#pragma once

// Internal POSIX socket helpers shared by the server and the client. Not part
// of the public API.

#include <string>

namespace adages::service::net {

/// Splits "host:port"; throws std::invalid_argument on malformed input.
void split_address(const std::string& addr, std::string& host, int& port);

/// Connects to host:port (IPv4 dotted quad or "localhost"). Returns the fd;
/// throws std::runtime_error on failure.
int connect_to(const std::string& addr);

/// Creates a listening IPv4 socket bound to host:port (port 0 picks an
/// ephemeral one). Returns {fd, bound_port}; throws std::runtime_error.
std::pair<int, int> listen_on(const std::string& addr, int backlog);

/// Sends the whole buffer; returns false on error/peer reset.
bool send_all(int fd, const std::string& data);

/// Reads until '\n' using `carry` as the cross-call buffer. Returns false on
/// EOF/error with no complete line. The returned line has no terminator.
bool read_line(int fd, std::string& carry, std::string& line);

}  // namespace adages::service::net
