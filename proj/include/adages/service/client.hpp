#pragma once

#include <optional>
#include <string>
#include <vector>

#include "adages/service/coordinator.hpp"
#include "adages/service/protocol.hpp"

namespace adages::service {

/// One persistent connection to a coordinator. Every call is a synchronous
/// line round trip; error replies surface as thrown ServiceError.
class Client {
 public:
  explicit Client(const std::string& addr);
  ~Client();

  Client(const Client&) = delete;
  Client& operator=(const Client&) = delete;
  Client(Client&& other) noexcept;
  Client& operator=(Client&& other) noexcept;

  /// Raw round trip: send one request line, parse one reply line.
  Reply request(const Request& req);

  /// Opens a session and returns its token.
  std::string open(int expected_k, int d, const std::string& rule,
                   std::optional<long> timeout_ms = std::nullopt);

  /// Submits one machine's selection. `completed` is true when this (or an
  /// earlier) report finished the session, in which case `result` is set.
  SubmitOutcome report(const std::string& session_id, int machine_id, int d,
                       const std::vector<int>& selected);

  /// Asks whether a session's result is ready.
  PollOutcome poll(const std::string& session_id);

 private:
  int fd_ = -1;
  std::string carry_;
};

}  // namespace adages::service
