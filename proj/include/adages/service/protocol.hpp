#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace adages::service {

/// Machine-readable failure classes carried on the wire and thrown locally.
enum class ErrorCode {
  BadRequest,
  UnknownSession,
  DuplicateMachine,
  DimensionMismatch,
  Timeout,
  Capacity,
};

std::string to_string(ErrorCode code);
std::optional<ErrorCode> error_code_from(const std::string& text);

/// Coordinator/client failure with a protocol error code attached.
class ServiceError : public std::runtime_error {
 public:
  ServiceError(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

// --- Requests (client -> coordinator) --------------------------------------

struct OpenRequest {
  int expected_k = 0;
  int d = 0;
  std::string rule;
  std::optional<long> timeout_ms;  // per-session override of the default
};

struct ReportMessage {
  std::string session_id;
  int machine_id = -1;
  int d = 0;
  std::vector<int> selected;  // strictly increasing indices in [0, d)
};

struct PollRequest {
  std::string session_id;
};

struct Request {
  enum class Type { Open, Report, Poll };
  Type type = Type::Open;
  OpenRequest open;
  ReportMessage report;
  PollRequest poll;
};

// --- Replies (coordinator -> client) ----------------------------------------

struct OpenAck {
  std::string session_id;
  int expected_k = 0;
  int d = 0;
  std::string rule;
};

struct ReportAck {
  std::string session_id;
  int received = 0;
  int expected_k = 0;
};

struct PendingReply {
  std::string session_id;
  int received = 0;
  int expected_k = 0;
};

struct ResultMessage {
  std::string session_id;
  std::string rule;
  int threshold_used = 0;
  int c0 = 0;
  int d = 0;
  std::vector<int> selected;
  std::vector<int> machine_sizes;  // in ascending machine_id order

  friend bool operator==(const ResultMessage&, const ResultMessage&) = default;
};

struct ErrorReply {
  ErrorCode code = ErrorCode::BadRequest;
  std::string message;
};

using Reply =
    std::variant<OpenAck, ReportAck, PendingReply, ResultMessage, ErrorReply>;

// --- Wire codec: one JSON object per line, discriminated by "type" ----------

std::string to_wire(const OpenRequest& msg);
std::string to_wire(const ReportMessage& msg);
std::string to_wire(const PollRequest& msg);
std::string to_wire(const Request& msg);
std::string to_wire(const Reply& msg);

/// Parses a request line. Throws ServiceError{BadRequest} on malformed input
/// (bad JSON, unknown type, missing or mistyped fields).
Request parse_request(const std::string& line);

/// Parses a reply line (client side). Throws ServiceError{BadRequest} when the
/// line is not a valid reply.
Reply parse_reply(const std::string& line);

}  // namespace adages::service
