#include "adages/service/client.hpp"

#include <unistd.h>

#include <utility>

#include "socket_io.hpp"

namespace adages::service {
namespace {

[[noreturn]] void throw_error(const ErrorReply& e) {
  throw ServiceError(e.code, e.message);
}

}  // namespace

Client::Client(const std::string& addr) : fd_(net::connect_to(addr)) {}

Client::~Client() {
  if (fd_ >= 0) ::close(fd_);
}

Client::Client(Client&& other) noexcept
    : fd_(std::exchange(other.fd_, -1)), carry_(std::move(other.carry_)) {}

Client& Client::operator=(Client&& other) noexcept {
  if (this != &other) {
    if (fd_ >= 0) ::close(fd_);
    fd_ = std::exchange(other.fd_, -1);
    carry_ = std::move(other.carry_);
  }
  return *this;
}

Reply Client::request(const Request& req) {
  if (fd_ < 0) throw std::runtime_error("client connection is closed");
  if (!net::send_all(fd_, to_wire(req) + "\n")) {
    throw std::runtime_error("send failed (connection lost)");
  }
  std::string line;
  if (!net::read_line(fd_, carry_, line)) {
    throw std::runtime_error("connection closed before a reply arrived");
  }
  return parse_reply(line);
}

std::string Client::open(int expected_k, int d, const std::string& rule,
                         std::optional<long> timeout_ms) {
  Request req;
  req.type = Request::Type::Open;
  req.open.expected_k = expected_k;
  req.open.d = d;
  req.open.rule = rule;
  req.open.timeout_ms = timeout_ms;
  Reply reply = request(req);
  if (const auto* err = std::get_if<ErrorReply>(&reply)) throw_error(*err);
  if (const auto* ack = std::get_if<OpenAck>(&reply)) return ack->session_id;
  throw ServiceError(ErrorCode::BadRequest, "unexpected reply to open");
}

SubmitOutcome Client::report(const std::string& session_id, int machine_id,
                             int d, const std::vector<int>& selected) {
  Request req;
  req.type = Request::Type::Report;
  req.report.session_id = session_id;
  req.report.machine_id = machine_id;
  req.report.d = d;
  req.report.selected = selected;
  Reply reply = request(req);
  if (const auto* err = std::get_if<ErrorReply>(&reply)) throw_error(*err);
  SubmitOutcome out;
  if (const auto* ack = std::get_if<ReportAck>(&reply)) {
    out.received = ack->received;
    out.expected_k = ack->expected_k;
    return out;
  }
  if (const auto* result = std::get_if<ResultMessage>(&reply)) {
    out.completed = true;
    out.expected_k = static_cast<int>(result->machine_sizes.size());
    out.received = out.expected_k;
    out.result = *result;
    return out;
  }
  throw ServiceError(ErrorCode::BadRequest, "unexpected reply to report");
}

PollOutcome Client::poll(const std::string& session_id) {
  Request req;
  req.type = Request::Type::Poll;
  req.poll.session_id = session_id;
  Reply reply = request(req);
  if (const auto* err = std::get_if<ErrorReply>(&reply)) throw_error(*err);
  PollOutcome out;
  if (const auto* pending = std::get_if<PendingReply>(&reply)) {
    out.received = pending->received;
    out.expected_k = pending->expected_k;
    return out;
  }
  if (const auto* result = std::get_if<ResultMessage>(&reply)) {
    out.ready = true;
    out.expected_k = static_cast<int>(result->machine_sizes.size());
    out.received = out.expected_k;
    out.result = *result;
    return out;
  }
  throw ServiceError(ErrorCode::BadRequest, "unexpected reply to poll");
}

}  // namespace adages::service
