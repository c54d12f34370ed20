#include "adages/service/protocol.hpp"

#include <json.hpp>

namespace adages::service {
namespace {

using nlohmann::json;

json must_object(const std::string& line) {
  json j = json::parse(line, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded() || !j.is_object()) {
    throw ServiceError(ErrorCode::BadRequest, "message is not a JSON object");
  }
  return j;
}

template <typename T>
T field(const json& j, const char* name) {
  auto it = j.find(name);
  if (it == j.end()) {
    throw ServiceError(ErrorCode::BadRequest,
                       std::string("missing field \"") + name + "\"");
  }
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    throw ServiceError(ErrorCode::BadRequest,
                       std::string("field \"") + name + "\" has the wrong type");
  }
}

std::string type_of(const json& j) { return field<std::string>(j, "type"); }

}  // namespace

std::string to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::BadRequest: return "bad_request";
    case ErrorCode::UnknownSession: return "unknown_session";
    case ErrorCode::DuplicateMachine: return "duplicate_machine";
    case ErrorCode::DimensionMismatch: return "dimension_mismatch";
    case ErrorCode::Timeout: return "timeout";
    case ErrorCode::Capacity: return "capacity";
  }
  return "bad_request";
}

std::optional<ErrorCode> error_code_from(const std::string& text) {
  if (text == "bad_request") return ErrorCode::BadRequest;
  if (text == "unknown_session") return ErrorCode::UnknownSession;
  if (text == "duplicate_machine") return ErrorCode::DuplicateMachine;
  if (text == "dimension_mismatch") return ErrorCode::DimensionMismatch;
  if (text == "timeout") return ErrorCode::Timeout;
  if (text == "capacity") return ErrorCode::Capacity;
  return std::nullopt;
}

std::string to_wire(const OpenRequest& msg) {
  json j{{"type", "open"},
         {"expected_k", msg.expected_k},
         {"d", msg.d},
         {"rule", msg.rule}};
  if (msg.timeout_ms) j["timeout_ms"] = *msg.timeout_ms;
  return j.dump();
}

std::string to_wire(const ReportMessage& msg) {
  return json{{"type", "report"},
              {"session_id", msg.session_id},
              {"machine_id", msg.machine_id},
              {"d", msg.d},
              {"selected", msg.selected}}
      .dump();
}

std::string to_wire(const PollRequest& msg) {
  return json{{"type", "poll"}, {"session_id", msg.session_id}}.dump();
}

std::string to_wire(const Request& msg) {
  switch (msg.type) {
    case Request::Type::Open: return to_wire(msg.open);
    case Request::Type::Report: return to_wire(msg.report);
    case Request::Type::Poll: return to_wire(msg.poll);
  }
  throw ServiceError(ErrorCode::BadRequest, "unknown request type");
}

std::string to_wire(const Reply& msg) {
  struct Dump {
    std::string operator()(const OpenAck& m) const {
      return json{{"type", "open"},
                  {"session_id", m.session_id},
                  {"expected_k", m.expected_k},
                  {"d", m.d},
                  {"rule", m.rule}}
          .dump();
    }
    std::string operator()(const ReportAck& m) const {
      return json{{"type", "report"},
                  {"status", "ack"},
                  {"session_id", m.session_id},
                  {"received", m.received},
                  {"expected_k", m.expected_k}}
          .dump();
    }
    std::string operator()(const PendingReply& m) const {
      return json{{"type", "poll"},
                  {"status", "pending"},
                  {"session_id", m.session_id},
                  {"received", m.received},
                  {"expected_k", m.expected_k}}
          .dump();
    }
    std::string operator()(const ResultMessage& m) const {
      return json{{"type", "result"},
                  {"session_id", m.session_id},
                  {"rule", m.rule},
                  {"threshold_used", m.threshold_used},
                  {"c0", m.c0},
                  {"d", m.d},
                  {"selected", m.selected},
                  {"machine_sizes", m.machine_sizes}}
          .dump();
    }
    std::string operator()(const ErrorReply& m) const {
      return json{{"type", "error"},
                  {"code", to_string(m.code)},
                  {"message", m.message}}
          .dump();
    }
  };
  return std::visit(Dump{}, msg);
}

Request parse_request(const std::string& line) {
  json j = must_object(line);
  const std::string type = type_of(j);
  Request req;
  if (type == "open") {
    req.type = Request::Type::Open;
    req.open.expected_k = field<int>(j, "expected_k");
    req.open.d = field<int>(j, "d");
    req.open.rule = field<std::string>(j, "rule");
    if (j.contains("timeout_ms")) req.open.timeout_ms = field<long>(j, "timeout_ms");
    return req;
  }
  if (type == "report") {
    req.type = Request::Type::Report;
    req.report.session_id = field<std::string>(j, "session_id");
    req.report.machine_id = field<int>(j, "machine_id");
    req.report.d = field<int>(j, "d");
    req.report.selected = field<std::vector<int>>(j, "selected");
    return req;
  }
  if (type == "poll") {
    req.type = Request::Type::Poll;
    req.poll.session_id = field<std::string>(j, "session_id");
    return req;
  }
  throw ServiceError(ErrorCode::BadRequest, "unknown request type \"" + type + "\"");
}

Reply parse_reply(const std::string& line) {
  json j = must_object(line);
  const std::string type = type_of(j);
  if (type == "open") {
    OpenAck m;
    m.session_id = field<std::string>(j, "session_id");
    m.expected_k = field<int>(j, "expected_k");
    m.d = field<int>(j, "d");
    m.rule = field<std::string>(j, "rule");
    return m;
  }
  if (type == "report") {
    ReportAck m;
    m.session_id = field<std::string>(j, "session_id");
    m.received = field<int>(j, "received");
    m.expected_k = field<int>(j, "expected_k");
    return m;
  }
  if (type == "poll") {
    PendingReply m;
    m.session_id = field<std::string>(j, "session_id");
    m.received = field<int>(j, "received");
    m.expected_k = field<int>(j, "expected_k");
    return m;
  }
  if (type == "result") {
    ResultMessage m;
    m.session_id = field<std::string>(j, "session_id");
    m.rule = field<std::string>(j, "rule");
    m.threshold_used = field<int>(j, "threshold_used");
    m.c0 = field<int>(j, "c0");
    m.d = field<int>(j, "d");
    m.selected = field<std::vector<int>>(j, "selected");
    m.machine_sizes = field<std::vector<int>>(j, "machine_sizes");
    return m;
  }
  if (type == "error") {
    ErrorReply m;
    const std::string code = field<std::string>(j, "code");
    auto parsed = error_code_from(code);
    if (!parsed) {
      throw ServiceError(ErrorCode::BadRequest, "unknown error code \"" + code + "\"");
    }
    m.code = *parsed;
    m.message = field<std::string>(j, "message");
    return m;
  }
  throw ServiceError(ErrorCode::BadRequest, "unknown reply type \"" + type + "\"");
}

}  // namespace adages::service
