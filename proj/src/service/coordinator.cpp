#include "adages/service/coordinator.hpp"

#include <cinttypes>
#include <cstdio>
#include <random>
#include <utility>
#include <vector>

namespace adages::service {
namespace {

std::uint64_t mix_token(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

ResultMessage build_result(const std::string& session_id, int d,
                           const AggregationRule& rule,
                           const std::map<int, SelectionSet>& reports) {
  std::vector<SelectionSet> sets;
  sets.reserve(reports.size());
  ResultMessage out;
  for (const auto& [machine_id, set] : reports) {
    sets.push_back(set);
    out.machine_sizes.push_back(set.size());
  }
  AggregationOutcome outcome = aggregate(sets, rule);
  out.session_id = session_id;
  out.rule = rule.name();
  out.threshold_used = outcome.threshold_used;
  out.c0 = outcome.c0;
  out.d = d;
  out.selected = outcome.selected.members();
  return out;
}

}  // namespace

Coordinator::Coordinator(CoordinatorOptions opts) : opts_(opts) {
  std::random_device rd;
  token_nonce_ = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
}

void Coordinator::refresh_state(Session& session) {
  if (session.state == State::Open &&
      std::chrono::steady_clock::now() > session.deadline) {
    session.state = State::Expired;
    session.reports.clear();  // partial sessions are never aggregated
  }
}

Coordinator::Session& Coordinator::find_session(const std::string& session_id) {
  auto it = sessions_.find(session_id);
  if (it == sessions_.end()) {
    throw ServiceError(ErrorCode::UnknownSession,
                       "unknown session \"" + session_id + "\"");
  }
  refresh_state(it->second);
  return it->second;
}

std::string Coordinator::open_session(
    int expected_k, int d, const AggregationRule& rule,
    std::optional<std::chrono::milliseconds> timeout) {
  if (expected_k < 1) {
    throw ServiceError(ErrorCode::BadRequest, "expected_k must be >= 1");
  }
  if (d < 1) {
    throw ServiceError(ErrorCode::BadRequest, "d must be >= 1");
  }
  if (rule.kind == AggregationRule::Kind::FixedThreshold &&
      (rule.fixed_c < 1 || rule.fixed_c > expected_k)) {
    throw ServiceError(ErrorCode::BadRequest,
                       "fixed threshold outside [1, expected_k]");
  }
  const auto ttl = timeout.value_or(opts_.session_timeout);
  if (ttl.count() <= 0) {
    throw ServiceError(ErrorCode::BadRequest, "timeout must be positive");
  }

  std::lock_guard<std::mutex> lock(mutex_);
  if (sessions_.size() >= opts_.max_sessions) {
    // Reclaim tombstones before refusing outright.
    for (auto it = sessions_.begin(); it != sessions_.end();) {
      refresh_state(it->second);
      if (it->second.state == State::Expired) {
        it = sessions_.erase(it);
      } else {
        ++it;
      }
    }
    if (sessions_.size() >= opts_.max_sessions) {
      throw ServiceError(ErrorCode::Capacity, "session registry is full");
    }
  }

  char token[64];
  std::snprintf(token, sizeof token, "s%06" PRIu64 "-%016" PRIx64, next_token_,
                mix_token(token_nonce_ ^ next_token_));
  ++next_token_;

  Session session;
  session.expected_k = expected_k;
  session.d = d;
  session.rule = rule;
  session.deadline = std::chrono::steady_clock::now() + ttl;
  sessions_.emplace(token, std::move(session));
  return token;
}

SubmitOutcome Coordinator::submit_report(const ReportMessage& report) {
  std::lock_guard<std::mutex> lock(mutex_);
  Session& session = find_session(report.session_id);

  if (session.state == State::Expired) {
    throw ServiceError(ErrorCode::Timeout,
                       "session \"" + report.session_id + "\" timed out");
  }
  if (report.d != session.d) {
    throw ServiceError(ErrorCode::DimensionMismatch,
                       "report d=" + std::to_string(report.d) +
                           " but session d=" + std::to_string(session.d));
  }
  if (report.machine_id < 0 || report.machine_id >= session.expected_k) {
    throw ServiceError(ErrorCode::BadRequest,
                       "machine_id must lie in [0, expected_k)");
  }
  SelectionSet incoming{0};
  try {
    incoming = SelectionSet::from_indices(report.d, report.selected);
  } catch (const std::invalid_argument& e) {
    throw ServiceError(ErrorCode::BadRequest, e.what());
  }

  auto it = session.reports.find(report.machine_id);
  if (it != session.reports.end()) {
    if (it->second == incoming) {
      // Idempotent retry: re-ack (and hand back the result if it exists).
      SubmitOutcome out;
      out.received = static_cast<int>(session.reports.size());
      out.expected_k = session.expected_k;
      out.completed = session.state == State::Complete;
      out.result = session.result;
      return out;
    }
    throw ServiceError(ErrorCode::DuplicateMachine,
                       "machine " + std::to_string(report.machine_id) +
                           " already reported a different set");
  }
  if (session.state == State::Complete) {
    // All expected ids are taken once complete, so only retries reach here.
    throw ServiceError(ErrorCode::DuplicateMachine,
                       "session already aggregated");
  }

  session.reports.emplace(report.machine_id, std::move(incoming));
  SubmitOutcome out;
  out.received = static_cast<int>(session.reports.size());
  out.expected_k = session.expected_k;
  if (out.received == session.expected_k) {
    session.result = build_result(report.session_id, session.d, session.rule,
                                  session.reports);
    session.state = State::Complete;
    out.completed = true;
    out.result = session.result;
  }
  return out;
}

PollOutcome Coordinator::poll(const std::string& session_id) {
  std::lock_guard<std::mutex> lock(mutex_);
  Session& session = find_session(session_id);
  if (session.state == State::Expired) {
    throw ServiceError(ErrorCode::Timeout,
                       "session \"" + session_id + "\" timed out");
  }
  PollOutcome out;
  out.received = static_cast<int>(session.reports.size());
  out.expected_k = session.expected_k;
  if (session.state == State::Complete) {
    out.ready = true;
    out.result = session.result;
  }
  return out;
}

Reply Coordinator::handle(const Request& request) {
  try {
    switch (request.type) {
      case Request::Type::Open: {
        auto rule = AggregationRule::parse(request.open.rule);
        if (!rule) {
          throw ServiceError(ErrorCode::BadRequest,
                             "unknown rule \"" + request.open.rule + "\"");
        }
        std::optional<std::chrono::milliseconds> ttl;
        if (request.open.timeout_ms) {
          ttl = std::chrono::milliseconds(*request.open.timeout_ms);
        }
        OpenAck ack;
        ack.session_id =
            open_session(request.open.expected_k, request.open.d, *rule, ttl);
        ack.expected_k = request.open.expected_k;
        ack.d = request.open.d;
        ack.rule = rule->name();
        return ack;
      }
      case Request::Type::Report: {
        SubmitOutcome out = submit_report(request.report);
        if (out.completed) return *out.result;
        ReportAck ack;
        ack.session_id = request.report.session_id;
        ack.received = out.received;
        ack.expected_k = out.expected_k;
        return ack;
      }
      case Request::Type::Poll: {
        PollOutcome out = poll(request.poll.session_id);
        if (out.ready) return *out.result;
        PendingReply pending;
        pending.session_id = request.poll.session_id;
        pending.received = out.received;
        pending.expected_k = out.expected_k;
        return pending;
      }
    }
    return ErrorReply{ErrorCode::BadRequest, "unknown request type"};
  } catch (const ServiceError& e) {
    return ErrorReply{e.code(), e.what()};
  } catch (const std::exception& e) {
    return ErrorReply{ErrorCode::BadRequest, e.what()};
  }
}

std::size_t Coordinator::session_count() const {
  std::lock_guard<std::mutex> lock(mutex_);
  return sessions_.size();
}

}  // namespace adages::service
