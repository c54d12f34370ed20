#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <string>

#include "adages/aggregation.hpp"
#include "adages/selection_set.hpp"
#include "adages/service/protocol.hpp"

namespace adages::service {

struct CoordinatorOptions {
  std::chrono::milliseconds session_timeout{60'000};
  std::size_t max_sessions = 1024;
};

/// What a report submission came back with: an ack while the session is still
/// filling, or the (possibly pre-existing) result once all reports are in.
struct SubmitOutcome {
  bool completed = false;
  int received = 0;
  int expected_k = 0;
  std::optional<ResultMessage> result;
};

struct PollOutcome {
  bool ready = false;
  int received = 0;
  int expected_k = 0;
  std::optional<ResultMessage> result;
};

/// The center machine: collects one selection set per machine per session and
/// aggregates exactly once when the k-th distinct report arrives. Thread-safe;
/// sessions expire (and are never partially aggregated) after their deadline.
class Coordinator {
 public:
  explicit Coordinator(CoordinatorOptions opts = {});

  /// Creates a session expecting exactly `expected_k` reports of dimension d.
  /// Throws ServiceError{BadRequest} for invalid arguments and
  /// ServiceError{Capacity} when the registry is full.
  std::string open_session(
      int expected_k, int d, const AggregationRule& rule,
      std::optional<std::chrono::milliseconds> timeout = std::nullopt);

  /// Stores one machine's selection. Identical retries are idempotent acks;
  /// conflicting retries raise DuplicateMachine; mismatched d raises
  /// DimensionMismatch; late reports raise Timeout.
  SubmitOutcome submit_report(const ReportMessage& report);

  /// Result lookup for earlier submitters. Raises UnknownSession/Timeout.
  PollOutcome poll(const std::string& session_id);

  /// Wire-level dispatch used by the TCP server: never throws, failures come
  /// back as ErrorReply.
  Reply handle(const Request& request);

  /// Sessions currently held (open, complete, or expired tombstones).
  std::size_t session_count() const;

 private:
  enum class State { Open, Complete, Expired };

  struct Session {
    State state = State::Open;
    int expected_k = 0;
    int d = 0;
    AggregationRule rule;
    std::chrono::steady_clock::time_point deadline;
    std::map<int, SelectionSet> reports;  // machine_id -> set
    std::optional<ResultMessage> result;
  };

  // Callers hold mutex_. Flips an overdue open session to Expired and drops
  // its partial reports (they are never aggregated).
  void refresh_state(Session& session);

  Session& find_session(const std::string& session_id);

  mutable std::mutex mutex_;
  CoordinatorOptions opts_;
  std::map<std::string, Session> sessions_;
  std::uint64_t next_token_ = 0;
  std::uint64_t token_nonce_ = 0;
};

}  // namespace adages::service
