#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "adages/data_gen.hpp"
#include "adages/metrics.hpp"

namespace adages {

/// One Monte-Carlo experiment: a base model, a swept variable (machine count
/// or dimension), the aggregation methods to compare, and run bookkeeping.
struct ExperimentConfig {
  LinearModelSpec base;
  std::string sweep_variable = "k";  // "k" or "d"
  std::vector<int> sweep_values;
  std::vector<std::string> methods;  // union, intersection, median, fixed:<c>,
                                     // adages, adages_m, xie_split
  double q = 0.2;
  int reps = 100;
  std::uint64_t seed = 1;
  std::string out_dir;  // empty: no CSV emission
  int workers = 1;

  void validate() const;
  static ExperimentConfig from_json_text(const std::string& text);
  static ExperimentConfig from_json_file(const std::string& path);
};

/// Everything a finished run hands back: the per-trial records in
/// deterministic order, their grouped summaries, and how often the monitored
/// (soft) bound check fired.
struct SweepResult {
  std::vector<TrialRecord> trials;
  std::vector<SweepSummary> summaries;
  int soft_violations = 0;
};

/// Raised when a deterministic per-trial counting bound fails; carries the
/// trial seed in the message so the case can be replayed.
struct TrialInvariantViolation : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// splitmix64-based stable mixing for per-trial and per-machine streams.
std::uint64_t mix_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b);

/// Runs the configured sweep. Trials execute on `workers` threads; output
/// order and content depend only on the config. When out_dir is set, writes
/// trials.csv and summary.csv there.
SweepResult run_sweep(const ExperimentConfig& config);

/// Runs one trial of the given shape (exposed for targeted experiments).
TrialRecord run_trial(const LinearModelSpec& spec,
                      const std::vector<std::string>& methods, double q,
                      int rep, std::uint64_t trial_seed, int* soft_violations);

/// The four Appendix-style machine-wise studies at total n = 1000. `cases`
/// are (k, d) pairs from {(5,20),(5,80),(10,20),(10,80)}. Writes
/// appendix_trials.csv, appendix_machines.csv, and appendix_summary.csv when
/// out_dir is nonempty.
SweepResult run_appendix_cases(double q, std::vector<std::pair<int, int>> cases,
                               int reps, std::uint64_t seed,
                               const std::string& out_dir, int workers = 1);

/// Selections-file round trip: one line per machine,
/// "machine_id<TAB>d<TAB>comma-separated indices" (empty list allowed).
std::vector<SelectionSet> parse_selections(std::istream& in);
std::vector<SelectionSet> parse_selections_file(const std::string& path);
void write_selections_file(const std::string& path,
                           const std::vector<SelectionSet>& sets);

/// Offline aggregation of a selections file under the named rule.
AggregationOutcome aggregate_file(const std::string& path,
                                  const AggregationRule& rule);

/// CSV emission with a stable numeric format (%.10g), one row per
/// (trial, method).
void write_trials_csv(std::ostream& out, const std::vector<TrialRecord>& trials);
void write_summary_csv(std::ostream& out, const std::vector<SweepSummary>& rows);

}  // namespace adages
