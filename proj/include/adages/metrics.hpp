#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "adages/aggregation.hpp"
#include "adages/data_gen.hpp"
#include "adages/selection_set.hpp"

namespace adages {

/// False discovery proportion |est \ truth| / |est|, 0/0 = 0.
double fdp(const SelectionSet& est, const SelectionSet& truth);

/// True positive proportion |est ∩ truth| / |truth|. Throws when truth is
/// empty (power is undefined without true features).
double tpp(const SelectionSet& est, const SelectionSet& truth);

/// |union_est ∩ truth| - |adages_est ∩ truth|. Requires adages_est ⊆
/// union_est, so the result is a nonnegative count of true features the
/// stricter rule gives up.
int diff_count(const SelectionSet& union_est, const SelectionSet& adages_est,
               const SelectionSet& truth);

/// Power-shrinkage term c* |S_(c*)| FDP / (k |S|).
double power_shrinkage(int c_star, int est_size, int k, int truth_size,
                       double fdp_value);

/// One aggregation rule's result and error metrics on a trial. `label`
/// distinguishes methods that share a rule (the split-level baseline reuses
/// the union rule at level q/k); empty means the rule's own name.
struct RuleResult {
  AggregationRule rule;
  AggregationOutcome outcome;
  double fdp = 0.0;
  double tpp = 0.0;
  std::string label;
  // False when the outcome was aggregated from a different selector pass than
  // the record's machine_sets (the split-level baseline). Such entries are
  // excluded from the profile-based counting checks.
  bool from_trial_machines = true;

  std::string method_name() const;
};

/// Everything recorded about a single simulated trial. The raw sets are kept
/// so that every metric can be recomputed from the record alone.
struct TrialRecord {
  int k = 0;
  int d = 0;
  int n = 0;
  int s = 0;
  int rep = 0;
  std::uint64_t seed = 0;
  int failures = 0;  // machines whose selector failed on this trial

  GroundTruth truth;
  std::vector<SelectionSet> machine_sets;
  std::vector<RuleResult> rules;  // in configured method order
  std::vector<double> machine_fdp;
  std::vector<double> machine_tpp;

  int c_star = 0;   // adaptive threshold of this trial's vote profile
  int c_tilde = 0;  // modified threshold
  int diff = 0;     // true discoveries Union has beyond ADAGES

  const RuleResult* find(const AggregationRule& rule) const;
};

/// Monte-Carlo means of one (method, k, d) group plus the spread of the
/// thresholds the method used.
struct SweepSummary {
  std::string method;
  int k = 0;
  int d = 0;
  double mean_fdp = 0.0;
  double mean_power = 0.0;
  int reps = 0;
  double c_star_min = 0.0;
  double c_star_q25 = 0.0;
  double c_star_med = 0.0;
  double c_star_q75 = 0.0;
  double c_star_max = 0.0;
};

/// Linear-interpolation quantile (R type 7) of an unsorted sample; p in
/// [0, 1]. Throws on empty input.
double quantile_type7(std::vector<double> values, double p);

/// Groups records by (method, k, d) in first-appearance order and averages.
std::vector<SweepSummary> summarize(std::span<const TrialRecord> records);

/// One failed per-trial consistency check. Hard violations contradict
/// deterministic counting bounds and indicate a bug; soft ones are monitored
/// bound checks that need distributional assumptions to hold.
struct InequalityViolation {
  std::string what;
  bool hard = true;
};

/// Per-trial counting-bound checks:
///  - every rule: k |agg ∩ S| + c |S \ agg| >= sum_i |S_i ∩ S|  (hard)
///  - union of false parts <= sum of machine false parts        (hard)
///  - k * intersection false part <= sum of false parts         (hard)
///  - conditional power bound at c* when the aggregate stays within 1.5 |S|
///    and c* <= k/2                                             (soft)
std::vector<InequalityViolation> check_trial(const TrialRecord& rec);

}  // namespace adages
