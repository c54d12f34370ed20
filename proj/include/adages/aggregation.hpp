#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "adages/selection_set.hpp"

namespace adages {

/// Per-feature vote counts m_j over k machine-wise selections, plus the
/// machine-wise set sizes they came from. All derived quantities of the
/// aggregation algebra (threshold sets, the candidate-region bound c0, the
/// adaptive thresholds) are functions of this profile alone.
class VoteProfile {
 public:
  VoteProfile(int dimension, int machines, std::vector<int> counts,
              std::vector<int> machine_sizes);

  int dimension() const { return dimension_; }
  int machines() const { return machines_; }
  const std::vector<int>& counts() const { return counts_; }
  const std::vector<int>& machine_sizes() const { return machine_sizes_; }

  /// Sum of all votes; equals the sum of machine-wise sizes.
  std::int64_t total_votes() const { return total_votes_; }

  /// |{j : m_j >= c}| for c in [1, k].
  int size_at(int c) const;

  /// M = max_i |S_i|.
  int max_machine_size() const;

  /// s-bar = (1/k) sum_i |S_i|. Reporting only; comparisons against s-bar
  /// inside the algebra are done in exact integer arithmetic.
  double mean_machine_size() const {
    return static_cast<double>(total_votes_) / machines_;
  }

 private:
  int dimension_ = 0;
  int machines_ = 0;
  std::vector<int> counts_;
  std::vector<int> machine_sizes_;
  std::vector<int> sizes_at_;  // sizes_at_[c] = |{j: m_j >= c}|, c in [0, k]
  std::int64_t total_votes_ = 0;
};

/// Which aggregation rule the coordinator applies to the k reported sets.
struct AggregationRule {
  enum class Kind { Union, Intersection, Median, FixedThreshold, Adages, AdagesModified };

  Kind kind = Kind::Adages;
  int fixed_c = 0;  // only meaningful for FixedThreshold

  static AggregationRule union_rule() { return {Kind::Union, 0}; }
  static AggregationRule intersection() { return {Kind::Intersection, 0}; }
  static AggregationRule median() { return {Kind::Median, 0}; }
  static AggregationRule fixed_threshold(int c);
  static AggregationRule adages() { return {Kind::Adages, 0}; }
  static AggregationRule adages_modified() { return {Kind::AdagesModified, 0}; }

  /// "union", "intersection", "median", "fixed:<c>", "adages", "adages_m".
  std::string name() const;
  static std::optional<AggregationRule> parse(std::string_view name);

  friend bool operator==(const AggregationRule&, const AggregationRule&) = default;
};

/// Result of one aggregation round: the selected set, the threshold that
/// produced it, and the diagnostics of the adaptive machinery.
struct AggregationOutcome {
  SelectionSet selected{0};
  int threshold_used = 0;
  int c0 = 0;
  std::vector<double> eta_table;       // surrogate eta_c for c = 1..k; eta_k = inf
  std::optional<double> lambda_bar;    // absent when some machine set is empty
  std::optional<double> kappa_bar;     // absent when the intersection is empty
};

/// m_j = #{i : j in S_i}. All selections must have dimension `dimension`;
/// the list must be nonempty.
VoteProfile vote_counts(std::span<const SelectionSet> selections, int dimension);

/// {j : m_j >= c} for c in [1, k]. c = 1 is the Union rule, c = k the
/// Intersection rule.
SelectionSet threshold_select(const VoteProfile& profile, int c);

/// c0 = max{c in [1,k] : |S_(c)| >= s-bar}; always >= 1.
int c_upper(const VoteProfile& profile);

/// Surrogate complexity ratio (|S_(c)|+1)/(|S_(c+1)|+1) for c < k, +inf at
/// c = k.
double complexity_ratio(const VoteProfile& profile, int c);

/// Raw ratio |S_(c)|/|S_(c+1)| (diagnostic form; +inf when the denominator
/// vanishes and at c = k).
double complexity_ratio_raw(const VoteProfile& profile, int c);

/// c* = argmin{eta_c : 1 <= c <= c0} on the surrogate ratio, smallest c on
/// ties. Comparisons are exact (integer cross-multiplication).
int adaptive_threshold(const VoteProfile& profile);

/// c~ = argmin{c * |S_(c)| : 1 <= c <= c0}, smallest c on ties.
int modified_threshold(const VoteProfile& profile);

/// (M / c*) * sum_j 1/|S_j|. Throws DegenerateInput when some |S_j| = 0.
double lambda_bar(const VoteProfile& profile, int c_star);

/// M / |S_I|. Throws DegenerateInput when the intersection is empty.
double kappa_bar(const VoteProfile& profile, int intersection_size);

/// Runs the full round: vote counting, rule dispatch, threshold selection,
/// and the diagnostic bounds where defined.
AggregationOutcome aggregate(std::span<const SelectionSet> selections,
                             const AggregationRule& rule);

}  // namespace adages
