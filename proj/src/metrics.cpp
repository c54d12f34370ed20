#include "adages/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <tuple>
#include <utility>

namespace adages {

double fdp(const SelectionSet& est, const SelectionSet& truth) {
  if (est.dimension() != truth.dimension()) {
    throw std::invalid_argument("fdp: dimension mismatch");
  }
  if (est.size() == 0) return 0.0;
  return static_cast<double>(est.size() - est.intersection_size(truth)) / est.size();
}

double tpp(const SelectionSet& est, const SelectionSet& truth) {
  if (est.dimension() != truth.dimension()) {
    throw std::invalid_argument("tpp: dimension mismatch");
  }
  if (truth.size() == 0) {
    throw std::invalid_argument("tpp: undefined for empty truth");
  }
  return static_cast<double>(est.intersection_size(truth)) / truth.size();
}

int diff_count(const SelectionSet& union_est, const SelectionSet& adages_est,
               const SelectionSet& truth) {
  if (!adages_est.is_subset_of(union_est)) {
    throw std::invalid_argument("diff_count: stricter estimate must be a subset of the union");
  }
  return union_est.intersection_size(truth) - adages_est.intersection_size(truth);
}

double power_shrinkage(int c_star, int est_size, int k, int truth_size,
                       double fdp_value) {
  if (truth_size < 1) throw std::invalid_argument("power_shrinkage: truth_size must be >= 1");
  if (k < 1) throw std::invalid_argument("power_shrinkage: k must be >= 1");
  return static_cast<double>(c_star) * est_size * fdp_value /
         (static_cast<double>(k) * truth_size);
}

std::string RuleResult::method_name() const {
  return label.empty() ? rule.name() : label;
}

const RuleResult* TrialRecord::find(const AggregationRule& rule) const {
  for (const RuleResult& r : rules) {
    if (r.rule == rule) return &r;
  }
  return nullptr;
}

double quantile_type7(std::vector<double> values, double p) {
  if (values.empty()) throw std::invalid_argument("quantile_type7: empty sample");
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("quantile_type7: p outside [0,1]");
  std::sort(values.begin(), values.end());
  const double h = (values.size() - 1) * p;
  const auto lo = static_cast<std::size_t>(h);
  if (lo + 1 >= values.size()) return values.back();
  return values[lo] + (h - lo) * (values[lo + 1] - values[lo]);
}

std::vector<SweepSummary> summarize(std::span<const TrialRecord> records) {
  if (records.empty()) throw std::invalid_argument("summarize: no records");
  struct Group {
    double fdp_sum = 0.0;
    double tpp_sum = 0.0;
    std::vector<double> thresholds;
  };
  // Key = (method, k, d); insertion order preserved for stable output.
  std::vector<std::pair<std::tuple<std::string, int, int>, Group>> groups;
  auto slot = [&](const std::string& method, int k, int d) -> Group& {
    std::tuple<std::string, int, int> key{method, k, d};
    for (auto& [gk, g] : groups) {
      if (gk == key) return g;
    }
    groups.emplace_back(std::move(key), Group{});
    return groups.back().second;
  };
  for (const TrialRecord& rec : records) {
    if (rec.failures > 0) continue;  // failed trials never enter the means
    for (const RuleResult& r : rec.rules) {
      Group& g = slot(r.method_name(), rec.k, rec.d);
      g.fdp_sum += r.fdp;
      g.tpp_sum += r.tpp;
      g.thresholds.push_back(static_cast<double>(r.outcome.threshold_used));
    }
  }
  std::vector<SweepSummary> out;
  out.reserve(groups.size());
  for (auto& [key, g] : groups) {
    const int reps = static_cast<int>(g.thresholds.size());
    SweepSummary s;
    s.method = std::get<0>(key);
    s.k = std::get<1>(key);
    s.d = std::get<2>(key);
    s.mean_fdp = g.fdp_sum / reps;
    s.mean_power = g.tpp_sum / reps;
    s.reps = reps;
    s.c_star_min = quantile_type7(g.thresholds, 0.0);
    s.c_star_q25 = quantile_type7(g.thresholds, 0.25);
    s.c_star_med = quantile_type7(g.thresholds, 0.5);
    s.c_star_q75 = quantile_type7(g.thresholds, 0.75);
    s.c_star_max = quantile_type7(g.thresholds, 1.0);
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<InequalityViolation> check_trial(const TrialRecord& rec) {
  std::vector<InequalityViolation> out;
  if (rec.machine_sets.empty()) return out;
  const int k = static_cast<int>(rec.machine_sets.size());
  const SelectionSet& truth = rec.truth.support;
  const int d = truth.dimension();
  VoteProfile profile = vote_counts(rec.machine_sets, d);

  std::int64_t true_votes = 0;   // sum_i |S_i ∩ S| = sum_{j in S} m_j
  std::int64_t false_votes = 0;  // sum_i |S_i ∩ S^c|
  for (const SelectionSet& s : rec.machine_sets) {
    const int hits = s.intersection_size(truth);
    true_votes += hits;
    false_votes += s.size() - hits;
  }

  // Identity |S| sum_i TPP_i = sum_{j in S} m_j, cross-checked through the
  // vote-count path.
  std::int64_t vote_path = 0;
  for (int j : truth.members()) vote_path += profile.counts()[static_cast<std::size_t>(j)];
  if (vote_path != true_votes) {
    out.push_back({"vote-count identity broken between set and profile paths", true});
  }

  // Power-shrinkage counting bound, valid for any vote threshold c:
  // votes on S split into members of the aggregate (each counted at most k
  // times) and non-members (each fewer than c times).
  for (const RuleResult& r : rec.rules) {
    if (!r.from_trial_machines) continue;
    const int c = r.outcome.threshold_used;
    const std::int64_t hits = r.outcome.selected.intersection_size(truth);
    const std::int64_t missed = truth.size() - hits;
    if (static_cast<std::int64_t>(k) * hits + static_cast<std::int64_t>(c) * missed <
        true_votes) {
      out.push_back({"power-shrinkage count bound violated for rule " + r.rule.name(), true});
    }
  }

  // Union rule: every false discovery of the union is some machine's false
  // discovery.
  SelectionSet union_set = threshold_select(profile, 1);
  const std::int64_t union_false = union_set.size() - union_set.intersection_size(truth);
  if (union_false > false_votes) {
    out.push_back({"union false-discovery count bound violated", true});
  }

  // Intersection rule: a joint false discovery is counted by all k machines.
  SelectionSet inter_set = threshold_select(profile, k);
  const std::int64_t inter_false = inter_set.size() - inter_set.intersection_size(truth);
  if (static_cast<std::int64_t>(k) * inter_false > false_votes) {
    out.push_back({"intersection false-discovery count bound violated", true});
  }

  // Conditional power bound at the adaptive threshold. This one leans on the
  // aggregate retaining most collective true discoveries, which holds under
  // the stated size conditions in typical runs but is not a counting
  // identity, so violations are reported as soft.
  if (truth.size() >= 1 && rec.c_star >= 1) {
    SelectionSet agg = threshold_select(profile, rec.c_star);
    if (2 * agg.size() <= 3 * truth.size() && 2 * rec.c_star <= k) {
      const double tpp_agg = tpp(agg, truth);
      const double fdp_agg = fdp(agg, truth);
      const double machine_mean =
          static_cast<double>(true_votes) / (static_cast<double>(k) * truth.size());
      const double growth = static_cast<double>(agg.size()) / truth.size();
      const double bound =
          machine_mean - (static_cast<double>(rec.c_star) / k) * growth * fdp_agg;
      if (tpp_agg + 1e-9 < bound) {
        out.push_back({"conditional power bound violated at c*", false});
      }
    }
  }
  return out;
}

}  // namespace adages
