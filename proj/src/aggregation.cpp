#include "adages/aggregation.hpp"

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace adages {

// ---------------------------------------------------------------------------
// SelectionSet

SelectionSet SelectionSet::from_indices(int dimension, std::vector<int> indices) {
  SelectionSet s(dimension);
  std::sort(indices.begin(), indices.end());
  for (std::size_t i = 0; i < indices.size(); ++i) {
    int j = indices[i];
    if (j < 0 || j >= dimension) {
      throw std::invalid_argument("SelectionSet: index " + std::to_string(j) +
                                  " out of range for dimension " +
                                  std::to_string(dimension));
    }
    if (i > 0 && indices[i - 1] == j) {
      throw std::invalid_argument("SelectionSet: duplicate index " + std::to_string(j));
    }
  }
  s.members_ = std::move(indices);
  return s;
}

SelectionSet SelectionSet::from_mask(const std::vector<bool>& mask) {
  SelectionSet s(static_cast<int>(mask.size()));
  for (std::size_t j = 0; j < mask.size(); ++j) {
    if (mask[j]) s.members_.push_back(static_cast<int>(j));
  }
  return s;
}

bool SelectionSet::contains(int j) const {
  return std::binary_search(members_.begin(), members_.end(), j);
}

namespace {

void require_same_dimension(const SelectionSet& a, const SelectionSet& b) {
  if (a.dimension() != b.dimension()) {
    throw std::invalid_argument("SelectionSet: dimension mismatch (" +
                                std::to_string(a.dimension()) + " vs " +
                                std::to_string(b.dimension()) + ")");
  }
}

}  // namespace

int SelectionSet::intersection_size(const SelectionSet& other) const {
  require_same_dimension(*this, other);
  int count = 0;
  auto it = other.members_.begin();
  for (int j : members_) {
    it = std::lower_bound(it, other.members_.end(), j);
    if (it == other.members_.end()) break;
    if (*it == j) {
      ++count;
      ++it;
    }
  }
  return count;
}

SelectionSet SelectionSet::complement() const {
  SelectionSet out(dimension_);
  out.members_.reserve(static_cast<std::size_t>(dimension_) - members_.size());
  auto it = members_.begin();
  for (int j = 0; j < dimension_; ++j) {
    if (it != members_.end() && *it == j) {
      ++it;
    } else {
      out.members_.push_back(j);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// VoteProfile

VoteProfile::VoteProfile(int dimension, int machines, std::vector<int> counts,
                         std::vector<int> machine_sizes)
    : dimension_(dimension),
      machines_(machines),
      counts_(std::move(counts)),
      machine_sizes_(std::move(machine_sizes)) {
  if (dimension_ < 0) throw std::invalid_argument("VoteProfile: negative dimension");
  if (machines_ < 1) throw std::invalid_argument("VoteProfile: need at least one machine");
  if (static_cast<int>(counts_.size()) != dimension_) {
    throw std::invalid_argument("VoteProfile: counts length must equal dimension");
  }
  if (static_cast<int>(machine_sizes_.size()) != machines_) {
    throw std::invalid_argument("VoteProfile: machine_sizes length must equal machines");
  }
  for (int m : counts_) {
    if (m < 0 || m > machines_) {
      throw std::invalid_argument("VoteProfile: count out of [0, k]");
    }
  }
  std::int64_t from_sizes = 0;
  for (int s : machine_sizes_) {
    if (s < 0 || s > dimension_) {
      throw std::invalid_argument("VoteProfile: machine size out of [0, d]");
    }
    from_sizes += s;
  }
  total_votes_ = std::accumulate(counts_.begin(), counts_.end(), std::int64_t{0});
  if (total_votes_ != from_sizes) {
    throw std::invalid_argument("VoteProfile: counts and machine sizes disagree on total");
  }
  // sizes_at_[c] = |{j : m_j >= c}| via a histogram suffix sum.
  std::vector<int> hist(static_cast<std::size_t>(machines_) + 1, 0);
  for (int m : counts_) ++hist[static_cast<std::size_t>(m)];
  sizes_at_.assign(static_cast<std::size_t>(machines_) + 2, 0);
  for (int c = machines_; c >= 0; --c) {
    sizes_at_[static_cast<std::size_t>(c)] =
        sizes_at_[static_cast<std::size_t>(c) + 1] + hist[static_cast<std::size_t>(c)];
  }
}

int VoteProfile::size_at(int c) const {
  if (c < 1 || c > machines_) {
    throw std::invalid_argument("VoteProfile: threshold must lie in [1, k]");
  }
  return sizes_at_[static_cast<std::size_t>(c)];
}

int VoteProfile::max_machine_size() const {
  return *std::max_element(machine_sizes_.begin(), machine_sizes_.end());
}

// ---------------------------------------------------------------------------
// AggregationRule

AggregationRule AggregationRule::fixed_threshold(int c) {
  if (c < 1) throw std::invalid_argument("AggregationRule: fixed threshold must be >= 1");
  return {Kind::FixedThreshold, c};
}

std::string AggregationRule::name() const {
  switch (kind) {
    case Kind::Union: return "union";
    case Kind::Intersection: return "intersection";
    case Kind::Median: return "median";
    case Kind::FixedThreshold: return "fixed:" + std::to_string(fixed_c);
    case Kind::Adages: return "adages";
    case Kind::AdagesModified: return "adages_m";
  }
  return "unknown";
}

std::optional<AggregationRule> AggregationRule::parse(std::string_view name) {
  if (name == "union") return union_rule();
  if (name == "intersection") return intersection();
  if (name == "median") return median();
  if (name == "adages") return adages();
  if (name == "adages_m") return adages_modified();
  if (name.starts_with("fixed:")) {
    std::string_view num = name.substr(6);
    int c = 0;
    auto [ptr, ec] = std::from_chars(num.data(), num.data() + num.size(), c);
    if (ec == std::errc() && ptr == num.data() + num.size() && c >= 1) {
      return fixed_threshold(c);
    }
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Core operations

VoteProfile vote_counts(std::span<const SelectionSet> selections, int dimension) {
  if (selections.empty()) {
    throw std::invalid_argument("vote_counts: need at least one selection");
  }
  std::vector<int> counts(static_cast<std::size_t>(dimension), 0);
  std::vector<int> sizes;
  sizes.reserve(selections.size());
  for (const SelectionSet& s : selections) {
    if (s.dimension() != dimension) {
      throw std::invalid_argument("vote_counts: selection dimension mismatch");
    }
    for (int j : s.members()) ++counts[static_cast<std::size_t>(j)];
    sizes.push_back(s.size());
  }
  return VoteProfile(dimension, static_cast<int>(selections.size()),
                     std::move(counts), std::move(sizes));
}

SelectionSet threshold_select(const VoteProfile& profile, int c) {
  if (c < 1 || c > profile.machines()) {
    throw std::invalid_argument("threshold_select: threshold must lie in [1, k]");
  }
  std::vector<int> members;
  members.reserve(static_cast<std::size_t>(profile.size_at(c)));
  const std::vector<int>& m = profile.counts();
  for (int j = 0; j < profile.dimension(); ++j) {
    if (m[static_cast<std::size_t>(j)] >= c) members.push_back(j);
  }
  return SelectionSet::from_indices(profile.dimension(), std::move(members));
}

int c_upper(const VoteProfile& profile) {
  // |S_(c)| >= s-bar  <=>  k * |S_(c)| >= sum_i |S_i|, kept in integers.
  const int k = profile.machines();
  const std::int64_t total = profile.total_votes();
  for (int c = k; c >= 2; --c) {
    if (static_cast<std::int64_t>(k) * profile.size_at(c) >= total) return c;
  }
  return 1;  // |S_(1)| >= s-bar always holds (the union is at least as big
             // as the average machine size).
}

double complexity_ratio(const VoteProfile& profile, int c) {
  if (c < 1 || c > profile.machines()) {
    throw std::invalid_argument("complexity_ratio: threshold must lie in [1, k]");
  }
  if (c == profile.machines()) return std::numeric_limits<double>::infinity();
  return (profile.size_at(c) + 1.0) / (profile.size_at(c + 1) + 1.0);
}

double complexity_ratio_raw(const VoteProfile& profile, int c) {
  if (c < 1 || c > profile.machines()) {
    throw std::invalid_argument("complexity_ratio_raw: threshold must lie in [1, k]");
  }
  if (c == profile.machines() || profile.size_at(c + 1) == 0) {
    return std::numeric_limits<double>::infinity();
  }
  return static_cast<double>(profile.size_at(c)) / profile.size_at(c + 1);
}

int adaptive_threshold(const VoteProfile& profile) {
  const int k = profile.machines();
  const int c0 = c_upper(profile);
  // Minimize eta_c = (|S_(c)|+1)/(|S_(c+1)|+1) over c in [1, c0], smallest c
  // winning ties. Ratios are compared exactly by integer cross multiplication
  // with (num, den = 0) standing in for eta_k = +inf; the infinite ratio can
  // only be chosen when it is the sole candidate (k = 1).
  int best_c = 1;
  std::int64_t best_num = 0, best_den = 0;  // den == 0 => +inf sentinel
  auto ratio_at = [&](int c) -> std::pair<std::int64_t, std::int64_t> {
    if (c == k) return {1, 0};
    return {profile.size_at(c) + 1, profile.size_at(c + 1) + 1};
  };
  bool first = true;
  for (int c = 1; c <= c0; ++c) {
    auto [num, den] = ratio_at(c);
    bool better;
    if (first) {
      better = true;
      first = false;
    } else if (den == 0) {
      better = false;  // +inf never beats anything already held
    } else if (best_den == 0) {
      better = true;  // any finite ratio beats +inf
    } else {
      better = num * best_den < best_num * den;  // strict: ties keep smaller c
    }
    if (better) {
      best_c = c;
      best_num = num;
      best_den = den;
    }
  }
  return best_c;
}

int modified_threshold(const VoteProfile& profile) {
  const int c0 = c_upper(profile);
  int best_c = 1;
  std::int64_t best_val = std::numeric_limits<std::int64_t>::max();
  for (int c = 1; c <= c0; ++c) {
    std::int64_t val = static_cast<std::int64_t>(c) * profile.size_at(c);
    if (val < best_val) {  // strict: ties keep smaller c
      best_val = val;
      best_c = c;
    }
  }
  return best_c;
}

double lambda_bar(const VoteProfile& profile, int c_star) {
  if (c_star < 1 || c_star > profile.machines()) {
    throw std::invalid_argument("lambda_bar: threshold must lie in [1, k]");
  }
  double inv_sum = 0.0;
  for (int s : profile.machine_sizes()) {
    if (s == 0) {
      throw DegenerateInput("lambda_bar: undefined when a machine selects nothing");
    }
    inv_sum += 1.0 / s;
  }
  return static_cast<double>(profile.max_machine_size()) / c_star * inv_sum;
}

double kappa_bar(const VoteProfile& profile, int intersection_size) {
  if (intersection_size < 0) {
    throw std::invalid_argument("kappa_bar: negative intersection size");
  }
  if (intersection_size == 0) {
    throw DegenerateInput("kappa_bar: undefined when the intersection is empty");
  }
  return static_cast<double>(profile.max_machine_size()) / intersection_size;
}

AggregationOutcome aggregate(std::span<const SelectionSet> selections,
                             const AggregationRule& rule) {
  if (selections.empty()) {
    throw std::invalid_argument("aggregate: need at least one selection");
  }
  const int dimension = selections.front().dimension();
  VoteProfile profile = vote_counts(selections, dimension);
  const int k = profile.machines();

  int c = 1;
  switch (rule.kind) {
    case AggregationRule::Kind::Union: c = 1; break;
    case AggregationRule::Kind::Intersection: c = k; break;
    case AggregationRule::Kind::Median: c = (k + 1) / 2; break;
    case AggregationRule::Kind::FixedThreshold:
      if (rule.fixed_c < 1 || rule.fixed_c > k) {
        throw std::invalid_argument("aggregate: fixed threshold out of [1, k]");
      }
      c = rule.fixed_c;
      break;
    case AggregationRule::Kind::Adages: c = adaptive_threshold(profile); break;
    case AggregationRule::Kind::AdagesModified: c = modified_threshold(profile); break;
  }

  AggregationOutcome out{threshold_select(profile, c), c, c_upper(profile), {}, {}, {}};
  out.eta_table.reserve(static_cast<std::size_t>(k));
  for (int cc = 1; cc <= k; ++cc) out.eta_table.push_back(complexity_ratio(profile, cc));
  bool any_empty = std::any_of(profile.machine_sizes().begin(),
                               profile.machine_sizes().end(),
                               [](int s) { return s == 0; });
  if (!any_empty) out.lambda_bar = lambda_bar(profile, c);
  int isize = profile.size_at(k);
  if (isize > 0) out.kappa_bar = kappa_bar(profile, isize);
  return out;
}

}  // namespace adages
