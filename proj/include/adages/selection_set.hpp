#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace adages {

/// Thrown when an operation's input is valid but the quantity it defines
/// does not exist (e.g. a ratio over an empty set).
struct DegenerateInput : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// A subset of the feature indices [0, d). Members are kept sorted and
/// unique, so equal sets compare equal structurally.
class SelectionSet {
 public:
  explicit SelectionSet(int dimension) : dimension_(dimension) {
    if (dimension < 0) throw std::invalid_argument("SelectionSet: negative dimension");
  }

  /// Builds a set from arbitrary-order indices. Rejects out-of-range and
  /// duplicate members.
  static SelectionSet from_indices(int dimension, std::vector<int> members);

  /// Builds a set from a membership mask of length d.
  static SelectionSet from_mask(const std::vector<bool>& mask);

  int dimension() const { return dimension_; }
  int size() const { return static_cast<int>(members_.size()); }
  bool empty() const { return members_.empty(); }
  const std::vector<int>& members() const { return members_; }

  bool contains(int j) const;

  /// |this ∩ other|; both sets must share a dimension.
  int intersection_size(const SelectionSet& other) const;

  /// |this \ other|.
  int difference_size(const SelectionSet& other) const {
    return size() - intersection_size(other);
  }

  bool is_subset_of(const SelectionSet& other) const {
    return intersection_size(other) == size();
  }

  SelectionSet complement() const;

  friend bool operator==(const SelectionSet&, const SelectionSet&) = default;

 private:
  int dimension_ = 0;
  std::vector<int> members_;
};

}  // namespace adages
