#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace ihw {

/// A unit-norm real vector. The only ways to obtain one are normalize() and
/// group actions, so the unit-norm invariant holds by construction.
class Signal {
 public:
  static Signal normalize(std::span<const double> v);

  std::size_t dim() const noexcept { return values_.size(); }
  std::span<const double> values() const noexcept { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }

  friend bool operator==(const Signal&, const Signal&) = default;

 private:
  explicit Signal(std::vector<double> values) : values_(std::move(values)) {}
  friend class GroupElement;

  std::vector<double> values_;
};

double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> v);

/// Coordinate permutation acting on R^d: apply(x)[map[i]] = x[i].
class GroupElement {
 public:
  explicit GroupElement(std::vector<std::size_t> map);

  static GroupElement identity(std::size_t d);
  /// Cyclic shift by k: index i moves to (i + k) mod d.
  static GroupElement shift(std::size_t d, std::size_t k);

  std::size_t dim() const noexcept { return map_.size(); }
  std::span<const std::size_t> map() const noexcept { return map_; }
  bool is_identity() const noexcept;

  /// (a * b) acts as a(b(x)).
  GroupElement operator*(const GroupElement& rhs) const;
  GroupElement inverse() const;

  Signal apply(const Signal& x) const;
  std::vector<double> apply(std::span<const double> x) const;

  friend bool operator==(const GroupElement&, const GroupElement&) = default;

 private:
  std::vector<std::size_t> map_;
};

/// An ordered list of permutations of one dimension. Construction only checks
/// that every entry is a permutation of the right length; the group axioms are
/// checked separately by verify_group_axioms(), so subsets of a group can be
/// represented too (e.g. for pooling over a restricted range).
class FiniteGroup {
 public:
  explicit FiniteGroup(std::vector<GroupElement> elements);

  std::size_t dim() const noexcept { return dim_; }
  std::size_t order() const noexcept { return elements_.size(); }
  const std::vector<GroupElement>& elements() const noexcept { return elements_; }
  const GroupElement& operator[](std::size_t k) const { return elements_[k]; }
  std::optional<std::size_t> identity_index() const noexcept { return identity_index_; }

 private:
  std::vector<GroupElement> elements_;
  std::size_t dim_;
  std::optional<std::size_t> identity_index_;
};

FiniteGroup cyclic_group(std::size_t d);
FiniteGroup trivial_group(std::size_t d);

Signal apply(const GroupElement& g, const Signal& x);

struct Orbit {
  Signal representative;
  std::vector<Signal> members;  // members[k] = elements[k] applied to representative
};

Orbit orbit(const FiniteGroup& group, const Signal& x);

struct GroupAxiomReport {
  bool closure_ok = false;
  bool identity_ok = false;
  bool inverses_ok = false;
  bool all_ok() const noexcept { return closure_ok && identity_ok && inverses_ok; }
};

GroupAxiomReport verify_group_axioms(const FiniteGroup& group);

}  // namespace ihw
