#include "ihw/signal_group.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ihw/error.hpp"

namespace ihw {

double dot(std::span<const double> a, std::span<const double> b) {
  require_dims(a.size(), b.size(), "dot");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm2(std::span<const double> v) {
  // Scaled accumulation keeps tiny and huge inputs away from under/overflow.
  // Summing in ascending order makes the result independent of entry order,
  // so permuted signals have bit-identical norms.
  double scale = 0.0;
  for (double x : v) scale = std::max(scale, std::abs(x));
  if (scale == 0.0 || !std::isfinite(scale)) return scale;
  std::vector<double> sq;
  sq.reserve(v.size());
  for (double x : v) sq.push_back((x / scale) * (x / scale));
  std::sort(sq.begin(), sq.end());
  double s = 0.0;
  for (double q : sq) s += q;
  return scale * std::sqrt(s);
}

Signal Signal::normalize(std::span<const double> v) {
  if (v.empty()) throw Error(ErrorCode::InvalidArgument, "signal dimension must be >= 1");
  const double n = norm2(v);
  if (!std::isfinite(n)) throw Error(ErrorCode::InvalidArgument, "non-finite signal entry");
  if (n < 1e-300) throw Error(ErrorCode::ZeroVector, "cannot normalize a zero vector");
  std::vector<double> out(v.begin(), v.end());
  for (double& x : out) x /= n;
  return Signal(std::move(out));
}

GroupElement::GroupElement(std::vector<std::size_t> map) : map_(std::move(map)) {
  if (map_.empty()) throw Error(ErrorCode::InvalidArgument, "group element dimension must be >= 1");
  std::vector<bool> seen(map_.size(), false);
  for (std::size_t target : map_) {
    if (target >= map_.size() || seen[target]) {
      throw Error(ErrorCode::InvalidArgument, "group element is not a permutation");
    }
    seen[target] = true;
  }
}

GroupElement GroupElement::identity(std::size_t d) { return shift(d, 0); }

GroupElement GroupElement::shift(std::size_t d, std::size_t k) {
  if (d == 0) throw Error(ErrorCode::InvalidArgument, "dimension must be >= 1");
  std::vector<std::size_t> map(d);
  for (std::size_t i = 0; i < d; ++i) map[i] = (i + k) % d;
  return GroupElement(std::move(map));
}

bool GroupElement::is_identity() const noexcept {
  for (std::size_t i = 0; i < map_.size(); ++i)
    if (map_[i] != i) return false;
  return true;
}

GroupElement GroupElement::operator*(const GroupElement& rhs) const {
  require_dims(dim(), rhs.dim(), "group composition");
  std::vector<std::size_t> map(dim());
  for (std::size_t i = 0; i < dim(); ++i) map[i] = map_[rhs.map_[i]];
  return GroupElement(std::move(map));
}

GroupElement GroupElement::inverse() const {
  std::vector<std::size_t> map(dim());
  for (std::size_t i = 0; i < dim(); ++i) map[map_[i]] = i;
  return GroupElement(std::move(map));
}

std::vector<double> GroupElement::apply(std::span<const double> x) const {
  require_dims(dim(), x.size(), "group action");
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[map_[i]] = x[i];
  return out;
}

Signal GroupElement::apply(const Signal& x) const {
  // A permutation of a unit vector is a unit vector; no renormalization.
  return Signal(apply(x.values()));
}

FiniteGroup::FiniteGroup(std::vector<GroupElement> elements) : elements_(std::move(elements)) {
  if (elements_.empty()) throw Error(ErrorCode::InvalidArgument, "group must have at least one element");
  dim_ = elements_.front().dim();
  for (std::size_t k = 0; k < elements_.size(); ++k) {
    require_dims(dim_, elements_[k].dim(), "group element");
    if (!identity_index_ && elements_[k].is_identity()) identity_index_ = k;
  }
}

FiniteGroup cyclic_group(std::size_t d) {
  std::vector<GroupElement> elements;
  elements.reserve(d);
  for (std::size_t k = 0; k < d; ++k) elements.push_back(GroupElement::shift(d, k));
  if (elements.empty()) throw Error(ErrorCode::InvalidArgument, "cyclic_group requires d >= 1");
  return FiniteGroup(std::move(elements));
}

FiniteGroup trivial_group(std::size_t d) { return FiniteGroup({GroupElement::identity(d)}); }

Signal apply(const GroupElement& g, const Signal& x) { return g.apply(x); }

Orbit orbit(const FiniteGroup& group, const Signal& x) {
  require_dims(group.dim(), x.dim(), "orbit");
  Orbit o{x, {}};
  o.members.reserve(group.order());
  for (const auto& g : group.elements()) o.members.push_back(g.apply(x));
  return o;
}

GroupAxiomReport verify_group_axioms(const FiniteGroup& group) {
  const auto& el = group.elements();
  auto contains = [&](const GroupElement& g) { return std::find(el.begin(), el.end(), g) != el.end(); };

  GroupAxiomReport report;
  report.identity_ok = group.identity_index().has_value();
  report.closure_ok = true;
  for (const auto& a : el) {
    for (const auto& b : el) {
      if (!contains(a * b)) {
        report.closure_ok = false;
        break;
      }
    }
    if (!report.closure_ok) break;
  }
  report.inverses_ok = std::all_of(el.begin(), el.end(), [&](const GroupElement& g) { return contains(g.inverse()); });
  return report;
}

}  // namespace ihw
