#pragma once

#include <optional>
#include <vector>

#include "json.hpp"

#include "cpsent/numeric.hpp"

namespace cpsent {

struct Interval {
  Rational lo;
  Rational hi;
  bool lo_open = false;
  bool hi_open = false;

  static Interval closed(Rational a, Rational b) { return {std::move(a), std::move(b), false, false}; }
  static Interval open(Rational a, Rational b) { return {std::move(a), std::move(b), true, true}; }
  static Interval point(const Rational& x) { return {x, x, false, false}; }

  /// lo < hi, or a closed point.
  bool valid() const;
  bool contains(const Rational& x) const;
  Rational length() const { return hi - lo; }

  friend bool operator==(const Interval&, const Interval&) = default;
};

enum class Membership { In, Out, Uncertain };

const char* to_string(Membership m);

/// Finite union of pairwise disjoint, non-mergeable intervals sorted by lo.
class IntervalSet {
 public:
  IntervalSet() = default;

  /// Sorts and merges arbitrary valid intervals into canonical form.
  static IntervalSet from_intervals(std::vector<Interval> parts);
  /// Trusts that `parts` is already canonical (used by builders that emit sorted output).
  static IntervalSet from_canonical(std::vector<Interval> parts);
  static IntervalSet single(Interval iv) { return from_intervals({std::move(iv)}); }

  const std::vector<Interval>& intervals() const { return parts_; }
  bool empty() const { return parts_.empty(); }
  std::size_t size() const { return parts_.size(); }

  Rational measure() const;
  bool contains(const Rational& x) const;
  std::optional<Interval> hull() const;
  IntervalSet translated(const Rational& shift) const;
  /// Only the parts meeting [lo, hi]; a cheap prefilter before boolean operations.
  IntervalSet window(const Rational& lo, const Rational& hi) const;
  /// Open intervals of positive length contained in the set, i.e. its interior.
  IntervalSet interior() const;
  IntervalSet closure() const;

  /// Checks canonical form: valid, sorted, disjoint and not mergeable.
  bool is_canonical() const;

  friend bool operator==(const IntervalSet&, const IntervalSet&) = default;

 private:
  explicit IntervalSet(std::vector<Interval> parts) : parts_(std::move(parts)) {}
  std::vector<Interval> parts_;
};

IntervalSet set_union(const IntervalSet& a, const IntervalSet& b);
IntervalSet set_intersection(const IntervalSet& a, const IntervalSet& b);
IntervalSet set_difference(const IntervalSet& a, const IntervalSet& b);
/// Union of many sets in one sweep.
IntervalSet set_union_all(const std::vector<IntervalSet>& sets);
bool is_subset(const IntervalSet& a, const IntervalSet& b);

/// Exact classification of a rational point.
Membership membership(const Rational& x, const IntervalSet& s);

/// Float-endpoint index for fast classification of quad-precision points.
class MembershipIndex {
 public:
  MembershipIndex() = default;
  explicit MembershipIndex(const IntervalSet& s);

  /// In/Out when x is farther than eps from every endpoint; an exact hit on an endpoint is
  /// decided exactly; anything else within eps of an endpoint is Uncertain.
  Membership classify(const Real& x, const Real& eps) const;
  /// Distance from x to the nearest endpoint (infinity for the empty set).
  Real distance_to_boundary(const Real& x) const;

  bool empty() const { return lo_.empty(); }
  const Real& min() const { return lo_.front(); }
  const Real& max() const { return hi_.back(); }

 private:
  Membership classify_exact(const Real& x, const Real& eps) const;

  IntervalSet set_;
  std::vector<Real> lo_;
  std::vector<Real> hi_;
  // double copies for a quick decision far from every endpoint
  std::vector<double> lo_fast_;
  std::vector<double> hi_fast_;
};

Membership membership(const Real& x, const IntervalSet& s, const Real& eps);

void to_json(nlohmann::json& j, const Interval& iv);
void from_json(const nlohmann::json& j, Interval& iv);
void to_json(nlohmann::json& j, const IntervalSet& s);
void from_json(const nlohmann::json& j, IntervalSet& s);

}  // namespace cpsent
