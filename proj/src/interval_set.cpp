#include <cmath>
#include "cpsent/interval_set.hpp"

#include <algorithm>

#include "json.hpp"

#include "cpsent/error.hpp"

namespace cpsent {

bool Interval::valid() const {
  if (lo < hi) return true;
  return lo == hi && !lo_open && !hi_open;
}

bool Interval::contains(const Rational& x) const {
  if (x < lo || x > hi) return false;
  if (x == lo && lo_open) return false;
  if (x == hi && hi_open) return false;
  return true;
}

const char* to_string(Membership m) {
  switch (m) {
    case Membership::In: return "In";
    case Membership::Out: return "Out";
    case Membership::Uncertain: return "Uncertain";
  }
  return "?";
}

namespace {

// Two sorted intervals with a.lo <= b.lo overlap or touch so that their union is an interval.
bool mergeable(const Interval& a, const Interval& b) {
  if (b.lo < a.hi) return true;
  if (b.lo > a.hi) return false;
  return !(a.hi_open && b.lo_open);
}

void extend(Interval& a, const Interval& b) {
  if (b.hi > a.hi) {
    a.hi = b.hi;
    a.hi_open = b.hi_open;
  } else if (b.hi == a.hi) {
    a.hi_open = a.hi_open && b.hi_open;
  }
}

// Index of the last interval with lo <= x, or -1.
long last_starting_at_or_before(const std::vector<Interval>& parts, const Rational& x) {
  auto it = std::upper_bound(parts.begin(), parts.end(), x,
                             [](const Rational& v, const Interval& iv) { return v < iv.lo; });
  return static_cast<long>(it - parts.begin()) - 1;
}

bool contains_at(const std::vector<Interval>& parts, const Rational& x) {
  const long i = last_starting_at_or_before(parts, x);
  if (i < 0) return false;
  if (parts[static_cast<std::size_t>(i)].contains(x)) return true;
  // A point equal to an open lo may still sit on a closed hi of the previous part only if the
  // two were mergeable, which canonical form rules out.
  return false;
}

// Linear sweep over the merged endpoint sequence; each set keeps a cursor at its first part
// whose hi is not left of the current cut.
template <class Pred>
IntervalSet combine(const std::vector<const IntervalSet*>& sets, Pred pred) {
  std::vector<const Rational*> cuts;
  std::size_t total = 0;
  for (const auto* s : sets) total += 2 * s->size();
  cuts.reserve(total);
  auto less = [](const Rational* a, const Rational* b) { return *a < *b; };
  for (const auto* s : sets) {
    const auto mid = static_cast<std::ptrdiff_t>(cuts.size());
    for (const auto& iv : s->intervals()) {
      cuts.push_back(&iv.lo);
      cuts.push_back(&iv.hi);
    }
    std::inplace_merge(cuts.begin(), cuts.begin() + mid, cuts.end(), less);
  }
  cuts.erase(std::unique(cuts.begin(), cuts.end(), [](const Rational* a, const Rational* b) { return *a == *b; }),
             cuts.end());

  const std::size_t k = sets.size();
  std::vector<std::size_t> cursor(k, 0);
  std::vector<char> at_flags(k);
  std::vector<char> after_flags(k);

  std::vector<Interval> out;
  bool inside = false;
  Interval current;
  for (const Rational* cp : cuts) {
    const Rational& c = *cp;
    for (std::size_t s = 0; s < k; ++s) {
      const auto& parts = sets[s]->intervals();
      std::size_t& i = cursor[s];
      while (i < parts.size() && parts[i].hi < c) ++i;
      at_flags[s] = i < parts.size() && parts[i].contains(c);
      std::size_t j = i;
      if (j < parts.size() && parts[j].hi == c) ++j;
      after_flags[s] = j < parts.size() && parts[j].lo <= c && c < parts[j].hi;
    }
    const bool at = pred(at_flags);
    const bool after = pred(after_flags);
    if (!inside && at) {
      current.lo = c;
      current.lo_open = false;
      inside = true;
    }
    if (inside && !at) {
      current.hi = c;
      current.hi_open = true;
      out.push_back(current);
      inside = false;
    }
    if (inside && !after) {
      current.hi = c;
      current.hi_open = false;
      out.push_back(current);
      inside = false;
    }
    if (!inside && after) {
      current.lo = c;
      current.lo_open = true;
      inside = true;
    }
  }
  return IntervalSet::from_canonical(std::move(out));
}

}  // namespace

IntervalSet IntervalSet::from_intervals(std::vector<Interval> parts) {
  for (const auto& iv : parts) {
    if (!iv.valid()) {
      throw Error("InvalidInterval", "interval with lo > hi or an open degenerate endpoint");
    }
  }
  std::sort(parts.begin(), parts.end(), [](const Interval& a, const Interval& b) {
    if (a.lo != b.lo) return a.lo < b.lo;
    return !a.lo_open && b.lo_open;  // closed first
  });
  std::vector<Interval> out;
  out.reserve(parts.size());
  for (auto& iv : parts) {
    if (!out.empty() && mergeable(out.back(), iv)) {
      extend(out.back(), iv);
    } else {
      out.push_back(std::move(iv));
    }
  }
  return IntervalSet(std::move(out));
}

IntervalSet IntervalSet::from_canonical(std::vector<Interval> parts) { return IntervalSet(std::move(parts)); }

Rational IntervalSet::measure() const {
  Rational total = 0;
  for (const auto& iv : parts_) total += iv.hi - iv.lo;
  return total;
}

bool IntervalSet::contains(const Rational& x) const { return contains_at(parts_, x); }

std::optional<Interval> IntervalSet::hull() const {
  if (parts_.empty()) return std::nullopt;
  return Interval{parts_.front().lo, parts_.back().hi, parts_.front().lo_open, parts_.back().hi_open};
}

IntervalSet IntervalSet::translated(const Rational& shift) const {
  std::vector<Interval> out = parts_;
  for (auto& iv : out) {
    iv.lo += shift;
    iv.hi += shift;
  }
  return IntervalSet(std::move(out));
}

IntervalSet IntervalSet::window(const Rational& lo, const Rational& hi) const {
  auto first = std::lower_bound(parts_.begin(), parts_.end(), lo,
                                [](const Interval& iv, const Rational& v) { return iv.hi < v; });
  auto last = std::upper_bound(parts_.begin(), parts_.end(), hi,
                               [](const Rational& v, const Interval& iv) { return v < iv.lo; });
  if (first >= last) return {};
  return IntervalSet(std::vector<Interval>(first, last));
}

IntervalSet IntervalSet::interior() const {
  std::vector<Interval> out;
  for (const auto& iv : parts_) {
    if (iv.lo < iv.hi) out.push_back(Interval::open(iv.lo, iv.hi));
  }
  return IntervalSet(std::move(out));
}

IntervalSet IntervalSet::closure() const {
  std::vector<Interval> out;
  for (const auto& iv : parts_) out.push_back(Interval::closed(iv.lo, iv.hi));
  return from_intervals(std::move(out));
}

bool IntervalSet::is_canonical() const {
  for (std::size_t i = 0; i < parts_.size(); ++i) {
    if (!parts_[i].valid()) return false;
    if (i > 0) {
      const auto& a = parts_[i - 1];
      const auto& b = parts_[i];
      if (b.lo < a.hi) return false;
      if (b.lo == a.hi && !(a.hi_open && b.lo_open)) return false;
    }
  }
  return true;
}

IntervalSet set_union(const IntervalSet& a, const IntervalSet& b) {
  return combine({&a, &b}, [](const std::vector<char>& f) { return f[0] || f[1]; });
}

IntervalSet set_intersection(const IntervalSet& a, const IntervalSet& b) {
  return combine({&a, &b}, [](const std::vector<char>& f) { return f[0] && f[1]; });
}

IntervalSet set_difference(const IntervalSet& a, const IntervalSet& b) {
  return combine({&a, &b}, [](const std::vector<char>& f) { return f[0] && !f[1]; });
}

IntervalSet set_union_all(const std::vector<IntervalSet>& sets) {
  std::vector<const IntervalSet*> ptrs;
  for (const auto& s : sets) ptrs.push_back(&s);
  if (ptrs.empty()) return {};
  return combine(ptrs, [](const std::vector<char>& f) {
    return std::any_of(f.begin(), f.end(), [](char c) { return c != 0; });
  });
}

bool is_subset(const IntervalSet& a, const IntervalSet& b) { return set_difference(a, b).empty(); }

Membership membership(const Rational& x, const IntervalSet& s) {
  return s.contains(x) ? Membership::In : Membership::Out;
}

MembershipIndex::MembershipIndex(const IntervalSet& s) : set_(s) {
  lo_.reserve(s.size());
  hi_.reserve(s.size());
  for (const auto& iv : s.intervals()) {
    lo_.push_back(to_real(iv.lo));
    hi_.push_back(to_real(iv.hi));
    lo_fast_.push_back(static_cast<double>(lo_.back()));
    hi_fast_.push_back(static_cast<double>(hi_.back()));
  }
}

Membership MembershipIndex::classify(const Real& x, const Real& eps) const {
  if (lo_.empty()) return Membership::Out;
  const double xd = static_cast<double>(x);
  // Rounding to double moves values by far less than this margin.
  const double margin = static_cast<double>(eps) + 1e-12 * (1.0 + std::abs(xd));
  auto it = std::lower_bound(hi_fast_.begin(), hi_fast_.end(), xd);
  const std::size_t k = static_cast<std::size_t>(it - hi_fast_.begin());
  bool clear = true;
  if (k < hi_fast_.size()) clear = clear && hi_fast_[k] - xd > margin && std::abs(lo_fast_[k] - xd) > margin;
  if (k > 0) clear = clear && xd - hi_fast_[k - 1] > margin;
  if (!clear) return classify_exact(x, eps);
  return k < lo_fast_.size() && lo_fast_[k] < xd ? Membership::In : Membership::Out;
}

Membership MembershipIndex::classify_exact(const Real& x, const Real& eps) const {
  // First part whose hi reaches x - eps.
  const Real left = x - eps;
  const Real right = x + eps;
  auto it = std::lower_bound(hi_.begin(), hi_.end(), left);
  std::size_t i = static_cast<std::size_t>(it - hi_.begin());
  bool near = false;
  bool only_exact = true;
  std::optional<Rational> exact_x;
  auto touch = [&](const Real& endpoint, const Rational& exact) {
    if (abs(x - endpoint) > eps) return;
    near = true;
    if (x != endpoint) {
      only_exact = false;
      return;
    }
    if (!exact_x) exact_x = to_rational(x);
    if (*exact_x != exact) only_exact = false;
  };
  bool inside = false;
  for (std::size_t k = i; k < lo_.size() && lo_[k] <= right; ++k) {
    touch(lo_[k], set_.intervals()[k].lo);
    touch(hi_[k], set_.intervals()[k].hi);
    if (lo_[k] < x && x < hi_[k]) inside = true;
  }
  if (near) {
    if (!only_exact) return Membership::Uncertain;
    return set_.contains(*exact_x) ? Membership::In : Membership::Out;
  }
  return inside ? Membership::In : Membership::Out;
}

Real MembershipIndex::distance_to_boundary(const Real& x) const {
  if (lo_.empty()) return std::numeric_limits<Real>::infinity();
  auto it = std::lower_bound(hi_.begin(), hi_.end(), x);
  std::size_t i = static_cast<std::size_t>(it - hi_.begin());
  Real best = std::numeric_limits<Real>::infinity();
  for (std::size_t k = (i > 0 ? i - 1 : 0); k < std::min(lo_.size(), i + 2); ++k) {
    best = std::min(best, Real(abs(x - lo_[k])));
    best = std::min(best, Real(abs(x - hi_[k])));
  }
  return best;
}

Membership membership(const Real& x, const IntervalSet& s, const Real& eps) {
  return MembershipIndex(s).classify(x, eps);
}

void to_json(nlohmann::json& j, const Interval& iv) {
  j = nlohmann::json{{"lo", format_rational(iv.lo)},
                     {"hi", format_rational(iv.hi)},
                     {"loOpen", iv.lo_open},
                     {"hiOpen", iv.hi_open}};
}

void from_json(const nlohmann::json& j, Interval& iv) {
  iv.lo = parse_rational(j.at("lo").get<std::string>());
  iv.hi = parse_rational(j.at("hi").get<std::string>());
  iv.lo_open = j.value("loOpen", false);
  iv.hi_open = j.value("hiOpen", false);
}

void to_json(nlohmann::json& j, const IntervalSet& s) {
  j = nlohmann::json::array();
  for (const auto& iv : s.intervals()) j.push_back(iv);
}

void from_json(const nlohmann::json& j, IntervalSet& s) {
  if (!j.is_array()) throw Error("Schema", "interval set must be a JSON array");
  std::vector<Interval> parts;
  for (const auto& e : j) parts.push_back(e.get<Interval>());
  s = IntervalSet::from_intervals(std::move(parts));
}

}  // namespace cpsent
