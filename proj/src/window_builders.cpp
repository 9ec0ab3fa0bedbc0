#include "cpsent/window_builders.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>

#include "cpsent/error.hpp"

namespace cpsent {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t root, std::string_view component) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : component) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return splitmix64(root ^ h);
}

bool bernoulli_bit(std::uint64_t seed, std::uint64_t index, const Rational& p) {
  if (p < 0 || p > 1) throw Error("InvalidProbability", "p must lie in [0, 1]");
  const BigInt num = numerator(p);
  const BigInt den = denominator(p);
  const BigInt limit = BigInt(1) << 64;
  if (num >= limit || den >= limit) throw Error("InvalidProbability", "p needs a 64-bit numerator and denominator");
  const std::uint64_t u = splitmix64(splitmix64(seed) ^ (index * 0xD1B54A32D192ED03ULL));
  using u128 = unsigned __int128;
  const u128 lhs = static_cast<u128>(u) * static_cast<std::uint64_t>(den);
  const u128 rhs = static_cast<u128>(static_cast<std::uint64_t>(num)) << 64;
  return lhs < rhs;
}

GapSelection GapSelection::bernoulli(std::uint64_t seed, const Rational& p) {
  if (p < 0 || p > 1) throw Error("InvalidProbability", "p must lie in [0, 1]");
  GapSelection s;
  s.mode = Mode::Bernoulli;
  s.seed = seed;
  s.p = p;
  s.label = "bernoulli(seed=" + std::to_string(seed) + ",p=" + format_rational(p) + ")";
  return s;
}

GapSelection GapSelection::explicit_rule(std::string label, std::function<bool(const Gap&)> rule) {
  GapSelection s;
  s.mode = Mode::Explicit;
  s.rule = std::move(rule);
  s.label = std::move(label);
  return s;
}

GapSelection GapSelection::explicit_bits(const std::string& bits) {
  for (char c : bits) {
    if (c != '0' && c != '1') throw Error("Schema", "explicit selection bits must be 0/1");
  }
  return explicit_rule("explicit(" + bits + ")", [bits](const Gap& g) {
    const auto i = g.index();
    if (i > bits.size()) {
      throw Error("ExplicitSelectionTooShort",
                  "explicit selection has " + std::to_string(bits.size()) + " bits but gap " + std::to_string(i) +
                      " was requested");
    }
    return bits[i - 1] == '1';
  });
}

GapSelection GapSelection::all(bool value) {
  return explicit_rule(value ? "all-ones" : "all-zeros", [value](const Gap&) { return value; });
}

GapSelection GapSelection::even_stages() {
  return explicit_rule("even-stages", [](const Gap& g) { return g.stage % 2 == 0; });
}

bool GapSelection::selected(const Gap& g) const {
  if (mode == Mode::Bernoulli) return bernoulli_bit(seed, g.index(), p);
  return rule(g);
}

WindowApprox cantor_approx(const CantorScheme& scheme, int depth) {
  if (depth < 0) throw Error("InvalidDepth", "depth must be non-negative");
  std::vector<Interval> pieces = pieces_in(scheme, Rational(0), Rational(1), depth);
  auto w = WindowApprox::make({}, IntervalSet::from_canonical(std::move(pieces)), depth,
                              "cantor(" + scheme.label() + ",depth=" + std::to_string(depth) + ")");
  return w;
}

WindowApprox random_window(const CantorScheme& scheme, const GapSelection& sel, int depth) {
  if (depth < 1) throw Error("InvalidDepth", "random windows need depth >= 1");
  const std::vector<Gap> gaps = gaps_through(scheme, depth);
  std::vector<Interval> inner;
  std::vector<Interval> outer;
  Rational cursor = 0;
  for (const auto& g : gaps) {
    if (sel.selected(g)) {
      inner.push_back(g.interval());
    } else {
      outer.push_back(Interval::closed(cursor, g.lo));
      cursor = g.hi;
    }
  }
  outer.push_back(Interval::closed(cursor, 1));
  return WindowApprox::make(IntervalSet::from_canonical(std::move(inner)), IntervalSet::from_canonical(std::move(outer)),
                            depth,
                            "random(" + scheme.label() + "," + sel.label + ",depth=" + std::to_string(depth) + ")");
}

PropernessReport properness_report(const CantorScheme& scheme, const GapSelection& sel, int depth) {
  PropernessReport r;
  r.depth = depth;
  if (depth < 3) throw Error("InvalidDepth", "properness needs depth >= 3");
  const std::vector<Gap> gaps = gaps_through(scheme, depth);
  std::vector<char> chosen;
  chosen.reserve(gaps.size());
  for (const auto& g : gaps) chosen.push_back(sel.selected(g) ? 1 : 0);
  r.radius = 3 * scheme.piece_length(depth - 2);
  const double p = sel.mode == GapSelection::Mode::Bernoulli ? static_cast<double>(sel.p) : 0.5;
  r.min_nearby = gaps.size();
  double nearby_total = 0;
  for (std::size_t owner = 0; owner < gaps.size(); ++owner) {
    if (gaps[owner].stage > depth - 2) continue;
    for (const Rational* x : {&gaps[owner].lo, &gaps[owner].hi}) {
      const Rational left = *x - r.radius;
      const Rational right = *x + r.radius;
      auto it = std::lower_bound(gaps.begin(), gaps.end(), left, [](const Gap& g, const Rational& v) { return g.hi < v; });
      bool has_in = false;
      bool has_out = false;
      std::size_t nearby = 0;
      for (; it != gaps.end() && it->lo <= right; ++it) {
        const auto idx = static_cast<std::size_t>(it - gaps.begin());
        if (idx == owner) continue;
        ++nearby;
        (chosen[idx] ? has_in : has_out) = true;
      }
      ++r.endpoints;
      if (has_in && has_out) ++r.passing;
      r.min_nearby = std::min(r.min_nearby, nearby);
      nearby_total += static_cast<double>(nearby);
      r.failure_bound += std::pow(p, static_cast<double>(nearby)) + std::pow(1 - p, static_cast<double>(nearby));
    }
  }
  if (r.endpoints == 0) r.min_nearby = 0;
  r.fraction = r.endpoints ? static_cast<double>(r.passing) / static_cast<double>(r.endpoints) : 1.0;
  r.mean_nearby = r.endpoints ? nearby_total / static_cast<double>(r.endpoints) : 0.0;
  r.proper = r.passing == r.endpoints;
  return r;
}

namespace {

Rational mod1(const Rational& x) {
  BigInt q = numerator(x) / denominator(x);
  if (x < 0 && Rational(q) != x) q -= 1;
  return x - Rational(q);
}

bool arcs_disjoint(const Rational& a, const Rational& x, const Rational& b, const Rational& y) {
  return mod1(b - a) >= x && mod1(a - b) >= y;
}

// Minimal kappa > prev with (2kappa+1)^N >= (4t+1)^N * t(t+1) * 3 * 5^N.
std::int64_t next_kappa(int n, std::int64_t t, std::int64_t prev) {
  const BigInt target = pow(BigInt(4 * t + 1), static_cast<unsigned>(n)) * BigInt(t) * BigInt(t + 1) * 3 *
                        pow(BigInt(5), static_cast<unsigned>(n));
  auto side = static_cast<std::int64_t>(std::floor(std::pow(static_cast<double>(target), 1.0 / n)));
  side = std::max<std::int64_t>(side - 2, 1);
  while (pow(BigInt(side), static_cast<unsigned>(n)) < target) ++side;
  std::int64_t kappa = (side - 1 + 1) / 2;  // 2kappa+1 >= side
  while (2 * kappa + 1 < side) ++kappa;
  return std::max(kappa, prev + 1);
}

// Running minimum of dist(star(u), Z) over 0 < |u|_inf <= radius, grown shell by shell.
class NearestReturn {
 public:
  NearestReturn(const CpsScheme& s, std::uint64_t budget) : s_(s), budget_(budget) {}

  Real upto(std::int64_t radius) {
    const int n = s_.dim();
    while (reached_ < radius) {
      const std::int64_t r = ++reached_;
      if (n == 1) {
        best_ = std::min(best_, dist_to_int(s_.entry(1, 0) * Real(r)));
        count(1);
        continue;
      }
      // Shell |u|_inf = r: the first coordinate reaching r decides the split.
      for (int pivot = 0; pivot < n; ++pivot) {
        for (std::int64_t sign : {-1, 1}) {
          IntVec u(static_cast<std::size_t>(n), 0);
          u[static_cast<std::size_t>(pivot)] = sign * r;
          visit_rest(u, 0, pivot, r);
        }
      }
    }
    return best_;
  }

 private:
  void count(std::uint64_t k) {
    steps_ += k;
    if (steps_ > budget_) {
      throw Error("BudgetExceeded", "nearest-return search exceeded its step budget", ErrorCategory::Inconclusive);
    }
  }

  void visit_rest(IntVec& u, int idx, int pivot, std::int64_t r) {
    const int n = s_.dim();
    if (idx == n) {
      Real x = 0;
      for (int j = 0; j < n; ++j) x += s_.entry(n, j) * Real(u[static_cast<std::size_t>(j)]);
      best_ = std::min(best_, dist_to_int(x));
      count(1);
      return;
    }
    if (idx == pivot) {
      visit_rest(u, idx + 1, pivot, r);
      return;
    }
    const std::int64_t lim = idx < pivot ? r - 1 : r;
    for (std::int64_t c = -lim; c <= lim; ++c) {
      u[static_cast<std::size_t>(idx)] = c;
      visit_rest(u, idx + 1, pivot, r);
    }
  }

  const CpsScheme& s_;
  std::uint64_t budget_;
  std::uint64_t steps_ = 0;
  std::int64_t reached_ = 0;
  Real best_ = 1;
};

}  // namespace

DeterministicBase deterministic_base(const CpsScheme& cps, int count, const BaseOptions& opts) {
  if (count < 0) throw Error("InvalidCount", "number of intervals must be non-negative");
  DeterministicBase base;
  if (count == 0) return base;
  const int n = cps.dim();
  base.kappa.push_back(0);
  auto kappa_of = [&](long t) {
    while (static_cast<long>(base.kappa.size()) <= std::max<long>(t, 1)) {
      const auto tt = static_cast<std::int64_t>(base.kappa.size());
      base.kappa.push_back(next_kappa(n, tt, tt == 1 ? 0 : base.kappa.back()));
      if (tt == 1) base.kappa[0] = base.kappa[1];
    }
    return base.kappa[static_cast<std::size_t>(t)];
  };
  NearestReturn nearest(cps, opts.max_eta_steps);
  std::map<long, Real> eta_by_norm;
  auto eta_of = [&](long norm) {
    auto it = eta_by_norm.find(norm);
    if (it != eta_by_norm.end()) return it->second;
    const Real eta = nearest.upto(kappa_of(norm)) / 2;
    eta_by_norm.emplace(norm, eta);
    return eta;
  };

  std::vector<std::pair<Rational, Rational>> chosen;  // (start, length) on the circle
  bool done = false;
  enumerate_numbering(cps, [&](const NumberedStar& ns) {
    if (ns.n > opts.max_numbering) return false;
    base.numbered = ns.n;
    long norm = 0;
    for (auto x : ns.v) norm = std::max(norm, static_cast<long>(std::llabs(x)));
    const Real eta = eta_of(norm);
    const Rational start = to_rational(ns.star);
    const Rational len = to_rational(eta);
    for (const auto& [a, x] : chosen) {
      if (!arcs_disjoint(a, x, start, len)) return true;
    }
    chosen.emplace_back(start, len);
    BaseInterval bi;
    bi.k = chosen.size();
    bi.n = ns.n;
    bi.v = ns.v;
    bi.norm = norm;
    bi.star = ns.star;
    bi.eta = eta;
    bi.lo = start;
    bi.hi = start + len;
    bi.ratio = static_cast<double>(bi.k) / static_cast<double>(bi.n);
    base.intervals.push_back(std::move(bi));
    done = static_cast<int>(chosen.size()) >= count;
    return !done;
  });
  if (!done) {
    throw Error("BudgetExceeded",
                "found " + std::to_string(chosen.size()) + " of " + std::to_string(count) +
                    " disjoint intervals within " + std::to_string(opts.max_numbering) + " numbered points",
                ErrorCategory::Inconclusive);
  }
  return base;
}

std::uint64_t partition_class(std::uint64_t slot) {
  if (slot == 0) throw Error("InvalidSlot", "marker slots start at 1");
  while (slot % 2 == 0) slot /= 2;
  return (slot + 1) / 2;
}

namespace {

class PairTable {
 public:
  const PatternPair& at(std::size_t index) {
    std::lock_guard<std::mutex> lock(mu_);
    while (pairs_.size() < index) grow();
    return pairs_[index - 1];
  }

  std::size_t find(const PatternPair& p) {
    int top = 0;
    for (int x : p.ones) top = std::max(top, x);
    for (int x : p.zeros) top = std::max(top, x);
    if (top > 12) throw Error("PairTooLarge", "pattern pairs are enumerated up to element 12");
    std::lock_guard<std::mutex> lock(mu_);
    while (max_ < top) grow();
    for (std::size_t i = 0; i < pairs_.size(); ++i) {
      if (pairs_[i] == p) return i + 1;
    }
    throw Error("InvalidPair", "pair sets must be disjoint and sorted");
  }

 private:
  void grow() {
    if (pairs_.empty()) {
      pairs_.push_back({});
      return;
    }
    const int m = ++max_;
    if (m > 12) throw Error("PairTooLarge", "pattern pairs are enumerated up to element 12");
    // Every assignment of 1..m-1 to {neither, M, N}, with m itself in M or N.
    std::vector<PatternPair> group;
    std::size_t combos = 1;
    for (int i = 1; i < m; ++i) combos *= 3;
    for (int last = 1; last <= 2; ++last) {
      for (std::size_t code = 0; code < combos; ++code) {
        PatternPair p;
        std::size_t c = code;
        for (int e = 1; e < m; ++e, c /= 3) {
          if (c % 3 == 1) p.ones.push_back(e);
          if (c % 3 == 2) p.zeros.push_back(e);
        }
        (last == 1 ? p.ones : p.zeros).push_back(m);
        group.push_back(std::move(p));
      }
    }
    std::sort(group.begin(), group.end(), [](const PatternPair& a, const PatternPair& b) {
      const auto sa = a.ones.size() + a.zeros.size();
      const auto sb = b.ones.size() + b.zeros.size();
      if (sa != sb) return sa < sb;
      if (a.ones != b.ones) return a.ones < b.ones;
      return a.zeros < b.zeros;
    });
    pairs_.insert(pairs_.end(), group.begin(), group.end());
  }

  std::mutex mu_;
  std::vector<PatternPair> pairs_;
  int max_ = 0;
};

PairTable& pair_table() {
  static PairTable table;
  return table;
}

int marker_prefix(int stage) { return (stage + 1) / 2; }

bool is_marker_stage(int stage) { return stage >= 2 && (stage % 4 == 2 || stage % 4 == 3); }

std::uint64_t markers_at(int stage) {
  return is_marker_stage(stage) ? (std::uint64_t{1} << (stage - 1 - marker_prefix(stage))) : 0;
}

std::uint64_t markers_before(int stage) {
  std::uint64_t total = 0;
  for (int m = 2; m < stage; ++m) total += markers_at(m);
  return total;
}

}  // namespace

PatternPair pattern_pair(std::size_t index) {
  if (index == 0) throw Error("InvalidPair", "pair enumeration is 1-based");
  return pair_table().at(index);
}

std::size_t pattern_pair_index(const PatternPair& pair) { return pair_table().find(pair); }

GapClass classify_gap(int stage, std::uint64_t position) {
  if (stage % 4 == 0) return {GapRole::Core, 0};
  if (is_marker_stage(stage) && position < markers_at(stage)) {
    return {GapRole::Marker, markers_before(stage) + position + 1};
  }
  return {GapRole::Excluded, 0};
}

std::pair<int, std::uint64_t> marker_gap(std::uint64_t slot) {
  if (slot == 0) throw Error("InvalidSlot", "marker slots start at 1");
  std::uint64_t before = 0;
  for (int m = 2; m < 62; ++m) {
    const std::uint64_t here = markers_at(m);
    if (slot <= before + here) return {m, slot - before - 1};
    before += here;
  }
  throw Error("InvalidSlot", "marker slot out of range");
}

bool slot_in_family(int j, std::uint64_t slot) {
  const PatternPair& p = pair_table().at(partition_class(slot));
  return std::find(p.ones.begin(), p.ones.end(), j) != p.ones.end();
}

bool family_contains(int j, int stage, std::uint64_t position) {
  const GapClass c = classify_gap(stage, position);
  if (c.role == GapRole::Core) return true;
  if (c.role == GapRole::Marker) return slot_in_family(j, c.slot);
  return false;
}

IntervalSet independent_open_family(int j, int depth) {
  if (j < 1) throw Error("InvalidIndex", "family members are numbered from 1");
  std::vector<Interval> parts;
  for (const auto& g : gaps_through(CantorScheme::middle_third(), depth)) {
    if (family_contains(j, g.stage, g.position)) parts.push_back(g.interval());
  }
  return IntervalSet::from_canonical(std::move(parts));
}

int triadic_scale(const Rational& eps) {
  if (eps <= 0) throw Error("InvalidScale", "interval length must be positive");
  int p = 0;
  Rational scale = 1;
  while (scale > eps) {
    scale /= 3;
    ++p;
  }
  return p;
}

namespace {

IntervalSet complement_in_unit(const std::vector<Interval>& removed_sorted) {
  std::vector<Interval> out;
  Rational cursor = 0;
  bool cursor_open = false;
  for (const auto& r : removed_sorted) {
    if (cursor < r.lo || (cursor == r.lo && !cursor_open && !r.lo_open)) {
      // [cursor, r.lo] keeps r.lo when the removed part is open there.
      Interval keep{cursor, r.lo, cursor_open, !r.lo_open};
      if (keep.valid()) out.push_back(keep);
    }
    cursor = r.hi;
    cursor_open = !r.hi_open;
  }
  Interval tail{cursor, Rational(1), cursor_open, false};
  if (tail.valid()) out.push_back(tail);
  return IntervalSet::from_intervals(std::move(out));
}

template <class OnGap>
void walk_interval_gaps(const BaseInterval& bi, int depth, OnGap&& on_gap) {
  const Rational eps = bi.eps();
  const int cap = triadic_scale(eps) + depth;
  for_each_gap_in(CantorScheme::middle_third(), Rational(0), eps, cap, [&](const Gap& g) {
    const bool clipped = g.hi > eps;
    Interval part{bi.lo + g.lo, bi.lo + (clipped ? eps : g.hi), true, true};
    on_gap(g, part, clipped);
  });
}

}  // namespace

WindowApprox deterministic_window(const DeterministicBase& base, int depth) {
  if (depth < 0) throw Error("InvalidDepth", "depth must be non-negative");
  std::vector<BaseInterval> sorted = base.intervals;
  std::sort(sorted.begin(), sorted.end(), [](const BaseInterval& a, const BaseInterval& b) { return a.lo < b.lo; });
  std::vector<Interval> inner;
  std::vector<Interval> removed;
  for (const auto& bi : sorted) {
    const int j = static_cast<int>(bi.k);
    walk_interval_gaps(bi, depth, [&](const Gap& g, const Interval& part, bool) {
      (family_contains(j, g.stage, g.position) ? inner : removed).push_back(part);
    });
  }
  return WindowApprox::make(IntervalSet::from_intervals(std::move(inner)), complement_in_unit(removed), depth,
                            "deterministic(K=" + std::to_string(base.intervals.size()) +
                                ",depth=" + std::to_string(depth) + ")");
}

WindowApprox deterministic_window(const CpsScheme& cps, int count, int depth) {
  return deterministic_window(deterministic_base(cps, count), depth);
}

WindowApprox weak_window(const DeterministicBase& base, int depth, const CantorScheme& m) {
  if (depth < 0) throw Error("InvalidDepth", "depth must be non-negative");
  if (m.limit_measure() <= 0) throw Error("InvalidScheme", "the inserted Cantor set needs positive measure");
  std::vector<BaseInterval> sorted = base.intervals;
  std::sort(sorted.begin(), sorted.end(), [](const BaseInterval& a, const BaseInterval& b) { return a.lo < b.lo; });
  std::vector<Interval> removed;
  std::vector<FatCopy> copies;
  for (const auto& bi : sorted) {
    const int j = static_cast<int>(bi.k);
    walk_interval_gaps(bi, depth, [&](const Gap& g, const Interval& part, bool clipped) {
      const GapClass c = classify_gap(g.stage, g.position);
      if (c.role == GapRole::Marker && slot_in_family(j, c.slot)) {
        copies.push_back(FatCopy{part.lo, g.hi - g.lo, Interval{part.lo, part.hi, false, clipped}, m});
      } else {
        removed.push_back(part);
      }
    });
  }
  auto w = WindowApprox::make({}, complement_in_unit(removed), depth,
                              "weak(K=" + std::to_string(base.intervals.size()) + ",depth=" + std::to_string(depth) +
                                  "," + m.label() + ")");
  w.copies = std::move(copies);
  if (base.intervals.empty()) w.warnings.push_back("no intervals: the window is [0,1], which is not a weak window");
  return w;
}

WindowApprox weak_window(const CpsScheme& cps, int count, int depth, const CantorScheme& m) {
  return weak_window(deterministic_base(cps, count), depth, m);
}

}  // namespace cpsent
