#include <algorithm>
#include <map>

#include "cpsent/analysis.hpp"

namespace cpsent {

std::vector<int> pattern_bits(std::uint64_t code, std::size_t width) {
  std::vector<int> bits(width);
  for (std::size_t i = 0; i < width; ++i) bits[i] = static_cast<int>((code >> i) & 1U);
  return bits;
}

std::string pattern_string(const std::vector<int>& bits) {
  std::string s;
  for (int b : bits) s += static_cast<char>('0' + b);
  return s;
}

namespace {

IntervalSet slice(const IntervalSet& base, const Rational& shift, const std::optional<Interval>& clip) {
  if (!clip) return base.translated(shift);
  return base.window(clip->lo - shift, clip->hi - shift).translated(shift);
}

std::vector<Rational> translate_shifts(const Real& h, const std::vector<Real>& stars) {
  const Rational hr = to_rational(h);
  std::vector<Rational> out;
  out.reserve(stars.size());
  for (const auto& s : stars) out.push_back(hr - to_rational(s));
  return out;
}

Interval intersect(const Interval& a, const Interval& b) {
  Interval r = a;
  if (b.lo > r.lo || (b.lo == r.lo && b.lo_open)) {
    r.lo = b.lo;
    r.lo_open = b.lo_open;
  }
  if (b.hi < r.hi || (b.hi == r.hi && b.hi_open)) {
    r.hi = b.hi;
    r.hi_open = b.hi_open;
  }
  return r;
}

}  // namespace

IntervalSet pattern_set(const WindowApprox& w, const Real& h, const std::vector<Real>& stars,
                        const std::vector<int>& bits, const std::optional<Interval>& clip) {
  if (bits.size() != stars.size()) throw Error("InvalidPattern", "one bit per free point is required");
  const std::vector<Rational> shifts = translate_shifts(h, stars);
  std::optional<IntervalSet> acc;
  std::vector<IntervalSet> zeros;
  for (std::size_t i = 0; i < stars.size(); ++i) {
    if (bits[i]) {
      IntervalSet part = slice(w.inner, shifts[i], clip);
      acc = acc ? set_intersection(*acc, part) : std::move(part);
    } else {
      zeros.push_back(slice(w.outer, shifts[i], clip));
    }
  }
  if (!acc) {
    if (clip) {
      acc = IntervalSet::single(*clip);
    } else {
      Rational lo = to_rational(h) - 1;
      Rational hi = to_rational(h) + 2;
      for (std::size_t i = 0; i < stars.size(); ++i) {
        if (auto hull = w.outer.hull()) {
          lo = std::min(lo, Rational(hull->lo + shifts[i] - 1));
          hi = std::max(hi, Rational(hull->hi + shifts[i] + 1));
        }
      }
      acc = IntervalSet::single(Interval::closed(lo, hi));
    }
  } else if (clip) {
    acc = set_intersection(*acc, IntervalSet::single(*clip));
  }
  if (acc->empty() || zeros.empty()) return *acc;
  const auto hull = acc->hull();
  for (auto& z : zeros) z = z.window(hull->lo, hull->hi);
  return set_difference(*acc, set_union_all(zeros));
}

TopologicalReport topological_independence_check(const WindowApprox& w, const Real& h,
                                                 const std::vector<Real>& stars, int levels, const Rational& start) {
  if (stars.size() > 12) throw Error("TooManyPoints", "at most 12 free points are supported");
  TopologicalReport rep;
  rep.levels = levels;
  rep.start = start;
  rep.depth = w.depth;
  rep.independent = true;
  const std::uint64_t count = std::uint64_t{1} << stars.size();
  for (std::uint64_t code = 0; code < count; ++code) {
    PatternWitnesses pw;
    pw.bits = pattern_bits(code, stars.size());
    if (stars.empty()) {
      pw.complete = true;
      rep.patterns.push_back(pw);
      continue;
    }
    const IntervalSet p = pattern_set(w, h, stars, pw.bits, Interval::closed(0, start));
    Rational delta = start;
    pw.complete = true;
    for (int j = 1; j <= levels; ++j) {
      std::optional<Interval> found;
      const auto& parts = p.intervals();
      for (auto it = parts.rbegin(); it != parts.rend(); ++it) {
        const Rational lo = std::max(it->lo, Rational(0));
        const Rational hi = std::min(it->hi, delta);
        if (lo < hi) {
          found = Interval::open(lo, hi);
          break;
        }
      }
      if (!found) {
        pw.complete = false;
        pw.failed_level = j;
        break;
      }
      pw.levels.push_back(*found);
      delta = std::min(Rational(1, j + 1), found->lo);
    }
    rep.independent = rep.independent && pw.complete;
    rep.patterns.push_back(std::move(pw));
  }
  return rep;
}

MetricReport metric_independence_check(const WindowApprox& w, const Real& h, const std::vector<Real>& stars,
                                       int copy_depth) {
  if (stars.size() > 12) throw Error("TooManyPoints", "at most 12 free points are supported");
  MetricReport rep;
  rep.depth = w.depth;
  rep.independent = true;
  const std::vector<Rational> shifts = translate_shifts(h, stars);
  // Copies of every translate keyed by their placement, so shared ones can be matched exactly.
  using Key = std::pair<Rational, Rational>;
  std::vector<std::map<Key, Interval>> placed(stars.size());
  for (std::size_t i = 0; i < stars.size(); ++i) {
    for (const auto& c : w.copies) {
      const FatCopy moved = c.translated(shifts[i]);
      placed[i].emplace(Key{moved.offset, moved.scale}, moved.clip);
    }
  }
  const std::uint64_t count = std::uint64_t{1} << stars.size();
  for (std::uint64_t code = 0; code < count; ++code) {
    PatternMeasure pm;
    pm.bits = pattern_bits(code, stars.size());
    pm.inner_measure = pattern_set(w, h, stars, pm.bits).measure();
    pm.copy_bound = 0;
    std::vector<std::size_t> ones;
    std::vector<std::size_t> zeros;
    for (std::size_t i = 0; i < stars.size(); ++i) (pm.bits[i] ? ones : zeros).push_back(i);
    if (!ones.empty() && !w.copies.empty()) {
      std::vector<FatCopy> shared;
      for (const auto& [key, clip] : placed[ones.front()]) {
        Interval common = clip;
        bool everywhere = true;
        for (std::size_t k = 1; k < ones.size() && everywhere; ++k) {
          auto it = placed[ones[k]].find(key);
          if (it == placed[ones[k]].end()) {
            everywhere = false;
          } else {
            common = intersect(common, it->second);
          }
        }
        if (everywhere && common.valid() && common.lo < common.hi) {
          shared.push_back(FatCopy{key.first, key.second, common, w.copies.front().shape});
        }
      }
      if (!shared.empty()) {
        Rational lo = shared.front().clip.lo;
        Rational hi = shared.front().clip.hi;
        for (const auto& c : shared) {
          lo = std::min(lo, c.clip.lo);
          hi = std::max(hi, c.clip.hi);
        }
        std::vector<IntervalSet> avoid_parts;
        for (auto z : zeros) avoid_parts.push_back(w.outer.window(lo - shifts[z], hi - shifts[z]).translated(shifts[z]));
        const IntervalSet avoid = set_union_all(avoid_parts);
        for (const auto& c : shared) pm.copy_bound += copy_mass_outside(c, avoid, copy_depth);
      }
    }
    pm.lower_bound = std::max(pm.inner_measure, pm.copy_bound);
    pm.positive = pm.lower_bound > 0;
    rep.independent = rep.independent && pm.positive;
    rep.patterns.push_back(std::move(pm));
  }
  return rep;
}

std::vector<LatticePoint> select_free_subset(const WindowApprox& w, const Real& h,
                                             const std::vector<LatticePoint>& candidates, std::size_t size,
                                             const Real& min_measure) {
  if (size == 0 || size > 16 || candidates.size() < size) return {};
  const Rational floor = to_rational(min_measure);
  std::vector<std::size_t> pick(size);
  for (std::size_t i = 0; i < size; ++i) pick[i] = i;
  const std::size_t n = candidates.size();
  while (true) {
    std::vector<Real> stars;
    for (auto i : pick) stars.push_back(candidates[i].star);
    bool ok = true;
    for (std::uint64_t code = 0; ok && code < (std::uint64_t{1} << size); ++code)
      ok = pattern_set(w, h, stars, pattern_bits(code, size)).measure() >= floor;
    if (ok) {
      std::vector<LatticePoint> out;
      for (auto i : pick) out.push_back(candidates[i]);
      return out;
    }
    // next combination
    std::size_t k = size;
    while (k > 0 && pick[k - 1] == n - size + k - 1) --k;
    if (k == 0) return {};
    ++pick[k - 1];
    for (std::size_t j = k; j < size; ++j) pick[j] = pick[j - 1] + 1;
  }
}

}  // namespace cpsent
