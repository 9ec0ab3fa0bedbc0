#include <algorithm>
#include <cmath>
#include <set>
#include <unordered_set>

#include "cpsent/analysis.hpp"

namespace cpsent {

const char* to_string(WitnessStatus s) {
  switch (s) {
    case WitnessStatus::Found: return "Found";
    case WitnessStatus::NotFoundWithinRadius: return "NotFoundWithinRadius";
    case WitnessStatus::PatternSetEmpty: return "PatternSetEmpty";
  }
  return "?";
}

const char* to_string(Genericity g) {
  switch (g) {
    case Genericity::GenericAtDepth: return "GenericAtDepth";
    case Genericity::NonGeneric: return "NonGeneric";
    case Genericity::Uncertain: return "Uncertain";
  }
  return "?";
}

const char* to_string(ErgodicityVerdict v) {
  switch (v) {
    case ErgodicityVerdict::NotUniquelyErgodic: return "NotUniquelyErgodic";
    case ErgodicityVerdict::Inconclusive: return "Inconclusive";
  }
  return "?";
}

namespace {

std::vector<Real> stars_of(const std::vector<LatticePoint>& pts) {
  std::vector<Real> out;
  out.reserve(pts.size());
  for (const auto& p : pts) out.push_back(p.star);
  return out;
}

Real sup_norm(const RealVec& x) {
  Real m = 0;
  for (const auto& c : x) m = std::max(m, Real(abs(c)));
  return m;
}

// Smaller |m̄*| first, then the smaller index vector.
bool better(const Real& a_bar, const IntVec& a_v, const Real& b_bar, const IntVec& b_v) {
  const Real da = abs(a_bar);
  const Real db = abs(b_bar);
  if (da != db) return da < db;
  return a_v < b_v;
}

}  // namespace

bool verify_witness(const WindowIndex& idx, const PatternQuery& q, const LatticePoint& m, const Real& eps) {
  for (std::size_t i = 0; i < q.free.size(); ++i) {
    const Real x = q.free[i].star - m.star - q.theta;
    if (q.bits[i]) {
      if (idx.inner.classify(x, eps) != Membership::In) return false;
    } else {
      if (idx.outer.classify(x, eps) != Membership::Out) return false;
    }
  }
  return true;
}

bool verify_witness(const WindowApprox& w, const PatternQuery& q, const LatticePoint& m, const Real& eps) {
  return verify_witness(WindowIndex(w), q, m, eps);
}

std::vector<LatticePoint> witness_candidates(const CpsScheme& cps, const WindowApprox& w, const PatternQuery& q,
                                             const Real& radius, const Real& eps) {
  std::vector<LatticePoint> out;
  const IntervalSet p = pattern_set(w, q.h, stars_of(q.free), q.bits);
  if (p.empty()) return out;
  const MembershipIndex idx(p);
  const Real base = q.h - q.theta;
  for_each_lattice_point(cps, radius, base - idx.max() - eps, base - idx.min() + eps, [&](const LatticePoint& m) {
    if (idx.classify(base - m.star, eps) == Membership::In) out.push_back(m);
  });
  std::sort(out.begin(), out.end(), [&](const LatticePoint& a, const LatticePoint& b) {
    return better(base - a.star, a.v, base - b.star, b.v);
  });
  return out;
}

WitnessResult fullshift_witness(const CpsScheme& cps, const WindowApprox& w, const PatternQuery& q,
                                const Real& radius, const Real& eps) {
  WitnessResult r;
  r.radius = radius;
  const IntervalSet p = pattern_set(w, q.h, stars_of(q.free), q.bits);
  if (p.empty()) {
    r.status = WitnessStatus::PatternSetEmpty;
    return r;
  }
  const MembershipIndex idx(p);
  const WindowIndex widx(w);
  const Real base = q.h - q.theta;
  bool have = false;
  for_each_lattice_point(cps, radius, base - idx.max() - eps, base - idx.min() + eps, [&](const LatticePoint& m) {
    const Real bar = base - m.star;
    if (idx.classify(bar, eps) != Membership::In) return;
    ++r.candidates;
    if (have && !better(bar, m.v, r.mbar_star, r.m.v)) return;
    if (!verify_witness(widx, q, m, eps)) return;
    r.m = m;
    r.mbar_star = bar;
    have = true;
  });
  if (have) {
    r.status = WitnessStatus::Found;
    r.verified = true;
  }
  return r;
}

EntropyReport entropy_lower_estimate(const CpsScheme& cps, const WindowApprox& w, const Real& theta, const Real& h,
                                     const FreePointSet& s, const std::vector<Real>& ts, const Real& radius,
                                     const Rational& reference_measure) {
  EntropyReport rep;
  rep.radius = radius;
  rep.fiber = torus_reduce(cps, RealVec(static_cast<std::size_t>(cps.dim()), Real(0)), h - theta);
  if (ts.empty()) return rep;
  const Real tmax = *std::max_element(ts.begin(), ts.end());
  const std::vector<LatticePoint> free = points_in_cube(s.points, tmax);
  if (free.size() > 64) throw Error("TooManyPoints", "at most 64 free points fit in one pattern word");
  const Real det = cps.det_abs();
  const double ln2 = std::log(2.0);
  auto fill_targets = [&](EntropyRow& row) {
    row.target_nats = static_cast<double>(s.density) * ln2;
    row.reference_nats = static_cast<double>(to_real(reference_measure) / det) * ln2;
  };
  if (free.empty() || w.outer.empty()) {
    for (const auto& t : ts) {
      EntropyRow row;
      row.t = t;
      row.realized = 1;
      row.coverage = 1;
      fill_targets(row);
      rep.rows.push_back(row);
    }
    return rep;
  }
  const WindowIndex idx(w);
  const Real& eps = kMembershipEps;
  Real smin = free.front().star;
  Real smax = free.front().star;
  for (const auto& p : free) {
    smin = std::min(smin, p.star);
    smax = std::max(smax, p.star);
  }
  // m* range where some free point can meet the outer cover.
  const Real lo = smin - theta - idx.outer.max() - eps;
  const Real hi = smax - theta - idx.outer.min() + eps;

  struct Word {
    std::uint64_t known;
    std::uint64_t value;
    bool operator==(const Word& o) const { return known == o.known && value == o.value; }
  };
  struct WordHash {
    std::size_t operator()(const Word& x) const { return std::hash<std::uint64_t>()(x.known * 0x9E3779B97F4A7C15ULL ^ x.value); }
  };
  std::unordered_set<Word, WordHash> seen;
  for_each_lattice_point(cps, radius, lo, hi, [&](const LatticePoint& m) {
    ++rep.translates;
    Word word{0, 0};
    for (std::size_t i = 0; i < free.size(); ++i) {
      const Real x = free[i].star - m.star - theta;
      const std::uint64_t bit = std::uint64_t{1} << i;
      if (idx.inner.classify(x, eps) == Membership::In) {
        word.known |= bit;
        word.value |= bit;
      } else if (idx.outer.classify(x, eps) == Membership::Out) {
        word.known |= bit;
      }
    }
    seen.insert(word);
  });
  // A translate beyond the range misses the window at every free point.
  bool far_exists = false;
  for_each_lattice_point(cps, radius, hi + 1, hi + 2, [&](const LatticePoint&) { far_exists = true; });
  const std::uint64_t all = free.size() == 64 ? ~std::uint64_t{0} : ((std::uint64_t{1} << free.size()) - 1);
  if (far_exists) seen.insert(Word{all, 0});

  for (const auto& t : ts) {
    EntropyRow row;
    row.t = t;
    std::uint64_t mask = 0;
    for (std::size_t i = 0; i < free.size(); ++i) {
      if (sup_norm(free[i].direct) <= t) {
        mask |= std::uint64_t{1} << i;
        ++row.free_in_cube;
      }
    }
    std::unordered_set<std::uint64_t> patterns;
    for (const auto& word : seen) {
      if ((word.known & mask) == mask) patterns.insert(word.value & mask);
    }
    row.realized = patterns.size();
    row.coverage = static_cast<double>(row.realized) / std::ldexp(1.0, static_cast<int>(row.free_in_cube));
    const double vol = static_cast<double>(pow(2 * t, cps.dim()));
    row.lower_bound_nats = row.realized > 0 ? std::log(static_cast<double>(row.realized)) / vol : 0.0;
    row.lower_bound_bits = row.lower_bound_nats / ln2;
    fill_targets(row);
    rep.rows.push_back(row);
  }

  // Grid of every possible pattern point: stars in the outer hull shifted by h - S*.
  std::vector<LatticePoint> grid;
  for_each_lattice_point(cps, tmax, idx.outer.min() + h - smax, idx.outer.max() + h - smin,
                         [&](const LatticePoint& p) { grid.push_back(p); });
  rep.separation = std::numeric_limits<Real>::infinity();
  if (cps.dim() == 1) {
    std::sort(grid.begin(), grid.end(), [](const LatticePoint& a, const LatticePoint& b) { return a.direct < b.direct; });
    for (std::size_t i = 1; i < grid.size(); ++i) {
      rep.separation = std::min(rep.separation, Real(grid[i].direct[0] - grid[i - 1].direct[0]));
    }
  } else if (grid.size() <= 4000) {
    for (std::size_t i = 0; i < grid.size(); ++i) {
      for (std::size_t j = i + 1; j < grid.size(); ++j) {
        Real d = 0;
        for (int k = 0; k < cps.dim(); ++k) {
          d = std::max(d, Real(abs(grid[i].direct[static_cast<std::size_t>(k)] - grid[j].direct[static_cast<std::size_t>(k)])));
        }
        rep.separation = std::min(rep.separation, d);
      }
    }
  }
  return rep;
}

GenericityReport genericity_check(const CpsScheme& cps, const WindowApprox& w, const Real& h, const Real& radius,
                                  const Real& tol) {
  GenericityReport rep;
  rep.min_distance = std::numeric_limits<Real>::infinity();
  const IntervalSet boundary = w.boundary();
  if (boundary.empty()) {
    rep.verdict = Genericity::GenericAtDepth;
    return rep;
  }
  const MembershipIndex idx(boundary);
  std::optional<Real> witness_norm;
  for_each_lattice_point(cps, radius, idx.min() + h - tol, idx.max() + h + tol, [&](const LatticePoint& l) {
    ++rep.scanned;
    const Real x = l.star - h;
    rep.min_distance = std::min(rep.min_distance, idx.distance_to_boundary(x));
    const Membership m = idx.classify(x, tol);
    if (m == Membership::Uncertain) ++rep.uncertain;
    if (m != Membership::In) return;
    const Real norm = sup_norm(l.direct);
    if (!witness_norm || norm < *witness_norm || (norm == *witness_norm && l.v < rep.witness->v)) {
      witness_norm = norm;
      rep.witness = l;
    }
  });
  if (rep.witness) {
    rep.verdict = Genericity::NonGeneric;
  } else if (rep.uncertain > 0) {
    rep.verdict = Genericity::Uncertain;
  } else {
    rep.verdict = Genericity::GenericAtDepth;
  }
  return rep;
}

ErgodicityVerdict ergodicity_verdict(const Real& nu_s, const Real& nu_u, const Real& margin) {
  return nu_s > nu_u / 2 + margin ? ErgodicityVerdict::NotUniquelyErgodic : ErgodicityVerdict::Inconclusive;
}

ErgodicityReport unique_ergodicity_diagnostic(const CpsScheme& cps, const WindowApprox& w, const Real& theta,
                                              const Real& h, const FreePointSet& s, const Real& t,
                                              const Real& radius, const Real& nu_u, const Real& margin) {
  ErgodicityReport rep;
  rep.nu_s = s.density;
  rep.nu_u = nu_u;
  rep.margin = margin;
  rep.verdict = ergodicity_verdict(rep.nu_s, nu_u, margin);
  const std::vector<LatticePoint> free = points_in_cube(s.points, t);
  rep.free_in_cube = free.size();
  if (free.empty()) return rep;
  const WindowIndex idx(w);
  for (int value : {1, 0}) {
    PatternQuery q{free, std::vector<int>(free.size(), value), h, theta};
    WitnessResult r = fullshift_witness(cps, w, q, radius);
    if (r.status == WitnessStatus::Found) {
      // Points certainly present (ones) or possibly present (zeros) in the translate.
      std::size_t count = 0;
      for (const auto& p : free) {
        const Real x = p.star - r.m.star - theta;
        if (value == 1 ? idx.inner.classify(x, kMembershipEps) == Membership::In
                       : idx.outer.classify(x, kMembershipEps) != Membership::Out) {
          ++count;
        }
      }
      (value == 1 ? rep.ones_count : rep.zeros_count) = count;
    }
    (value == 1 ? rep.all_ones : rep.all_zeros) = r;
  }
  return rep;
}

SeparatedCount separated_count(const CpsScheme& cps, const WindowApprox& w, const Real& theta, const Real& r,
                               const Real& t, std::size_t samples, const Real& sample_radius) {
  SeparatedCount out;
  out.t = t;
  out.r = r;
  if (!(r > 0)) throw Error("InvalidResolution", "resolution r must be positive");
  if (t == 0 || samples == 0) {
    out.observed = 1;
    out.samples = samples;
    return out;
  }
  if (w.outer.empty()) {
    out.observed = 1;
    out.samples = samples;
    return out;
  }
  const WindowIndex idx(w);
  const Real& eps = kMembershipEps;
  const Real wlo = idx.outer.min() + theta;
  const Real whi = idx.outer.max() + theta;
  // Translates l whose star keeps the window within reach of the cube's own stars.
  std::vector<Real> offsets;
  for_each_lattice_point(cps, sample_radius, wlo - 2, whi + 2, [&](const LatticePoint& l) { offsets.push_back(l.star); });
  std::sort(offsets.begin(), offsets.end());
  std::vector<Real> chosen;
  if (offsets.size() <= samples) {
    chosen = offsets;
  } else {
    for (std::size_t i = 0; i < samples; ++i) chosen.push_back(offsets[i * offsets.size() / samples]);
  }
  out.samples = chosen.size();
  if (chosen.empty()) {
    out.observed = 1;
    return out;
  }
  // Pattern points mu in C_t; mu belongs to the translate iff mu* + l* - theta lies in W.
  std::vector<LatticePoint> mus;
  for_each_lattice_point(cps, t, wlo - chosen.back() - eps, whi - chosen.front() + eps,
                         [&](const LatticePoint& p) { mus.push_back(p); });
  std::sort(mus.begin(), mus.end(), [](const LatticePoint& a, const LatticePoint& b) { return a.star < b.star; });
  std::set<std::vector<std::int64_t>> patterns;
  for (const auto& l : chosen) {
    // Only mus whose shifted star can meet the outer cover matter.
    const Real from = wlo - l - eps;
    const Real to = whi - l + eps;
    auto first = std::lower_bound(mus.begin(), mus.end(), from, [](const LatticePoint& p, const Real& v) { return p.star < v; });
    std::vector<std::int64_t> key;
    for (auto it = first; it != mus.end() && it->star <= to; ++it) {
      const Real x = it->star + l - theta;
      const auto pos = static_cast<std::int64_t>(it - mus.begin());
      if (idx.inner.classify(x, eps) == Membership::In) {
        key.push_back(pos);
      } else if (idx.outer.classify(x, eps) != Membership::Out) {
        key.push_back(-pos - 1);  // undecided point, kept distinct from present ones
      }
    }
    patterns.insert(std::move(key));
  }
  out.observed = patterns.size();
  out.h_eps = std::log(static_cast<double>(out.observed)) / static_cast<double>(pow(2 * t, cps.dim()));
  return out;
}

}  // namespace cpsent
