#include "doctest.h"

#include <fstream>
#include <set>

#include "cpsent/window_builders.hpp"

using namespace cpsent;

namespace {

Rational q(long a, long b = 1) { return Rational(a, b); }

const CpsScheme& fixture() {
  static const CpsScheme s = make_cps({{"1", "tau"}, {"sqrt2m1", "1"}}, 1);
  return s;
}

}  // namespace

TEST_CASE("middle third gaps") {
  auto mt = CantorScheme::middle_third();
  CHECK(gap_interval(mt, GapAddress::parse("0")) == Interval::open(q(1, 3), q(2, 3)));
  CHECK(gap_interval(mt, GapAddress::parse("00")) == Interval::open(q(1, 9), q(2, 9)));
  CHECK(gap_interval(mt, GapAddress::parse("10")) == Interval::open(q(7, 9), q(8, 9)));
  CHECK(gap_interval(mt, GapAddress::parse("110")) == Interval::open(q(25, 27), q(26, 27)));
  CHECK_THROWS_AS(gap_interval(mt, GapAddress::parse("01")), Error);
  CHECK_THROWS_AS(GapAddress::parse(""), Error);
  CHECK_THROWS_AS(GapAddress::parse("0a"), Error);
}

TEST_CASE("gap addresses round trip through index") {
  for (const auto& g : gaps_through(CantorScheme::middle_third(), 6)) {
    CHECK(gap_interval(CantorScheme::middle_third(), g.address()) == g.interval());
    CHECK(g.address().position() == g.position);
    CHECK(g.address().stage() == g.stage);
  }
}

TEST_CASE("fat cantor geometry") {
  auto fat = CantorScheme::fat();
  CHECK(gap_interval(fat, GapAddress::parse("0")) == Interval::open(q(3, 8), q(5, 8)));
  CHECK(fat.gap_length(2) == q(1, 16));
  CHECK(fat.piece_length(1) == q(3, 8));
  CHECK(fat.outer_measure(2) == q(5, 8));
  CHECK(cantor_approx(fat, 2).outer.measure() == q(5, 8));
  CHECK(fat.limit_measure() == q(1, 2));
  CHECK(CantorScheme::fat(q(4, 5)).limit_measure() == q(3, 5));
  CHECK_THROWS_AS(CantorScheme::fat(q(3, 2)), Error);
  CHECK_THROWS_AS(CantorScheme::fat(0), Error);
}

TEST_CASE("cantor approximations") {
  auto mt = CantorScheme::middle_third();
  auto d0 = cantor_approx(mt, 0);
  CHECK(d0.outer == IntervalSet::single(Interval::closed(0, 1)));
  CHECK(d0.inner.empty());
  CHECK(cantor_approx(mt, 2).meas_outer == q(4, 9));
  CHECK(cantor_approx(mt, 5).outer.size() == 32);
}

TEST_CASE("gaps are disjoint and exhaust the removed measure") {
  for (const auto& scheme : {CantorScheme::middle_third(), CantorScheme::fat(), CantorScheme::fat(q(2, 3))}) {
    const int d = 7;
    auto gaps = gaps_through(scheme, d);
    Rational total = 0;
    std::vector<Interval> parts;
    for (const auto& g : gaps) {
      total += g.hi - g.lo;
      parts.push_back(g.interval());
    }
    auto merged = IntervalSet::from_intervals(parts);
    CHECK(merged.size() == gaps.size());
    CHECK(1 - cantor_approx(scheme, d).meas_outer == total);
  }
}

TEST_CASE("gap visiting stays inside the range") {
  auto mt = CantorScheme::middle_third();
  std::vector<Gap> seen;
  for_each_gap_in(mt, q(0), q(1, 9), 4, [&](const Gap& g) { seen.push_back(g); });
  for (const auto& g : seen) CHECK(g.lo < q(1, 9));
  REQUIRE_FALSE(seen.empty());
  for (std::size_t i = 1; i < seen.size(); ++i) CHECK(seen[i - 1].hi <= seen[i].lo);
  auto pieces = pieces_in(mt, q(0), q(1), 3);
  CHECK(pieces.size() == 8);
}

TEST_CASE("seeded bits") {
  CHECK(splitmix64(0) == 0xE220A8397B1DCDAFULL);
  CHECK(derive_seed(42, "window") != derive_seed(42, "theta"));
  CHECK(derive_seed(42, "window") == derive_seed(42, "window"));
  std::size_t ones = 0;
  for (std::uint64_t i = 1; i <= 20000; ++i) ones += bernoulli_bit(7, i, q(1, 4));
  CHECK(ones > 4700);
  CHECK(ones < 5300);
  CHECK_FALSE(bernoulli_bit(7, 3, q(0)));
  CHECK(bernoulli_bit(7, 3, q(1)));
}

TEST_CASE("random window extremes") {
  auto fat = CantorScheme::fat();
  auto none = random_window(fat, GapSelection::all(false), 6);
  CHECK(none.inner.empty());
  CHECK(none.outer == cantor_approx(fat, 6).outer);
  auto every = random_window(fat, GapSelection::all(true), 6);
  CHECK(every.outer == IntervalSet::single(Interval::closed(0, 1)));
  CHECK(every.meas_inner == 1 - fat.outer_measure(6));
  CHECK(every.consistent());
}

TEST_CASE("random window is reproducible") {
  auto fat = CantorScheme::fat();
  auto a = random_window(fat, GapSelection::bernoulli(42, q(1, 2)), 8);
  auto b = random_window(fat, GapSelection::bernoulli(42, q(1, 2)), 8);
  CHECK(a.inner == b.inner);
  CHECK(a.outer == b.outer);
  CHECK(nlohmann::json(a).dump() == nlohmann::json(b).dump());
  auto c = random_window(fat, GapSelection::bernoulli(43, q(1, 2)), 8);
  CHECK_FALSE(a.inner == c.inner);
  CHECK(a.consistent());
  CHECK(a.meas_outer - a.meas_inner == fat.outer_measure(8));
}

TEST_CASE("explicit bit strings") {
  auto fat = CantorScheme::fat();
  auto w = random_window(fat, GapSelection::explicit_bits("100"), 2);
  REQUIRE(w.inner.size() == 1);
  CHECK(w.inner.intervals()[0] == Interval::open(q(3, 8), q(5, 8)));
  CHECK_THROWS_AS(random_window(fat, GapSelection::explicit_bits("10"), 2), Error);
}

TEST_CASE("properness") {
  auto fat = CantorScheme::fat();
  CHECK_FALSE(properness_report(fat, GapSelection::all(false), 8).proper);
  for (int d = 4; d <= 8; ++d) CHECK(properness_report(fat, GapSelection::even_stages(), d).proper);
  auto r = properness_report(fat, GapSelection::bernoulli(42, q(1, 2)), 12);
  CHECK(r.proper);
  CHECK(r.fraction == 1.0);
  CHECK(r.endpoints == 2 * ((std::size_t{1} << 10) - 1));
  CHECK(r.failure_bound < 1.0);
}

TEST_CASE("deterministic base with one interval") {
  auto b = deterministic_base(fixture(), 1);
  REQUIRE(b.intervals.size() == 1);
  CHECK(b.intervals[0].lo == 0);
  CHECK(b.intervals[0].n == 1);
  CHECK(b.intervals[0].eps() > 0);
  CHECK(deterministic_base(fixture(), 0).intervals.empty());
}

TEST_CASE("deterministic base intervals are disjoint") {
  auto b = deterministic_base(fixture(), 50);
  REQUIRE(b.intervals.size() == 50);
  std::vector<Interval> parts;
  for (const auto& bi : b.intervals) {
    CHECK(bi.lo >= 0);
    CHECK(bi.hi <= 1);
    parts.push_back(Interval{bi.lo, bi.hi, false, true});
  }
  CHECK(IntervalSet::from_intervals(parts).size() == 50);
  for (std::size_t i = 1; i < b.intervals.size(); ++i) {
    CHECK(b.intervals[i - 1].n < b.intervals[i].n);
    CHECK(b.intervals[i].eps() <= b.intervals[i - 1].eps());
  }
  for (std::size_t i = 1; i < b.kappa.size(); ++i) CHECK(b.kappa[i] >= b.kappa[i - 1]);
}

TEST_CASE("pattern pair enumeration") {
  CHECK(pattern_pair(1) == PatternPair{});
  CHECK(pattern_pair(2) == PatternPair{{}, {1}});
  CHECK(pattern_pair(3) == PatternPair{{1}, {}});
  std::set<std::pair<std::vector<int>, std::vector<int>>> seen;
  for (std::size_t i = 1; i <= 500; ++i) {
    auto p = pattern_pair(i);
    CHECK(pattern_pair_index(p) == i);
    for (int x : p.ones) CHECK(std::find(p.zeros.begin(), p.zeros.end(), x) == p.zeros.end());
    seen.insert({p.ones, p.zeros});
  }
  CHECK(seen.size() == 500);
  CHECK(pattern_pair_index(PatternPair{{1}, {2}}) > 0);
}

TEST_CASE("partition classes are infinite and disjoint") {
  CHECK(partition_class(1) == 1);
  CHECK(partition_class(2) == 1);
  CHECK(partition_class(3) == 2);
  CHECK(partition_class(12) == 2);
  for (std::uint64_t c = 1; c <= 5; ++c) {
    std::size_t members = 0;
    for (std::uint64_t l = 1; l <= 4096; ++l) members += partition_class(l) == c;
    CHECK(members >= 9);
  }
}

TEST_CASE("gap roles") {
  CHECK(classify_gap(4, 5).role == GapRole::Core);
  CHECK(classify_gap(1, 0).role == GapRole::Excluded);
  CHECK(classify_gap(5, 0).role == GapRole::Excluded);
  auto m = classify_gap(2, 0);
  CHECK(m.role == GapRole::Marker);
  CHECK(m.slot == 1);
  for (std::uint64_t l = 1; l <= 200; ++l) {
    auto [stage, pos] = marker_gap(l);
    auto c = classify_gap(stage, pos);
    CHECK(c.role == GapRole::Marker);
    CHECK(c.slot == l);
  }
}

TEST_CASE("independent family contains the core") {
  auto mt = CantorScheme::middle_third();
  for (int j = 1; j <= 3; ++j) {
    auto a = independent_open_family(j, 4);
    for (const auto& g : gaps_through(mt, 4)) {
      if (g.stage == 4) CHECK(is_subset(IntervalSet::single(g.interval()), a));
      if (g.stage == 1) CHECK_FALSE(is_subset(IntervalSet::single(g.interval()), a));
    }
  }
}

TEST_CASE("members only differ on marker gaps") {
  auto a1 = independent_open_family(1, 12);
  auto a2 = independent_open_family(2, 12);
  auto diff = set_union(set_difference(a1, a2), set_difference(a2, a1));
  for (const auto& iv : diff.intervals()) {
    bool found = false;
    for (const auto& g : gaps_through(CantorScheme::middle_third(), 12)) {
      if (g.interval() == iv) {
        CHECK(classify_gap(g.stage, g.position).role == GapRole::Marker);
        found = true;
        break;
      }
    }
    CHECK(found);
  }
}

TEST_CASE("pair ({1},{2}) separates the first two members") {
  const std::size_t idx = pattern_pair_index(PatternPair{{1}, {2}});
  // the marker slots of that class lie in A_1 and not in A_2
  std::size_t hits = 0;
  for (std::uint64_t l = 1; l <= 426; ++l) {
    if (partition_class(l) != idx) continue;
    ++hits;
    CHECK(slot_in_family(1, l));
    CHECK_FALSE(slot_in_family(2, l));
    auto [stage, pos] = marker_gap(l);
    auto g = gap_interval(CantorScheme::middle_third(), [&] {
      GapAddress a;
      a.word.assign(static_cast<std::size_t>(stage), 0);
      for (int i = 0; i < stage - 1; ++i) a.word[static_cast<std::size_t>(stage - 2 - i)] = (pos >> i) & 1U;
      return a;
    }());
    auto a1 = independent_open_family(1, stage);
    auto a2 = independent_open_family(2, stage);
    CHECK(is_subset(IntervalSet::single(g), a1));
    CHECK_FALSE(is_subset(IntervalSet::single(g), a2));
  }
  CHECK(hits >= 1);
}

TEST_CASE("deterministic window") {
  auto w0 = deterministic_window(fixture(), 0, 0);
  CHECK(w0.outer == IntervalSet::single(Interval::closed(0, 1)));
  auto base = deterministic_base(fixture(), 2);
  auto w = deterministic_window(base, 8);
  CHECK(w.consistent());
  IntervalSet rest = IntervalSet::single(Interval::closed(0, 1));
  for (const auto& bi : base.intervals) {
    auto piece = IntervalSet::single(Interval{bi.lo, bi.hi, false, true});
    CHECK_FALSE(set_intersection(w.inner, piece).empty());
    rest = set_difference(rest, piece);
  }
  CHECK(set_intersection(w.inner, rest).empty());
}

TEST_CASE("deterministic window sandwich tightens with depth") {
  auto base = deterministic_base(fixture(), 20);
  Rational prev = 2;
  Rational prev_inner = -1;
  for (int d : {6, 8, 10}) {
    auto w = deterministic_window(base, d);
    const Rational gap = w.meas_outer - w.meas_inner;
    CHECK(gap > 0);
    CHECK(gap < prev);
    CHECK(w.meas_inner >= prev_inner);
    prev = gap;
    prev_inner = w.meas_inner;
  }
}

TEST_CASE("weak window") {
  auto fat = CantorScheme::fat();
  auto base = deterministic_base(fixture(), 5);
  for (int d : {4, 6, 8}) {
    auto w = weak_window(base, d, fat);
    CHECK(w.inner.empty());
    CHECK(w.consistent());
    CHECK_FALSE(w.copies.empty());
    for (const auto& c : w.copies) {
      CHECK(c.full_mass() == c.scale * q(1, 2));
      CHECK(c.full_mass() > 0);
    }
  }
  auto k0 = weak_window(fixture(), 0, 4, fat);
  CHECK(k0.outer == IntervalSet::single(Interval::closed(0, 1)));
  CHECK_FALSE(k0.warnings.empty());
  CHECK_THROWS_AS(weak_window(base, 4, CantorScheme::middle_third()), Error);
}

TEST_CASE("triadic scale") {
  CHECK(triadic_scale(q(1)) == 0);
  CHECK(triadic_scale(q(1, 3)) == 1);
  CHECK(triadic_scale(q(1, 4)) == 2);
  CHECK(triadic_scale(q(1, 9)) == 2);
}

TEST_CASE("seed 42 fat window matches the golden file") {
  // golden produced by tools/golden_random_window.py, an independent exact reimplementation
  std::ifstream f(std::string(CPSENT_GOLDEN_DIR) + "/random_seed42_fat_depth6.json");
  REQUIRE(f.good());
  const nlohmann::json golden = nlohmann::json::parse(f);
  const nlohmann::json built = random_window(CantorScheme::fat(), GapSelection::bernoulli(42, Rational(1, 2)), 6);
  CHECK(built == golden);
}
