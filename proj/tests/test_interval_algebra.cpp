#include "doctest.h"

#include "cpsent/cantor.hpp"
#include "cpsent/interval_set.hpp"
#include "cpsent/window_builders.hpp"

using namespace cpsent;

namespace {

Rational q(long a, long b = 1) { return Rational(a, b); }

IntervalSet set_of(std::vector<Interval> parts) { return IntervalSet::from_intervals(std::move(parts)); }

}  // namespace

TEST_CASE("union merges touching closed endpoints") {
  auto u = set_union(IntervalSet::single(Interval::closed(0, 1)), IntervalSet::single(Interval::closed(1, 2)));
  REQUIRE(u.size() == 1);
  CHECK(u.intervals()[0] == Interval::closed(0, 2));
}

TEST_CASE("touching open endpoints stay apart") {
  auto u = set_union(IntervalSet::single(Interval::open(0, 1)), IntervalSet::single(Interval::open(1, 2)));
  CHECK(u.size() == 2);
  CHECK_FALSE(u.contains(1));
  // one closed side is enough to glue them
  auto v = set_union(IntervalSet::single(Interval{0, 1, true, false}), IntervalSet::single(Interval::open(1, 2)));
  CHECK(v.size() == 1);
  CHECK(v.contains(1));
}

TEST_CASE("intersection of open intervals") {
  auto r = set_intersection(IntervalSet::single(Interval::open(0, q(1, 3))),
                            IntervalSet::single(Interval::open(q(1, 4), q(1, 2))));
  REQUIRE(r.size() == 1);
  CHECK(r.intervals()[0] == Interval::open(q(1, 4), q(1, 3)));
}

TEST_CASE("middle third removal") {
  auto r = set_difference(IntervalSet::single(Interval::closed(0, 1)),
                          IntervalSet::single(Interval::open(q(1, 3), q(2, 3))));
  REQUIRE(r.size() == 2);
  CHECK(r.intervals()[0] == Interval::closed(0, q(1, 3)));
  CHECK(r.intervals()[1] == Interval::closed(q(2, 3), 1));
  CHECK(r.measure() == q(2, 3));
}

TEST_CASE("difference leaves isolated points") {
  auto r = set_difference(IntervalSet::single(Interval::closed(0, 2)),
                          set_of({Interval::open(0, 1), Interval::open(1, 2)}));
  REQUIRE(r.size() == 3);
  CHECK(r.intervals()[1] == Interval::point(1));
  CHECK(r.measure() == 0);
}

TEST_CASE("measure") {
  CHECK(IntervalSet().measure() == 0);
  CHECK(cantor_approx(CantorScheme::middle_third(), 3).outer.measure() == q(8, 27));
  auto fat = CantorScheme::fat();
  for (int d = 0; d <= 8; ++d) {
    Rational expected = 1;
    for (int n = 1; n <= d; ++n) expected -= Rational(BigInt(1) << (n - 1), BigInt(1) << (2 * n));
    CHECK(cantor_approx(fat, d).outer.measure() == expected);
  }
}

TEST_CASE("canonical form from arbitrary input") {
  auto s = set_of({Interval::closed(3, 4), Interval::open(0, 2), Interval::closed(1, 3), Interval::point(6),
                   Interval::point(6)});
  CHECK(s.is_canonical());
  REQUIRE(s.size() == 2);
  CHECK(s.intervals()[0] == Interval{0, 4, true, false});
  CHECK(s.intervals()[1] == Interval::point(6));
  CHECK(IntervalSet::from_intervals(s.intervals()) == s);
}

TEST_CASE("interior and closure") {
  auto s = set_of({Interval::closed(0, 1), Interval::point(2), Interval{3, 4, true, false}});
  auto in = s.interior();
  REQUIRE(in.size() == 2);
  CHECK(in.intervals()[0] == Interval::open(0, 1));
  CHECK(in.intervals()[1] == Interval::open(3, 4));
  auto cl = s.closure();
  CHECK(cl.intervals().back() == Interval::closed(3, 4));
  CHECK(cl.contains(2));
}

TEST_CASE("exact rational membership") {
  auto s = IntervalSet::single(Interval::closed(0, q(1, 3)));
  CHECK(membership(q(1, 3), s) == Membership::In);
  CHECK(membership(q(1, 2), s) == Membership::Out);
  auto o = IntervalSet::single(Interval::open(0, q(1, 3)));
  CHECK(membership(q(1, 3), o) == Membership::Out);
}

TEST_CASE("real membership with tolerance") {
  const Real eps("1e-12");
  CHECK(membership(Real("0.5"), IntervalSet::single(Interval::closed(0, 1)), eps) == Membership::In);
  auto s = IntervalSet::single(Interval::closed(0, q(1, 3)));
  CHECK(membership(to_real(q(1, 3)) + Real("1e-13"), s, eps) == Membership::Uncertain);
  CHECK(membership(to_real(q(1, 3)) + Real("1e-9"), s, eps) == Membership::Out);
  CHECK(membership(Real(-1), s, eps) == Membership::Out);
  // x exactly on the closed endpoint
  CHECK(membership(Real(0), s, eps) == Membership::In);
  CHECK(membership(Real(0), IntervalSet::single(Interval::open(0, 1)), eps) == Membership::Out);
}

TEST_CASE("membership index agrees with the exact path away from endpoints") {
  auto w = cantor_approx(CantorScheme::fat(), 10).outer;
  MembershipIndex idx(w);
  const Real eps("1e-12");
  for (int i = 0; i <= 2000; ++i) {
    const Rational x(i * 7919 % 20011, 20011);
    const Membership m = idx.classify(to_real(x), eps);
    if (m != Membership::Uncertain) CHECK(m == membership(x, w));
  }
  CHECK(idx.classify(Real(-5), eps) == Membership::Out);
  CHECK(idx.classify(Real(5), eps) == Membership::Out);
}

TEST_CASE("translation and window") {
  auto s = set_of({Interval::closed(0, 1), Interval::open(2, 3), Interval::closed(5, 6)});
  auto t = s.translated(q(1, 2));
  CHECK(t.intervals()[0] == Interval::closed(q(1, 2), q(3, 2)));
  CHECK(t.measure() == s.measure());
  CHECK(s.window(q(3, 2), q(5, 2)).size() == 1);
  CHECK(s.window(q(1), q(5)).size() == 3);
  CHECK(s.hull()->lo == 0);
  CHECK(s.hull()->hi == 6);
  CHECK_FALSE(IntervalSet().hull());
}

TEST_CASE("subset") {
  auto a = IntervalSet::single(Interval::open(q(1, 4), q(1, 2)));
  auto b = IntervalSet::single(Interval::closed(0, q(1, 2)));
  CHECK(is_subset(a, b));
  CHECK_FALSE(is_subset(b, a));
  CHECK_FALSE(is_subset(IntervalSet::single(Interval::closed(q(1, 4), q(1, 2))), IntervalSet::single(Interval::open(0, q(1, 2)))));
}

TEST_CASE("union of many sets") {
  std::vector<IntervalSet> parts;
  for (int i = 0; i < 10; ++i) parts.push_back(IntervalSet::single(Interval::closed(i, i + 1)));
  auto u = set_union_all(parts);
  REQUIRE(u.size() == 1);
  CHECK(u.measure() == 10);
}

TEST_CASE("json round trip") {
  auto s = set_of({Interval::closed(0, q(1, 3)), Interval{q(2, 3), q(7, 9), true, false}, Interval::point(q(-5, 11))});
  nlohmann::json j = s;
  CHECK(j[0]["lo"] == "-5/11");
  CHECK(j[1]["loOpen"] == false);
  IntervalSet back = j.get<IntervalSet>();
  CHECK(back == s);
  CHECK(nlohmann::json(back).dump() == j.dump());
}
