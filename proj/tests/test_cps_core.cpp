#include "doctest.h"

#include <set>

#include "cpsent/cps.hpp"

using namespace cpsent;

namespace {

const CpsScheme& fixture() {
  static const CpsScheme s = make_cps({{"1", "tau"}, {"sqrt2m1", "1"}}, 1);
  return s;
}

Real alpha() { return parse_real("sqrt2m1"); }

CpsFailure failure_of(const std::vector<std::vector<std::string>>& rows, int n) {
  try {
    make_cps(rows, n);
  } catch (const CpsError& e) {
    return e.primary();
  }
  FAIL("expected make_cps to reject the matrix");
  return CpsFailure::SingularMatrix;
}

}  // namespace

TEST_CASE("determinant of the golden/silver scheme") {
  const Real expected = 1 - parse_real("tau") * alpha();
  CHECK(fixture().det_abs() == abs(expected));
  CHECK(static_cast<double>(fixture().det_abs()) == doctest::Approx(0.32978837747915766));
  CHECK(fixture().dim() == 1);
}

TEST_CASE("rational bottom row fails density") {
  CHECK(failure_of({{"1", "0"}, {"0.5", "1"}}, 1) == CpsFailure::DensityHeuristicFailed);
}

TEST_CASE("kernel vector fails injectivity") {
  try {
    make_cps({{"1", "1"}, {"0.3", "1"}}, 1);
    FAIL("accepted");
  } catch (const CpsError& e) {
    CHECK(e.has(CpsFailure::InjectivityHeuristicFailed));
  }
}

TEST_CASE("singular and unnormalized matrices") {
  CHECK(failure_of({{"1", "2"}, {"0.5", "1"}}, 1) == CpsFailure::SingularMatrix);
  CHECK(failure_of({{"1", "tau"}, {"sqrt2m1", "2"}}, 1) == CpsFailure::NormalizationViolated);
  CHECK(failure_of({{"1", "tau"}, {"1.5", "1"}}, 1) == CpsFailure::NormalizationViolated);
  CHECK_THROWS_AS(make_cps({{"1", "tau"}}, 1), Error);
}

TEST_CASE("star values") {
  CHECK(fixture().star({0, 0}) == 0);
  CHECK(fixture().star({1, 0}) == alpha());
  CHECK(static_cast<double>(fixture().star({3, -1})) == doctest::Approx(0.24264068711928521));
  const RealVec d = fixture().direct({1, 1});
  CHECK(d[0] == 1 + parse_real("tau"));
}

TEST_CASE("numbering starts at the origin and walks shells") {
  auto one = star_numbering(fixture(), 1);
  REQUIRE(one.size() == 1);
  CHECK(one[0].n == 1);
  CHECK(one[0].v == IntVec{0});
  CHECK(one[0].star == 0);
  auto three = star_numbering(fixture(), 3);
  REQUIRE(three.size() == 3);
  CHECK(three[1].v == IntVec{-1});
  CHECK(three[2].v == IntVec{1});
  CHECK(abs(three[1].star - (1 - alpha())) < Real("1e-30"));
  CHECK(abs(three[2].star - alpha()) < Real("1e-30"));
}

TEST_CASE("numbering covers cubes in order in two dimensions") {
  auto s = make_cps({{"1", "0", "sqrt2"}, {"0", "1", "sqrt5"}, {"sqrt2m1", "0.6180339887498948482045868343656", "1"}}, 2);
  for (long t = 0; t <= 3; ++t) {
    const std::size_t count = static_cast<std::size_t>((2 * t + 1) * (2 * t + 1));
    auto numbered = star_numbering(s, count);
    std::set<IntVec> seen;
    for (const auto& e : numbered) {
      CHECK(std::max(std::abs(e.v[0]), std::abs(e.v[1])) <= t);
      seen.insert(e.v);
      CHECK(e.star >= 0);
      CHECK(e.star < 1);
    }
    CHECK(seen.size() == count);
  }
}

TEST_CASE("cut and project an interval window") {
  auto w = WindowApprox::exact(IntervalSet::single(Interval::closed(0, 1)));
  auto r = cut_and_project(fixture(), w, Real(0), Real(10));
  CHECK(r.uncertain == 0);
  // stars 0 (origin) and 1 (v = (0,1)) sit exactly on the closed ends
  CHECK(r.outer.points.size() == 63);
  CHECK(r.inner.points.size() == 61);
  for (std::size_t i = 1; i < r.outer.points.size(); ++i) {
    CHECK(r.outer.points[i - 1].direct < r.outer.points[i].direct);
  }
}

TEST_CASE("empty window projects to nothing") {
  auto r = cut_and_project(fixture(), WindowApprox::exact(IntervalSet()), Real(0), Real(100));
  CHECK(r.outer.points.empty());
  CHECK(r.inner.points.empty());
}

TEST_CASE("cut and project is monotone in the window") {
  auto small = WindowApprox::exact(IntervalSet::single(Interval::closed(Rational(1, 5), Rational(1, 2))));
  auto big = WindowApprox::exact(IntervalSet::single(Interval::closed(0, 1)));
  auto a = cut_and_project(fixture(), small, Real("0.31"), Real(200)).outer.points;
  auto b = cut_and_project(fixture(), big, Real("0.31"), Real(200)).outer.points;
  std::set<IntVec> bigger;
  for (const auto& p : b) bigger.insert(p.v);
  for (const auto& p : a) CHECK(bigger.count(p.v) == 1);
}

TEST_CASE("torus reduction") {
  auto origin = torus_reduce(fixture(), {Real(0)}, Real(0));
  CHECK(origin.coords[0] == 0);
  CHECK(origin.coords[1] == 0);
  const RealVec d = fixture().direct({1, 0});
  CHECK(torus_equal(torus_reduce(fixture(), d, fixture().star({1, 0})), origin));
  auto p = torus_reduce(fixture(), {Real("0.5")}, Real("0.2"));
  for (const auto& c : p.coords) {
    CHECK(c >= 0);
    CHECK(c < 1);
  }
  auto shifted = torus_reduce(fixture(), {Real("0.5") + fixture().direct({3, -7})[0]},
                              Real("0.2") + fixture().star({3, -7}));
  CHECK(torus_equal(p, shifted, Real("1e-28")));
}

TEST_CASE("scheme json round trip") {
  nlohmann::json j = fixture();
  auto back = cps_from_json(j);
  CHECK(back.det_abs() == fixture().det_abs());
  CHECK(nlohmann::json(back).dump() == j.dump());
  CHECK_THROWS_AS(cps_from_json(nlohmann::json{{"N", 1}}), Error);
}
