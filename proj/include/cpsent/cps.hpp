#pragma once

#include <functional>
#include <string>
#include <vector>

#include "cpsent/error.hpp"
#include "cpsent/numeric.hpp"
#include "cpsent/window_approx.hpp"

namespace cpsent {

enum class CpsFailure { SingularMatrix, NormalizationViolated, DensityHeuristicFailed, InjectivityHeuristicFailed };

const char* to_string(CpsFailure f);

/// Raised by make_cps. `failures` lists every violated check; `primary()` is the first in
/// check order (singular, normalization, density, injectivity).
class CpsError : public Error {
 public:
  CpsError(std::vector<CpsFailure> failures, const std::string& detail);
  const std::vector<CpsFailure>& failures() const { return failures_; }
  CpsFailure primary() const { return failures_.front(); }
  bool has(CpsFailure f) const;

 private:
  std::vector<CpsFailure> failures_;
};

struct CpsOptions {
  Real det_eps = Real("1e-9");
  Real inj_eps = Real("1e-9");
  long check_radius = 1000;
  Real density_gap = Real("0.01");
  /// Cap on vectors visited by each heuristic; the radius shrinks to fit in higher dimension.
  std::size_t check_budget = 4'000'000;
};

struct HeuristicReport {
  long injectivity_radius = 0;
  long density_radius = 0;
  Real min_direct_norm;
  Real max_star_gap;
};

struct LatticePoint {
  IntVec v;
  RealVec direct;
  Real star;
};

/// Euclidean cut-and-project scheme with lattice A(Z^(N+1)), direct space R^N, internal space R.
/// The last row of A is the star map.
class CpsScheme {
 public:
  int dim() const { return n_; }
  int size() const { return n_ + 1; }
  const Real& entry(int i, int j) const { return a_[static_cast<std::size_t>(i * size() + j)]; }
  const Real& det_abs() const { return det_abs_; }
  const Real& det() const { return det_; }
  const std::vector<std::vector<std::string>>& source() const { return source_; }
  const HeuristicReport& heuristics() const { return heuristics_; }
  /// Entry (i, j) of A^-1.
  const Real& inverse(int i, int j) const { return inv_[static_cast<std::size_t>(i * size() + j)]; }

  Real star(const IntVec& v) const;
  RealVec direct(const IntVec& v) const;
  LatticePoint point(const IntVec& v) const;
  /// A^-1 x for x in R^(N+1).
  RealVec solve(const RealVec& x) const;

  friend CpsScheme make_cps(const std::vector<std::vector<std::string>>& rows, int n, const CpsOptions& opts);

 private:
  int n_ = 0;
  std::vector<Real> a_;
  std::vector<Real> inv_;
  Real det_;
  Real det_abs_;
  std::vector<std::vector<std::string>> source_;
  HeuristicReport heuristics_;
};

CpsScheme make_cps(const std::vector<std::vector<std::string>>& rows, int n, const CpsOptions& opts = {});

void to_json(nlohmann::json& j, const CpsScheme& s);
CpsScheme cps_from_json(const nlohmann::json& j, const CpsOptions& opts = {});

struct NumberedStar {
  std::size_t n = 0;
  IntVec v;  // length N; the last coordinate that puts the star in [0,1) is implied
  Real star;
};

/// Index vectors of Z^N ordered by sup norm, then lexicographically, with stars reduced mod 1.
std::vector<NumberedStar> star_numbering(const CpsScheme& s, std::size_t count);
/// The same numbering as an open-ended stream; stops when visit returns false.
void enumerate_numbering(const CpsScheme& s, const std::function<bool(const NumberedStar&)>& visit);

/// Calls visit for every lattice point with |direct|_inf <= t and star in [star_lo, star_hi].
/// Visiting order is deterministic.
void for_each_lattice_point(const CpsScheme& s, const Real& t, const Real& star_lo, const Real& star_hi,
                            const std::function<void(const LatticePoint&)>& visit);

struct PointSet {
  std::vector<LatticePoint> points;
  Real theta;
  Real t;
  std::string window_id;
};

struct ProjectionResult {
  PointSet inner;
  PointSet outer;
  std::size_t uncertain = 0;
};

inline const Real kMembershipEps = Real("1e-12");

ProjectionResult cut_and_project(const CpsScheme& s, const WindowApprox& w, const Real& theta, const Real& t,
                                 const Real& eps = kMembershipEps);

/// Sorts by direct coordinates, lexicographically.
void sort_points(std::vector<LatticePoint>& pts);

struct TorusPoint {
  RealVec rep;     // representative in the half-open column parallelepiped
  RealVec coords;  // its coordinates in the column basis, each in [0,1)
};

TorusPoint torus_reduce(const CpsScheme& s, const RealVec& direct, const Real& internal);
/// Equality on the torus: coordinates agree modulo 1 up to `tol`.
bool torus_equal(const TorusPoint& a, const TorusPoint& b, const Real& tol = Real("1e-25"));

}  // namespace cpsent
