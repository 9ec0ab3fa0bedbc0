#include <algorithm>

#include "cpsent/analysis.hpp"
#include "cpsent/window_builders.hpp"

namespace cpsent {

namespace {

Real sup_norm(const RealVec& x) {
  Real m = 0;
  for (const auto& c : x) m = std::max(m, Real(abs(c)));
  return m;
}

Real cube_volume(const Real& t, int n) { return pow(2 * t, n); }

}  // namespace

std::vector<DensityRow> density_estimate(const CpsScheme& cps, const WindowApprox& w, const Real& theta,
                                         const std::vector<Real>& ts) {
  std::vector<DensityRow> rows;
  if (ts.empty()) return rows;
  for (const auto& t : ts) {
    if (!(t > 0)) throw Error("InvalidRadius", "cube radius t must be positive");
  }
  const Real tmax = *std::max_element(ts.begin(), ts.end());
  struct Hit {
    Real norm;
    bool inner;
    bool uncertain;
  };
  std::vector<Hit> hits;
  if (!w.outer.empty()) {
    const WindowIndex idx(w);
    const Real& eps = kMembershipEps;
    for_each_lattice_point(cps, tmax, idx.outer.min() + theta - eps, idx.outer.max() + theta + eps,
                           [&](const LatticePoint& p) {
                             const Real x = p.star - theta;
                             const Membership mo = idx.outer.classify(x, eps);
                             if (mo == Membership::Out) return;
                             const Membership mi = idx.inner.classify(x, eps);
                             hits.push_back(Hit{sup_norm(p.direct), mi == Membership::In,
                                                mo == Membership::Uncertain || mi == Membership::Uncertain});
                           });
  }
  const Real det = cps.det_abs();
  for (const auto& t : ts) {
    DensityRow r;
    r.t = t;
    for (const auto& hit : hits) {
      if (hit.norm > t) continue;
      ++r.count_outer;
      if (hit.inner) ++r.count_inner;
      if (hit.uncertain) ++r.uncertain;
    }
    const Real vol = cube_volume(t, cps.dim());
    r.dens_inner = Real(r.count_inner) / vol;
    r.dens_outer = Real(r.count_outer) / vol;
    r.target_lo = to_real(w.meas_inner) / det;
    r.target_hi = to_real(w.meas_outer) / det;
    rows.push_back(r);
  }
  return rows;
}

FreePointSet free_points(const CpsScheme& cps, const CantorScheme& scheme, const Real& h, const Real& t, int depth,
                         const Real& eps_gap) {
  if (depth < 2) throw Error("InvalidDepth", "free points need depth >= 2");
  FreePointSet s;
  s.t = t;
  s.h = h;
  s.depth = depth;
  const WindowApprox c = cantor_approx(scheme, depth);
  const MembershipIndex idx(c.outer);
  for_each_lattice_point(cps, t, h - eps_gap, h + 1 + eps_gap, [&](const LatticePoint& p) {
    if (idx.classify(p.star - h, eps_gap) == Membership::In) s.points.push_back(p);
  });
  sort_points(s.points);
  s.density = Real(s.points.size()) / cube_volume(t, cps.dim());
  return s;
}

std::vector<LatticePoint> points_in_cube(const std::vector<LatticePoint>& pts, const Real& t) {
  std::vector<LatticePoint> out;
  for (const auto& p : pts) {
    if (sup_norm(p.direct) <= t) out.push_back(p);
  }
  return out;
}

}  // namespace cpsent
