#include "cpsent/cps.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace cpsent {

const char* to_string(CpsFailure f) {
  switch (f) {
    case CpsFailure::SingularMatrix: return "SingularMatrix";
    case CpsFailure::NormalizationViolated: return "NormalizationViolated";
    case CpsFailure::DensityHeuristicFailed: return "DensityHeuristicFailed";
    case CpsFailure::InjectivityHeuristicFailed: return "InjectivityHeuristicFailed";
  }
  return "?";
}

namespace {

std::string failure_list(const std::vector<CpsFailure>& fs) {
  std::string s;
  for (auto f : fs) {
    if (!s.empty()) s += ", ";
    s += to_string(f);
  }
  return s;
}

// Largest radius whose (2r+1)^dims cube fits in the budget.
long radius_within_budget(long wanted, int dims, std::size_t budget) {
  long r = wanted;
  while (r > 0 && std::pow(2.0 * static_cast<double>(r) + 1.0, dims) > static_cast<double>(budget)) --r;
  return r;
}

// Calls f for every integer vector of length dims in [-r, r]^dims, lexicographically.
template <class F>
void for_each_in_cube(int dims, long r, F&& f) {
  IntVec v(static_cast<std::size_t>(dims), -r);
  if (dims == 0) {
    f(v);
    return;
  }
  while (true) {
    f(v);
    int k = dims - 1;
    while (k >= 0 && v[static_cast<std::size_t>(k)] == r) {
      v[static_cast<std::size_t>(k)] = -r;
      --k;
    }
    if (k < 0) return;
    ++v[static_cast<std::size_t>(k)];
  }
}

// Gaussian elimination with partial pivoting; returns det and fills inv (row-major, n x n).
Real invert(std::vector<Real> m, int n, std::vector<Real>& inv) {
  inv.assign(static_cast<std::size_t>(n * n), Real(0));
  for (int i = 0; i < n; ++i) inv[static_cast<std::size_t>(i * n + i)] = 1;
  Real det = 1;
  auto at = [n](std::vector<Real>& a, int i, int j) -> Real& { return a[static_cast<std::size_t>(i * n + j)]; };
  for (int col = 0; col < n; ++col) {
    int piv = col;
    for (int r = col + 1; r < n; ++r) {
      if (abs(at(m, r, col)) > abs(at(m, piv, col))) piv = r;
    }
    if (at(m, piv, col) == 0) return Real(0);
    if (piv != col) {
      for (int j = 0; j < n; ++j) {
        std::swap(at(m, piv, j), at(m, col, j));
        std::swap(at(inv, piv, j), at(inv, col, j));
      }
      det = -det;
    }
    const Real p = at(m, col, col);
    det *= p;
    for (int j = 0; j < n; ++j) {
      at(m, col, j) /= p;
      at(inv, col, j) /= p;
    }
    for (int r = 0; r < n; ++r) {
      if (r == col) continue;
      const Real f = at(m, r, col);
      if (f == 0) continue;
      for (int j = 0; j < n; ++j) {
        at(m, r, j) -= f * at(m, col, j);
        at(inv, r, j) -= f * at(inv, col, j);
      }
    }
  }
  return det;
}

}  // namespace

CpsError::CpsError(std::vector<CpsFailure> failures, const std::string& detail)
    : Error(to_string(failures.front()), failure_list(failures) + ": " + detail, ErrorCategory::Usage),
      failures_(std::move(failures)) {}

bool CpsError::has(CpsFailure f) const {
  return std::find(failures_.begin(), failures_.end(), f) != failures_.end();
}

Real CpsScheme::star(const IntVec& v) const {
  Real s = 0;
  for (int j = 0; j < size(); ++j) s += entry(n_, j) * Real(v[static_cast<std::size_t>(j)]);
  return s;
}

RealVec CpsScheme::direct(const IntVec& v) const {
  RealVec out(static_cast<std::size_t>(n_), Real(0));
  for (int i = 0; i < n_; ++i) {
    for (int j = 0; j < size(); ++j) out[static_cast<std::size_t>(i)] += entry(i, j) * Real(v[static_cast<std::size_t>(j)]);
  }
  return out;
}

LatticePoint CpsScheme::point(const IntVec& v) const { return LatticePoint{v, direct(v), star(v)}; }

RealVec CpsScheme::solve(const RealVec& x) const {
  RealVec out(static_cast<std::size_t>(size()), Real(0));
  for (int i = 0; i < size(); ++i) {
    for (int j = 0; j < size(); ++j) out[static_cast<std::size_t>(i)] += inverse(i, j) * x[static_cast<std::size_t>(j)];
  }
  return out;
}

CpsScheme make_cps(const std::vector<std::vector<std::string>>& rows, int n, const CpsOptions& opts) {
  if (n < 1) throw Error("Schema", "direct-space dimension N must be at least 1");
  const int m = n + 1;
  if (static_cast<int>(rows.size()) != m) {
    throw Error("Schema", "matrix must have N+1 = " + std::to_string(m) + " rows");
  }
  CpsScheme s;
  s.n_ = n;
  s.source_ = rows;
  for (const auto& row : rows) {
    if (static_cast<int>(row.size()) != m) {
      throw Error("Schema", "matrix must have N+1 = " + std::to_string(m) + " columns");
    }
    for (const auto& cell : row) {
      Real x = parse_real(cell);
      if (!isfinite(x)) throw Error("Schema", "matrix entry is not finite: '" + cell + "'");
      s.a_.push_back(x);
    }
  }
  s.det_ = invert(s.a_, m, s.inv_);
  s.det_abs_ = abs(s.det_);
  if (s.det_abs_ <= opts.det_eps) {
    throw CpsError({CpsFailure::SingularMatrix}, "|det A| = " + format_real(s.det_abs_, 6));
  }

  std::vector<CpsFailure> failures;
  std::ostringstream detail;

  bool normalized = s.entry(n, n) == 1;
  for (int j = 0; j < n; ++j) normalized = normalized && s.entry(n, j) > 0 && s.entry(n, j) < 1;
  if (!normalized) {
    failures.push_back(CpsFailure::NormalizationViolated);
    detail << "bottom row must be in (0,1) with a final 1; ";
  }

  // Density of the star image mod 1, checked on doubling radii.
  {
    const int dims = normalized ? n : m;
    const long radius = radius_within_budget(opts.check_radius, dims, opts.check_budget);
    Real gap = 1;
    long used = 0;
    for (long r = 1;; r = std::min(2 * r, radius)) {
      std::vector<Real> vals;
      for_each_in_cube(dims, r, [&](const IntVec& v) {
        Real x = 0;
        for (int j = 0; j < dims; ++j) x += s.entry(n, j) * Real(v[static_cast<std::size_t>(j)]);
        vals.push_back(frac(x));
      });
      std::sort(vals.begin(), vals.end());
      gap = vals.front() + 1 - vals.back();
      for (std::size_t i = 1; i < vals.size(); ++i) gap = std::max(gap, Real(vals[i] - vals[i - 1]));
      used = r;
      if (gap < opts.density_gap || r >= radius) break;
    }
    s.heuristics_.density_radius = used;
    s.heuristics_.max_star_gap = gap;
    if (!(gap < opts.density_gap)) {
      failures.push_back(CpsFailure::DensityHeuristicFailed);
      detail << "star values mod 1 leave a gap of " << format_real(gap, 6) << " up to radius " << used << "; ";
    }
  }

  // Injectivity of the direct projection: solve the first direct row for its largest coefficient.
  {
    int c = 0;
    for (int j = 1; j < m; ++j) {
      if (abs(s.entry(0, j)) > abs(s.entry(0, c))) c = j;
    }
    const long radius = radius_within_budget(opts.check_radius, m - 1, opts.check_budget);
    Real best = std::numeric_limits<Real>::infinity();
    IntVec full(static_cast<std::size_t>(m));
    for_each_in_cube(m - 1, radius, [&](const IntVec& rest) {
      Real partial = 0;
      for (int j = 0, k = 0; j < m; ++j) {
        if (j == c) continue;
        full[static_cast<std::size_t>(j)] = rest[static_cast<std::size_t>(k++)];
        partial += s.entry(0, j) * Real(full[static_cast<std::size_t>(j)]);
      }
      const Real target = -partial / s.entry(0, c);
      const Real fl = floor(target);
      for (Real cand : {fl, Real(fl + 1)}) {
        if (abs(cand) > radius) continue;
        full[static_cast<std::size_t>(c)] = static_cast<std::int64_t>(cand);
        if (std::all_of(full.begin(), full.end(), [](std::int64_t x) { return x == 0; })) continue;
        Real norm = 0;
        for (int i = 0; i < n; ++i) {
          Real d = 0;
          for (int j = 0; j < m; ++j) d += s.entry(i, j) * Real(full[static_cast<std::size_t>(j)]);
          norm = std::max(norm, Real(abs(d)));
        }
        best = std::min(best, norm);
      }
    });
    s.heuristics_.injectivity_radius = radius;
    s.heuristics_.min_direct_norm = best;
    if (best < opts.inj_eps) {
      failures.push_back(CpsFailure::InjectivityHeuristicFailed);
      detail << "a nonzero lattice vector projects to direct norm " << format_real(best, 6) << "; ";
    }
  }

  if (!failures.empty()) throw CpsError(failures, detail.str());
  return s;
}

void to_json(nlohmann::json& j, const CpsScheme& s) { j = nlohmann::json{{"N", s.dim()}, {"A", s.source()}}; }

CpsScheme cps_from_json(const nlohmann::json& j, const CpsOptions& opts) {
  if (!j.is_object() || !j.contains("N") || !j.contains("A")) {
    throw Error("Schema", "scheme must be an object with fields N and A");
  }
  if (!j.at("N").is_number_integer()) throw Error("Schema", "/N must be an integer");
  std::vector<std::vector<std::string>> rows;
  if (!j.at("A").is_array()) throw Error("Schema", "/A must be an array of rows");
  for (std::size_t r = 0; r < j.at("A").size(); ++r) {
    const auto& row = j.at("A")[r];
    if (!row.is_array()) throw Error("Schema", "/A/" + std::to_string(r) + " must be an array");
    std::vector<std::string> cells;
    for (std::size_t c = 0; c < row.size(); ++c) {
      const auto& cell = row[c];
      if (cell.is_string()) {
        cells.push_back(cell.get<std::string>());
      } else if (cell.is_number()) {
        cells.push_back(cell.dump());
      } else {
        throw Error("Schema", "/A/" + std::to_string(r) + "/" + std::to_string(c) + " must be a string or number");
      }
    }
    rows.push_back(std::move(cells));
  }
  return make_cps(rows, j.at("N").get<int>(), opts);
}

void enumerate_numbering(const CpsScheme& s, const std::function<bool(const NumberedStar&)>& visit) {
  const int n = s.dim();
  std::size_t next = 1;
  for (long r = 0;; ++r) {
    // Lexicographic walk of the cube, keeping only the shell |v|_inf = r.
    IntVec v(static_cast<std::size_t>(n), -r);
    while (true) {
      long sup = 0;
      for (auto x : v) sup = std::max(sup, static_cast<long>(std::llabs(x)));
      if (sup == r) {
        Real x = 0;
        for (int j = 0; j < n; ++j) x += s.entry(n, j) * Real(v[static_cast<std::size_t>(j)]);
        if (!visit(NumberedStar{next++, v, frac(x)})) return;
      }
      int k = n - 1;
      while (k >= 0) {
        auto& c = v[static_cast<std::size_t>(k)];
        // The last coordinate can skip the interior when no other one is on the shell.
        bool others_on_shell = false;
        for (int i = 0; i < n; ++i) {
          if (i != k && std::llabs(v[static_cast<std::size_t>(i)]) == r) others_on_shell = true;
        }
        if (c < r) {
          c = (k == n - 1 && !others_on_shell && c == -r && r > 0) ? r : c + 1;
          break;
        }
        c = -r;
        --k;
      }
      if (k < 0) break;
    }
  }
}

std::vector<NumberedStar> star_numbering(const CpsScheme& s, std::size_t count) {
  std::vector<NumberedStar> out;
  if (count == 0) return out;
  enumerate_numbering(s, [&](const NumberedStar& ns) {
    out.push_back(ns);
    return out.size() < count;
  });
  return out;
}

void for_each_lattice_point(const CpsScheme& s, const Real& t, const Real& star_lo, const Real& star_hi,
                            const std::function<void(const LatticePoint&)>& visit) {
  if (star_hi < star_lo) return;
  const int n = s.dim();
  const int m = n + 1;
  // Box for the first N coordinates from v = A^-1 (direct, star).
  IntVec lo(static_cast<std::size_t>(n));
  IntVec hi(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) {
    Real spread = 0;
    for (int i = 0; i < n; ++i) spread += abs(s.inverse(j, i)) * t;
    const Real a = s.inverse(j, n) * star_lo;
    const Real b = s.inverse(j, n) * star_hi;
    lo[static_cast<std::size_t>(j)] = static_cast<std::int64_t>(floor(std::min(a, b) - spread)) - 1;
    hi[static_cast<std::size_t>(j)] = static_cast<std::int64_t>(ceil(std::max(a, b) + spread)) + 1;
  }
  LatticePoint p;
  p.v.assign(static_cast<std::size_t>(m), 0);
  p.direct.assign(static_cast<std::size_t>(n), Real(0));
  RealVec partial(static_cast<std::size_t>(n));
  const Real last = s.entry(n, n);
  IntVec head = lo;
  while (true) {
    Real s0 = 0;
    for (int i = 0; i < n; ++i) partial[static_cast<std::size_t>(i)] = 0;
    for (int j = 0; j < n; ++j) {
      const Real vj = Real(head[static_cast<std::size_t>(j)]);
      s0 += s.entry(n, j) * vj;
      for (int i = 0; i < n; ++i) partial[static_cast<std::size_t>(i)] += s.entry(i, j) * vj;
      p.v[static_cast<std::size_t>(j)] = head[static_cast<std::size_t>(j)];
    }
    const auto first = static_cast<std::int64_t>(ceil((star_lo - s0) / last)) - 1;
    const auto final_ = static_cast<std::int64_t>(floor((star_hi - s0) / last)) + 1;
    for (std::int64_t k = first; k <= final_; ++k) {
      const Real vk = Real(k);
      const Real st = s0 + last * vk;
      if (st < star_lo || st > star_hi) continue;
      bool in_cube = true;
      for (int i = 0; i < n && in_cube; ++i) {
        const Real d = partial[static_cast<std::size_t>(i)] + s.entry(i, n) * vk;
        if (abs(d) > t) in_cube = false;
        p.direct[static_cast<std::size_t>(i)] = d;
      }
      if (!in_cube) continue;
      p.v[static_cast<std::size_t>(n)] = k;
      p.star = st;
      visit(p);
    }
    int j = n - 1;
    while (j >= 0 && head[static_cast<std::size_t>(j)] == hi[static_cast<std::size_t>(j)]) {
      head[static_cast<std::size_t>(j)] = lo[static_cast<std::size_t>(j)];
      --j;
    }
    if (j < 0) break;
    ++head[static_cast<std::size_t>(j)];
  }
}

void sort_points(std::vector<LatticePoint>& pts) {
  std::sort(pts.begin(), pts.end(), [](const LatticePoint& a, const LatticePoint& b) {
    if (a.direct != b.direct) return a.direct < b.direct;
    return a.v < b.v;
  });
}

ProjectionResult cut_and_project(const CpsScheme& s, const WindowApprox& w, const Real& theta, const Real& t,
                                 const Real& eps) {
  if (!(t > 0)) throw Error("InvalidRadius", "cube radius t must be positive");
  ProjectionResult r;
  r.inner.theta = r.outer.theta = theta;
  r.inner.t = r.outer.t = t;
  r.inner.window_id = r.outer.window_id = w.label;
  if (w.outer.empty()) return r;
  const MembershipIndex outer(w.outer);
  const MembershipIndex inner(w.inner);
  for_each_lattice_point(s, t, outer.min() + theta - eps, outer.max() + theta + eps, [&](const LatticePoint& p) {
    const Real x = p.star - theta;
    const Membership mo = outer.classify(x, eps);
    const Membership mi = inner.classify(x, eps);
    if (mo == Membership::Uncertain || mi == Membership::Uncertain) ++r.uncertain;
    if (mo != Membership::Out) r.outer.points.push_back(p);
    if (mi == Membership::In && mo != Membership::Out) r.inner.points.push_back(p);
  });
  sort_points(r.inner.points);
  sort_points(r.outer.points);
  return r;
}

TorusPoint torus_reduce(const CpsScheme& s, const RealVec& direct, const Real& internal) {
  RealVec x = direct;
  x.push_back(internal);
  RealVec c = s.solve(x);
  for (auto& ci : c) ci = frac(ci);
  TorusPoint tp;
  tp.coords = c;
  tp.rep.assign(static_cast<std::size_t>(s.size()), Real(0));
  for (int i = 0; i < s.size(); ++i) {
    for (int j = 0; j < s.size(); ++j) tp.rep[static_cast<std::size_t>(i)] += s.entry(i, j) * c[static_cast<std::size_t>(j)];
  }
  return tp;
}

bool torus_equal(const TorusPoint& a, const TorusPoint& b, const Real& tol) {
  if (a.coords.size() != b.coords.size()) return false;
  for (std::size_t i = 0; i < a.coords.size(); ++i) {
    if (dist_to_int(a.coords[i] - b.coords[i]) > tol) return false;
  }
  return true;
}

}  // namespace cpsent
