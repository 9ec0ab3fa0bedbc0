#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cpsent/cantor.hpp"
#include "cpsent/cps.hpp"
#include "cpsent/window_approx.hpp"

namespace cpsent {

// ---- densities -------------------------------------------------------------------------------

struct DensityRow {
  Real t;
  std::size_t count_inner = 0;
  std::size_t count_outer = 0;
  std::size_t uncertain = 0;
  Real dens_inner;
  Real dens_outer;
  Real target_lo;  // measInner / |det A|
  Real target_hi;  // measOuter / |det A|
};

/// One enumeration at the largest t, counted for every t (volume (2t)^N).
std::vector<DensityRow> density_estimate(const CpsScheme& cps, const WindowApprox& w, const Real& theta,
                                         const std::vector<Real>& ts);

struct FreePointSet {
  std::vector<LatticePoint> points;
  Real t;
  Real h;
  int depth = 0;
  Real density;
};

/// Lattice points whose star lies in C + h, at distance > eps_gap from every gap endpoint of
/// stage <= depth and from the ends of [0,1].
FreePointSet free_points(const CpsScheme& cps, const CantorScheme& scheme, const Real& h, const Real& t, int depth,
                         const Real& eps_gap = Real("1e-9"));

/// Members of S inside the cube C_t.
std::vector<LatticePoint> points_in_cube(const std::vector<LatticePoint>& pts, const Real& t);

// ---- pattern sets and independence ------------------------------------------------------------

/// Exact interval set of m with m ∈ W + h - s* whenever the bit is 1 and m ∉ W + h - s* whenever
/// it is 0, built from inner translates for the ones and outer translates for the zeros, so it
/// certifies the pattern. Without ones the result is taken inside a box one unit wider than all
/// translates. An optional clip keeps only the part inside [clip_lo, clip_hi].
IntervalSet pattern_set(const WindowApprox& w, const Real& h, const std::vector<Real>& stars,
                        const std::vector<int>& bits, const std::optional<Interval>& clip = std::nullopt);

std::vector<int> pattern_bits(std::uint64_t code, std::size_t width);
std::string pattern_string(const std::vector<int>& bits);

/// First subset of `size` candidates, in lexicographic order of positions, on which every one of
/// the 2^size pattern sets has measure >= min_measure. Empty when there is none.
std::vector<LatticePoint> select_free_subset(const WindowApprox& w, const Real& h,
                                             const std::vector<LatticePoint>& candidates, std::size_t size,
                                             const Real& min_measure);

struct PatternWitnesses {
  std::vector<int> bits;
  std::vector<Interval> levels;
  bool complete = false;
  int failed_level = 0;  // first level without a witness, 0 when complete
};

struct TopologicalReport {
  bool independent = false;
  int levels = 0;
  Rational start;
  int depth = 0;
  std::vector<PatternWitnesses> patterns;
};

/// For each pattern, open intervals I_1, I_2, ... inside the pattern set with I_j ⊂ (0, d_j),
/// d_1 = start and d_(j+1) = min(1/(j+1), inf I_j); each I_j is the rightmost available one.
TopologicalReport topological_independence_check(const WindowApprox& w, const Real& h,
                                                 const std::vector<Real>& stars, int levels = 5,
                                                 const Rational& start = Rational(1));

struct PatternMeasure {
  std::vector<int> bits;
  Rational inner_measure;  // exact measure of the certified pattern set
  Rational copy_bound;     // mass of shared Cantor copies outside the excluded translates
  Rational lower_bound;    // max of the two
  bool positive = false;
};

struct MetricReport {
  bool independent = false;
  int depth = 0;
  std::vector<PatternMeasure> patterns;
};

MetricReport metric_independence_check(const WindowApprox& w, const Real& h, const std::vector<Real>& stars,
                                       int copy_depth = 10);

// ---- witnesses -------------------------------------------------------------------------------

/// Membership indexes for both halves of a sandwich, built once per window.
struct WindowIndex {
  explicit WindowIndex(const WindowApprox& w) : inner(w.inner), outer(w.outer) {}
  MembershipIndex inner;
  MembershipIndex outer;
};

struct PatternQuery {
  std::vector<LatticePoint> free;
  std::vector<int> bits;
  Real h;
  Real theta;
};

enum class WitnessStatus { Found, NotFoundWithinRadius, PatternSetEmpty };
const char* to_string(WitnessStatus s);

struct WitnessResult {
  WitnessStatus status = WitnessStatus::NotFoundWithinRadius;
  LatticePoint m;
  Real mbar_star;  // h - theta - m*
  bool verified = false;
  Real radius;
  std::size_t candidates = 0;
};

/// Direct check that s ∈ ⋀(W + theta) + m exactly for the bits equal to 1: s* - m* - theta must be
/// In the inner set for ones and Out of the outer set for zeros.
bool verify_witness(const WindowApprox& w, const PatternQuery& q, const LatticePoint& m,
                    const Real& eps = kMembershipEps);
bool verify_witness(const WindowIndex& idx, const PatternQuery& q, const LatticePoint& m,
                    const Real& eps = kMembershipEps);

/// Every lattice point m with |m| <= radius whose m̄* is In the pattern set, sorted by |m̄*|.
std::vector<LatticePoint> witness_candidates(const CpsScheme& cps, const WindowApprox& w, const PatternQuery& q,
                                             const Real& radius, const Real& eps = kMembershipEps);

/// Smallest-|m̄*| verified witness within the radius.
WitnessResult fullshift_witness(const CpsScheme& cps, const WindowApprox& w, const PatternQuery& q,
                                const Real& radius, const Real& eps = kMembershipEps);

// ---- entropy -------------------------------------------------------------------------------

struct EntropyRow {
  Real t;
  std::size_t free_in_cube = 0;
  std::size_t realized = 0;
  double coverage = 0;  // realized / 2^free_in_cube
  double lower_bound_nats = 0;
  double lower_bound_bits = 0;
  double target_nats = 0;     // nu_S * ln 2
  double reference_nats = 0;  // |C| ln 2 / |det A|
};

struct EntropyReport {
  std::vector<EntropyRow> rows;
  Real radius;
  std::size_t translates = 0;
  Real separation;  // uniform-discreteness radius of the grid of possible pattern points
  TorusPoint fiber;
};

/// Certified pattern counts on S ∩ C_t, realized by lattice translates with |m| <= radius and
/// checked point by point.
EntropyReport entropy_lower_estimate(const CpsScheme& cps, const WindowApprox& w, const Real& theta, const Real& h,
                                     const FreePointSet& s, const std::vector<Real>& ts, const Real& radius,
                                     const Rational& reference_measure);

// ---- genericity, ergodicity, separation -------------------------------------------------------

enum class Genericity { GenericAtDepth, NonGeneric, Uncertain };
const char* to_string(Genericity g);

struct GenericityReport {
  Genericity verdict = Genericity::Uncertain;
  std::optional<LatticePoint> witness;
  Real min_distance;
  std::size_t scanned = 0;
  std::size_t uncertain = 0;
};

/// Scans stars with |l| <= radius against the boundary cover (outer minus inner) shifted by h.
GenericityReport genericity_check(const CpsScheme& cps, const WindowApprox& w, const Real& h, const Real& radius,
                                  const Real& tol);

enum class ErgodicityVerdict { NotUniquelyErgodic, Inconclusive };
const char* to_string(ErgodicityVerdict v);

ErgodicityVerdict ergodicity_verdict(const Real& nu_s, const Real& nu_u, const Real& margin);

struct ErgodicityReport {
  ErgodicityVerdict verdict = ErgodicityVerdict::Inconclusive;
  Real nu_s;
  Real nu_u;
  Real margin;
  std::size_t free_in_cube = 0;
  std::optional<WitnessResult> all_ones;
  std::optional<WitnessResult> all_zeros;
  std::size_t ones_count = 0;
  std::size_t zeros_count = 0;
};

/// Verdict plus the all-ones and all-zeros patterns on S ∩ C_t with their point counts.
ErgodicityReport unique_ergodicity_diagnostic(const CpsScheme& cps, const WindowApprox& w, const Real& theta,
                                              const Real& h, const FreePointSet& s, const Real& t,
                                              const Real& radius, const Real& nu_u, const Real& margin);

struct SeparatedCount {
  std::size_t observed = 0;
  double h_eps = 0;
  std::size_t samples = 0;
  Real t;
  Real r;
};

/// Distinct patterns of translates ⋀(W + theta) - l inside C_t, for lattice translates l with
/// |l| <= sample_radius, quantized at resolution r.
SeparatedCount separated_count(const CpsScheme& cps, const WindowApprox& w, const Real& theta, const Real& r,
                               const Real& t, std::size_t samples, const Real& sample_radius = Real(10000));

}  // namespace cpsent
