#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "cpsent/cantor.hpp"
#include "cpsent/cps.hpp"
#include "cpsent/window_approx.hpp"

namespace cpsent {

std::uint64_t splitmix64(std::uint64_t x);
/// Stable per-component seed: splitmix64 of the root seed mixed with an FNV-1a hash of the name.
std::uint64_t derive_seed(std::uint64_t root, std::string_view component);
/// Counter-mode Bernoulli draw for gap `index`: 1 with probability p (exact comparison).
bool bernoulli_bit(std::uint64_t seed, std::uint64_t index, const Rational& p);

/// Which gaps of a Cantor scheme are filled in.
struct GapSelection {
  enum class Mode { Bernoulli, Explicit };
  Mode mode = Mode::Explicit;
  std::uint64_t seed = 0;
  Rational p = Rational(1, 2);
  std::function<bool(const Gap&)> rule;
  std::string label;

  static GapSelection bernoulli(std::uint64_t seed, const Rational& p);
  static GapSelection explicit_rule(std::string label, std::function<bool(const Gap&)> rule);
  /// bits[i-1] is the choice for canonical gap index i; gaps beyond the string are rejected.
  static GapSelection explicit_bits(const std::string& bits);
  static GapSelection all(bool value);
  /// Selects gaps whose stage is even.
  static GapSelection even_stages();

  bool selected(const Gap& g) const;
};

WindowApprox cantor_approx(const CantorScheme& scheme, int depth);

/// Cantor set plus the selected gaps of stage <= depth.
WindowApprox random_window(const CantorScheme& scheme, const GapSelection& sel, int depth);

struct PropernessReport {
  bool proper = false;
  std::size_t endpoints = 0;
  std::size_t passing = 0;
  double fraction = 0;
  Rational radius;
  std::size_t min_nearby = 0;
  double mean_nearby = 0;
  /// Union bound on the chance that some endpoint sees only one kind of gap.
  double failure_bound = 0;
  int depth = 0;
};

/// Every endpoint of a gap of stage <= depth-2 must see a selected and an unselected gap of
/// stage <= depth (other than its own) within three pieces of stage depth-2.
PropernessReport properness_report(const CantorScheme& scheme, const GapSelection& sel, int depth);

struct BaseInterval {
  std::size_t k = 0;
  std::size_t n = 0;
  IntVec v;
  long norm = 0;
  Real star;
  Real eta;
  Rational lo;  // the interval is [lo, hi)
  Rational hi;
  double ratio = 0;  // k / n

  Rational eps() const { return hi - lo; }
};

struct DeterministicBase {
  std::vector<std::int64_t> kappa;  // kappa[t] for t = 0, 1, ...
  std::vector<BaseInterval> intervals;
  std::size_t numbered = 0;  // how many J_n were examined
};

struct BaseOptions {
  std::size_t max_numbering = 2'000'000;
  std::uint64_t max_eta_steps = 400'000'000;
};

DeterministicBase deterministic_base(const CpsScheme& cps, int count, const BaseOptions& opts = {});

/// Class of marker slot l in the partition of the positive integers: (oddpart(l) + 1) / 2.
std::uint64_t partition_class(std::uint64_t slot);

struct PatternPair {
  std::vector<int> ones;   // M
  std::vector<int> zeros;  // N
  friend bool operator==(const PatternPair&, const PatternPair&) = default;
};

/// Enumeration of pairs of disjoint finite subsets of {1, 2, ...}, 1-based, starting with
/// (∅, ∅) and ordered by largest element, total size, then lexicographically.
PatternPair pattern_pair(std::size_t index);
std::size_t pattern_pair_index(const PatternPair& pair);

enum class GapRole { Core, Marker, Excluded };

struct GapClass {
  GapRole role = GapRole::Excluded;
  std::uint64_t slot = 0;  // for markers
};

/// Middle-third gap roles: stages divisible by 4 form the common core; stages 2, 3 mod 4 carry
/// marker slots when the word starts with ceil(stage/2) zeros; everything else is excluded.
GapClass classify_gap(int stage, std::uint64_t position);
/// Whether marker slot l belongs to the family member j, i.e. j is in M of the slot's class.
bool slot_in_family(int j, std::uint64_t slot);
bool family_contains(int j, int stage, std::uint64_t position);
/// (stage, position) of marker slot l.
std::pair<int, std::uint64_t> marker_gap(std::uint64_t slot);

/// The open set A_j (core plus its markers) up to stage `depth`.
IntervalSet independent_open_family(int j, int depth);

/// Each I_k receives the translate of cl(A_k) resolved down to `depth` stages below the scale
/// of I_k; outside the intervals only the outer cover is known.
WindowApprox deterministic_window(const DeterministicBase& base, int depth);
WindowApprox deterministic_window(const CpsScheme& cps, int count, int depth);

/// Like deterministic_window, but A_k is the Cantor set plus scaled copies of `m` in its marker
/// gaps, so the window has empty interior.
WindowApprox weak_window(const DeterministicBase& base, int depth, const CantorScheme& m);
WindowApprox weak_window(const CpsScheme& cps, int count, int depth, const CantorScheme& m);

/// Smallest p >= 0 with 3^-p <= eps.
int triadic_scale(const Rational& eps);

}  // namespace cpsent
