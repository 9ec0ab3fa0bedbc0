#pragma once

#include <string>
#include <vector>

#include "cpsent/cantor.hpp"
#include "cpsent/interval_set.hpp"

namespace cpsent {

/// A scaled copy offset + scale * M of a Cantor set M, cut to `clip`. Weak windows carry these so
/// that mass hidden inside the closed outer cover can still be certified.
struct FatCopy {
  Rational offset;
  Rational scale;
  Interval clip;
  CantorScheme shape;

  /// Exact mass when the clip covers the whole copy.
  Rational full_mass() const { return scale * shape.limit_measure(); }
  FatCopy translated(const Rational& shift) const;
};

/// Lower bound for the measure of (copy minus `avoid`), certified by descending `max_depth`
/// stages into the copy's pieces.
Rational copy_mass_outside(const FatCopy& copy, const IntervalSet& avoid, int max_depth = 10);

/// Finite-depth sandwich inner ⊆ W ⊆ outer.
struct WindowApprox {
  IntervalSet inner;
  IntervalSet outer;
  int depth = 0;
  Rational meas_inner = 0;
  Rational meas_outer = 0;
  std::string label;
  std::vector<FatCopy> copies;
  std::vector<std::string> warnings;

  static WindowApprox make(IntervalSet inner, IntervalSet outer, int depth, std::string label);
  /// An explicitly given set: inner is its interior, outer its closure.
  static WindowApprox exact(const IntervalSet& w, std::string label = "interval");

  bool bounded() const { return true; }
  /// inner ⊆ outer and both canonical.
  bool consistent() const;
  IntervalSet boundary() const { return set_difference(outer, inner); }
};

void to_json(nlohmann::json& j, const WindowApprox& w);

}  // namespace cpsent
