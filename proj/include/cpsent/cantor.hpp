#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "cpsent/interval_set.hpp"

namespace cpsent {

enum class CantorKind { MiddleThird, Fat };

/// Symmetric Cantor set in [0,1] built by removing one centered open gap from every piece at
/// each stage. Middle-third removes the middle third; Fat removes a gap of absolute length
/// scale * 4^-n at stage n (Smith-Volterra-Cantor), leaving measure 1 - scale/2.
class CantorScheme {
 public:
  static CantorScheme middle_third();
  static CantorScheme fat(const Rational& scale = Rational(1));

  CantorKind kind() const { return kind_; }
  const Rational& scale() const { return scale_; }

  /// Length of each gap removed at stage n >= 1.
  Rational gap_length(int stage) const;
  /// Length of each of the 2^n pieces left after n stages.
  Rational piece_length(int stage) const;
  /// Measure left after `depth` stages.
  Rational outer_measure(int depth) const;
  Rational limit_measure() const;
  std::string label() const;

  friend bool operator==(const CantorScheme&, const CantorScheme&) = default;

 private:
  CantorKind kind_ = CantorKind::MiddleThird;
  Rational scale_ = 1;
};

/// Binary word addressing a gap: the word's prefix picks the piece, its last letter must be 0.
struct GapAddress {
  std::vector<std::uint8_t> word;

  static GapAddress parse(const std::string& bits);
  std::string str() const;
  int stage() const { return static_cast<int>(word.size()); }
  /// Left-to-right rank of the gap among the 2^(stage-1) gaps of its stage.
  std::uint64_t position() const;
};

struct Gap {
  int stage = 0;
  std::uint64_t position = 0;
  Rational lo;
  Rational hi;

  /// Canonical gap number: 1 for stage 1, then 2, 3 for stage 2, and so on.
  std::uint64_t index() const { return (std::uint64_t{1} << (stage - 1)) + position; }
  Interval interval() const { return Interval::open(lo, hi); }
  GapAddress address() const;
};

/// Exact open gap; throws InvalidAddress for an empty word or one ending in 1.
Interval gap_interval(const CantorScheme& scheme, const GapAddress& addr);

/// Left endpoint of the piece reached by following `prefix` (0 = left, 1 = right).
Rational piece_left(const CantorScheme& scheme, const std::vector<std::uint8_t>& prefix);

/// All gaps of stage <= max_stage meeting the open range (lo, hi), in left-to-right order.
void for_each_gap_in(const CantorScheme& scheme, const Rational& lo, const Rational& hi, int max_stage,
                     const std::function<void(const Gap&)>& visit);

/// All gaps of stage <= depth, in left-to-right order.
std::vector<Gap> gaps_through(const CantorScheme& scheme, int depth);

/// Closed pieces of the depth-`depth` approximation meeting [lo, hi], left to right.
std::vector<Interval> pieces_in(const CantorScheme& scheme, const Rational& lo, const Rational& hi, int depth);

}  // namespace cpsent
