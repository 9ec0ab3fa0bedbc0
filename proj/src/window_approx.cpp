#include "cpsent/window_approx.hpp"

#include <functional>

namespace cpsent {

FatCopy FatCopy::translated(const Rational& shift) const {
  FatCopy c = *this;
  c.offset += shift;
  c.clip.lo += shift;
  c.clip.hi += shift;
  return c;
}

Rational copy_mass_outside(const FatCopy& copy, const IntervalSet& avoid, int max_depth) {
  const CantorScheme& m = copy.shape;
  const IntervalSet clip_set = IntervalSet::single(copy.clip);
  Rational total = 0;
  std::function<void(const Rational&, int)> descend = [&](const Rational& left, int done) {
    const Rational len = copy.scale * m.piece_length(done);
    const Interval piece = Interval::closed(left, left + len);
    const Rational mass = copy.scale * m.limit_measure() / Rational(pow(BigInt(2), static_cast<unsigned>(done)));
    const IntervalSet piece_set = IntervalSet::single(piece);
    const IntervalSet allowed = set_difference(set_intersection(piece_set, clip_set), avoid.window(piece.lo, piece.hi));
    const Rational allowed_len = allowed.measure();
    if (allowed_len == 0) return;
    const Rational lost = len - allowed_len;
    if (lost == 0) {
      total += mass;
      return;
    }
    if (done == max_depth) {
      // Mass in the piece that avoids the forbidden part is at least mass - |forbidden part|.
      if (mass > lost) total += mass - lost;
      return;
    }
    descend(left, done + 1);
    descend(left + copy.scale * (m.piece_length(done + 1) + m.gap_length(done + 1)), done + 1);
  };
  descend(copy.offset, 0);
  return total;
}

WindowApprox WindowApprox::make(IntervalSet inner, IntervalSet outer, int depth, std::string label) {
  WindowApprox w;
  w.meas_inner = inner.measure();
  w.meas_outer = outer.measure();
  w.inner = std::move(inner);
  w.outer = std::move(outer);
  w.depth = depth;
  w.label = std::move(label);
  return w;
}

WindowApprox WindowApprox::exact(const IntervalSet& w, std::string label) {
  return make(w.interior(), w.closure(), 0, std::move(label));
}

bool WindowApprox::consistent() const {
  return inner.is_canonical() && outer.is_canonical() && is_subset(inner, outer) && meas_inner <= meas_outer;
}

void to_json(nlohmann::json& j, const WindowApprox& w) {
  j = nlohmann::json{{"label", w.label},
                     {"depth", w.depth},
                     {"measInner", format_rational(w.meas_inner)},
                     {"measOuter", format_rational(w.meas_outer)},
                     {"inner", w.inner},
                     {"outer", w.outer}};
  if (!w.copies.empty()) {
    auto arr = nlohmann::json::array();
    for (const auto& c : w.copies) {
      arr.push_back({{"offset", format_rational(c.offset)},
                     {"scale", format_rational(c.scale)},
                     {"clip", c.clip},
                     {"shape", c.shape.label()}});
    }
    j["copies"] = arr;
  }
  if (!w.warnings.empty()) j["warnings"] = w.warnings;
}

}  // namespace cpsent
