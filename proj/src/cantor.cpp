#include "cpsent/cantor.hpp"

#include "cpsent/error.hpp"

namespace cpsent {

CantorScheme CantorScheme::middle_third() { return CantorScheme{}; }

CantorScheme CantorScheme::fat(const Rational& scale) {
  if (scale <= 0 || scale > 1) {
    throw Error("InvalidScheme", "fat Cantor scale must lie in (0, 1], got " + format_rational(scale));
  }
  CantorScheme s;
  s.kind_ = CantorKind::Fat;
  s.scale_ = scale;
  return s;
}

Rational CantorScheme::gap_length(int stage) const {
  if (kind_ == CantorKind::MiddleThird) return Rational(1, pow(BigInt(3), static_cast<unsigned>(stage)));
  return scale_ / Rational(pow(BigInt(4), static_cast<unsigned>(stage)));
}

Rational CantorScheme::piece_length(int stage) const {
  if (kind_ == CantorKind::MiddleThird) return Rational(1, pow(BigInt(3), static_cast<unsigned>(stage)));
  // 2^n pieces share 1 - (scale/2)(1 - 2^-n).
  const Rational half_pow = Rational(1, pow(BigInt(2), static_cast<unsigned>(stage)));
  return half_pow * (1 - scale_ / 2 * (1 - half_pow));
}

Rational CantorScheme::outer_measure(int depth) const {
  return Rational(pow(BigInt(2), static_cast<unsigned>(depth))) * piece_length(depth);
}

Rational CantorScheme::limit_measure() const {
  if (kind_ == CantorKind::MiddleThird) return 0;
  return 1 - scale_ / 2;
}

std::string CantorScheme::label() const {
  if (kind_ == CantorKind::MiddleThird) return "middle-third";
  return "fat(" + format_rational(scale_) + ")";
}

GapAddress GapAddress::parse(const std::string& bits) {
  if (bits.empty()) throw Error("InvalidAddress", "gap address must be nonempty");
  GapAddress a;
  for (char c : bits) {
    if (c != '0' && c != '1') throw Error("InvalidAddress", "gap address must be a binary word: '" + bits + "'");
    a.word.push_back(static_cast<std::uint8_t>(c - '0'));
  }
  return a;
}

std::string GapAddress::str() const {
  std::string s;
  for (auto b : word) s += static_cast<char>('0' + b);
  return s;
}

std::uint64_t GapAddress::position() const {
  std::uint64_t p = 0;
  for (std::size_t i = 0; i + 1 < word.size(); ++i) p = (p << 1) | word[i];
  return p;
}

GapAddress Gap::address() const {
  GapAddress a;
  for (int i = stage - 2; i >= 0; --i) a.word.push_back(static_cast<std::uint8_t>((position >> i) & 1U));
  a.word.push_back(0);
  return a;
}

Rational piece_left(const CantorScheme& scheme, const std::vector<std::uint8_t>& prefix) {
  Rational left = 0;
  for (std::size_t k = 0; k < prefix.size(); ++k) {
    const int stage = static_cast<int>(k) + 1;
    if (prefix[k]) left += scheme.piece_length(stage) + scheme.gap_length(stage);
  }
  return left;
}

Interval gap_interval(const CantorScheme& scheme, const GapAddress& addr) {
  if (addr.word.empty()) throw Error("InvalidAddress", "gap address must be nonempty");
  if (addr.word.back() != 0) {
    throw Error("InvalidAddress", "gap address must end in 0 (the last letter selects the middle gap): '" +
                                      addr.str() + "'");
  }
  if (addr.word.size() > 62) throw Error("InvalidAddress", "gap address longer than 62 letters");
  const int n = addr.stage();
  std::vector<std::uint8_t> prefix(addr.word.begin(), addr.word.end() - 1);
  const Rational lo = piece_left(scheme, prefix) + scheme.piece_length(n);
  return Interval::open(lo, lo + scheme.gap_length(n));
}

namespace {

struct RangeWalk {
  const CantorScheme& scheme;
  const Rational& lo;
  const Rational& hi;
  int max_stage;
  std::vector<Rational> piece_len;
  std::vector<Rational> gap_len;
  const std::function<void(const Gap&)>& visit;

  // Piece after `done` stages starting at `left`, with binary path `path`.
  void descend(const Rational& left, int done, std::uint64_t path) {
    if (done >= max_stage) return;
    const int stage = done + 1;
    if (left + piece_len[static_cast<std::size_t>(done)] <= lo || left >= hi) return;
    const Rational gap_lo = left + piece_len[static_cast<std::size_t>(stage)];
    const Rational gap_hi = gap_lo + gap_len[static_cast<std::size_t>(stage)];
    descend(left, stage, path << 1);
    if (gap_hi > lo && gap_lo < hi) visit(Gap{stage, path, gap_lo, gap_hi});
    descend(gap_hi, stage, (path << 1) | 1U);
  }
};

}  // namespace

void for_each_gap_in(const CantorScheme& scheme, const Rational& lo, const Rational& hi, int max_stage,
                     const std::function<void(const Gap&)>& visit) {
  if (max_stage > 62) throw Error("DepthTooLarge", "gap stages beyond 62 are not addressable");
  RangeWalk walk{scheme, lo, hi, max_stage, {}, {}, visit};
  for (int n = 0; n <= max_stage; ++n) {
    walk.piece_len.push_back(scheme.piece_length(n));
    walk.gap_len.push_back(n == 0 ? Rational(0) : scheme.gap_length(n));
  }
  walk.descend(Rational(0), 0, 0);
}

std::vector<Gap> gaps_through(const CantorScheme& scheme, int depth) {
  std::vector<Gap> out;
  if (depth <= 0) return out;
  out.reserve((std::size_t{1} << depth) - 1);
  for_each_gap_in(scheme, Rational(-1), Rational(2), depth, [&](const Gap& g) { out.push_back(g); });
  return out;
}

std::vector<Interval> pieces_in(const CantorScheme& scheme, const Rational& lo, const Rational& hi, int depth) {
  std::vector<Rational> piece_len;
  std::vector<Rational> step;
  for (int n = 0; n <= depth; ++n) {
    piece_len.push_back(scheme.piece_length(n));
    step.push_back(n == 0 ? Rational(0) : scheme.piece_length(n) + scheme.gap_length(n));
  }
  std::vector<Interval> out;
  std::function<void(const Rational&, int)> descend = [&](const Rational& left, int done) {
    const Rational right = left + piece_len[static_cast<std::size_t>(done)];
    if (right < lo || left > hi) return;
    if (done == depth) {
      out.push_back(Interval::closed(left, right));
      return;
    }
    descend(left, done + 1);
    descend(left + step[static_cast<std::size_t>(done + 1)], done + 1);
  };
  descend(Rational(0), 0);
  return out;
}

}  // namespace cpsent
