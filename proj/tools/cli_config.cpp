#include "cli_config.hpp"

#include <cstdio>

namespace cpsent::cli {

Node Node::at(const std::string& key) const {
  if (!j_->is_object()) fail("must be an object");
  if (!j_->contains(key)) throw Error("Schema", pointer_ + "/" + key + ": required field is missing");
  return Node(j_->at(key), pointer_ + "/" + key);
}

Node Node::at(std::size_t index) const {
  if (!j_->is_array() || index >= j_->size()) fail("index " + std::to_string(index) + " out of range");
  return Node((*j_)[index], pointer_ + "/" + std::to_string(index));
}

void Node::fail(const std::string& what) const {
  throw Error("Schema", (pointer_.empty() ? std::string("/") : pointer_) + ": " + what);
}

std::string Node::str() const {
  if (!j_->is_string()) fail("must be a string");
  return j_->get<std::string>();
}

std::int64_t Node::integer() const {
  if (!j_->is_number_integer()) fail("must be an integer");
  return j_->get<std::int64_t>();
}

std::uint64_t Node::u64() const {
  if (j_->is_number_unsigned()) return j_->get<std::uint64_t>();
  if (j_->is_number_integer() && j_->get<std::int64_t>() >= 0) return static_cast<std::uint64_t>(j_->get<std::int64_t>());
  if (j_->is_string()) {
    // large seeds may arrive as decimal strings
    const std::string s = j_->get<std::string>();
    std::size_t used = 0;
    try {
      const auto v = std::stoull(s, &used, 10);
      if (used == s.size() && !s.empty() && s[0] != '-') return v;
    } catch (const std::exception&) {
    }
  }
  fail("must be a non-negative 64-bit integer");
}

Real Node::real() const {
  try {
    if (j_->is_string()) return parse_real(j_->get<std::string>());
    if (j_->is_number()) return parse_real(j_->dump());
  } catch (const Error& e) {
    fail(e.what());
  }
  fail("must be a number or a numeric string");
}

Rational Node::rational() const {
  try {
    if (j_->is_string()) return parse_rational(j_->get<std::string>());
    if (j_->is_number_integer()) return Rational(j_->get<std::int64_t>());
    if (j_->is_number()) return parse_rational(j_->dump());
  } catch (const Error& e) {
    fail(e.what());
  }
  fail("must be a rational such as \"1/2\"");
}

bool Node::boolean() const {
  if (!j_->is_boolean()) fail("must be true or false");
  return j_->get<bool>();
}

std::vector<Real> Node::real_list() const {
  std::vector<Real> out;
  if (!j_->is_array()) {
    out.push_back(real());
    return out;
  }
  for (std::size_t i = 0; i < j_->size(); ++i) out.push_back(at(i).real());
  return out;
}

CpsScheme scheme_from(const Node& n) {
  try {
    return cps_from_json(n.raw());
  } catch (const CpsError&) {
    throw;
  } catch (const Error& e) {
    if (e.code() != "Schema") throw;
    const std::string msg = e.what();
    throw Error("Schema", msg.starts_with("/") ? n.pointer() + msg : n.pointer() + ": " + msg);
  }
}

CantorScheme cantor_from(const Node& n) {
  const std::string kind = n.has("kind") ? n.at("kind").str() : "fat";
  if (kind == "middle-third" || kind == "middle_third") return CantorScheme::middle_third();
  if (kind != "fat") n.at("kind").fail("unknown Cantor scheme '" + kind + "' (expected fat or middle-third)");
  const Rational scale = n.has("scale") ? n.at("scale").rational() : Rational(1);
  try {
    return CantorScheme::fat(scale);
  } catch (const Error& e) {
    n.at("scale").fail(e.what());
  }
}

namespace {

int depth_of(const Node& n) {
  const auto d = n.at("depth").integer();
  if (d < 0 || d > 40) n.at("depth").fail("depth must lie in [0, 40]");
  return static_cast<int>(d);
}

int count_of(const Node& n) {
  const auto k = n.at("K").integer();
  if (k < 0 || k > 10000) n.at("K").fail("K must lie in [0, 10000]");
  return static_cast<int>(k);
}

}  // namespace

BuiltWindow build_window(const Node& n, const CpsScheme& cps, std::uint64_t root_seed) {
  const std::string builder = n.at("builder").str();
  BuiltWindow out;
  if (builder == "random") {
    const CantorScheme c = n.has("cantor") ? cantor_from(n.at("cantor")) : CantorScheme::fat();
    out.seed = n.has("seed") ? n.at("seed").u64() : derive_seed(root_seed, "window");
    const Rational p = n.has("p") ? n.at("p").rational() : Rational(1, 2);
    if (p < 0 || p > 1) n.at("p").fail("probability must lie in [0, 1]");
    out.selection = GapSelection::bernoulli(out.seed, p);
    out.cantor = c;
    out.window = random_window(c, *out.selection, depth_of(n));
  } else if (builder == "explicit") {
    const CantorScheme c = n.has("cantor") ? cantor_from(n.at("cantor")) : CantorScheme::fat();
    if (n.has("bits")) {
      out.selection = GapSelection::explicit_bits(n.at("bits").str());
    } else {
      const std::string rule = n.at("rule").str();
      if (rule == "none") {
        out.selection = GapSelection::all(false);
      } else if (rule == "all") {
        out.selection = GapSelection::all(true);
      } else if (rule == "even-stages") {
        out.selection = GapSelection::even_stages();
      } else {
        n.at("rule").fail("unknown rule '" + rule + "' (expected none, all or even-stages)");
      }
    }
    out.cantor = c;
    try {
      out.window = random_window(c, *out.selection, depth_of(n));
    } catch (const Error& e) {
      if (e.code() == "ExplicitSelectionTooShort") n.at("bits").fail(e.what());
      throw;
    }
  } else if (builder == "cantor") {
    const CantorScheme c = n.has("cantor") ? cantor_from(n.at("cantor")) : CantorScheme::fat();
    out.cantor = c;
    out.window = cantor_approx(c, depth_of(n));
  } else if (builder == "deterministic") {
    out.base = deterministic_base(cps, count_of(n));
    out.cantor = CantorScheme::middle_third();
    out.window = deterministic_window(*out.base, depth_of(n));
  } else if (builder == "weak") {
    const CantorScheme m = n.has("M") ? cantor_from(n.at("M")) : CantorScheme::fat();
    if (m.limit_measure() <= 0) n.at("M").fail("the inserted set needs positive measure");
    out.base = deterministic_base(cps, count_of(n));
    out.cantor = CantorScheme::middle_third();
    out.window = weak_window(*out.base, depth_of(n), m);
  } else if (builder == "interval") {
    const Node parts = n.at("intervals");
    if (!parts.raw().is_array()) parts.fail("must be an array of intervals");
    std::vector<Interval> ivs;
    for (std::size_t i = 0; i < parts.size(); ++i) {
      const Node e = parts.at(i);
      Interval iv{e.at("lo").rational(), e.at("hi").rational(), e.has("loOpen") && e.at("loOpen").boolean(),
                  e.has("hiOpen") && e.at("hiOpen").boolean()};
      if (!iv.valid()) e.fail("empty or reversed interval");
      ivs.push_back(std::move(iv));
    }
    out.window = WindowApprox::exact(IntervalSet::from_intervals(std::move(ivs)));
  } else {
    n.at("builder").fail("unknown builder '" + builder +
                         "' (expected random, explicit, cantor, deterministic, weak or interval)");
  }
  return out;
}

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t x) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(x));
  return buf;
}

}  // namespace cpsent::cli
