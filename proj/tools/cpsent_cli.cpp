#include <algorithm>
#include <charconv>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "cli_config.hpp"

namespace fs = std::filesystem;
using namespace cpsent;
using namespace cpsent::cli;

namespace {

constexpr const char* kVersion = "0.3.0";
constexpr const char* kManifestName = "manifest.json";

enum Exit { kOk = 0, kInconclusive = 1, kUsage = 2, kInvariant = 3 };

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
};

struct Artifact {
  std::string stem;
  json record;
  Table table;
};

struct Run {
  std::vector<std::string> command;
  json config;
  std::uint64_t root_seed = 0;
  std::string format = "json";
  std::string svg_name;  // empty when no figure was asked for
  fs::path out;
  json seeds = json::object();
  json timings = json::array();
  std::vector<Artifact> artifacts;
  std::string svg;
  int exit_code = kOk;
};

template <class F>
auto timed(Run& run, const std::string& stage, F&& body) {
  const auto start = std::chrono::steady_clock::now();
  auto finish = [&] {
    const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    run.timings.push_back({{"stage", stage}, {"ms", ms}});
  };
  if constexpr (std::is_void_v<decltype(body())>) {
    body();
    finish();
  } else {
    auto result = body();
    finish();
    return result;
  }
}

std::string fmt(const Real& x) { return format_real(x); }
std::string fmt(const Rational& q) { return format_rational(q); }

std::string fmt_double(double x) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

std::string join_vec(const IntVec& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? " " : "") + std::to_string(v[i]);
  return s;
}

json vec_json(const IntVec& v) { return json(std::vector<std::int64_t>(v.begin(), v.end())); }

/// A config section whose missing parameters are filled with their defaults, so the manifest
/// records every value that was used.
class Section {
 public:
  Section(json& parent, const std::string& key, const std::string& parent_pointer) : pointer_(parent_pointer + "/" + key) {
    if (!parent.contains(key)) parent[key] = json::object();
    j_ = &parent[key];
    if (!j_->is_object()) Node(*j_, pointer_).fail("must be an object");
  }

  bool has(const std::string& key) const { return j_->contains(key); }
  Node node(const std::string& key) const { return Node(*j_, pointer_).at(key); }
  json& raw() { return *j_; }

  Real real(const std::string& key, const std::string& fallback) {
    fill(key, fallback);
    return node(key).real();
  }
  Rational rational(const std::string& key, const std::string& fallback) {
    fill(key, fallback);
    return node(key).rational();
  }
  std::int64_t integer(const std::string& key, std::int64_t fallback) {
    fill(key, fallback);
    return node(key).integer();
  }
  std::vector<Real> reals(const std::string& key, const std::vector<std::string>& fallback) {
    fill(key, fallback);
    return node(key).real_list();
  }

 private:
  template <class T>
  void fill(const std::string& key, const T& fallback) {
    if (!j_->contains(key)) (*j_)[key] = fallback;
  }

  json* j_;
  std::string pointer_;
};

// ---- shared stages ---------------------------------------------------------------------------

CpsScheme load_scheme(Run& run) {
  return timed(run, "scheme", [&] { return scheme_from(Node(run.config, "").at("scheme")); });
}

BuiltWindow load_window(Run& run, const CpsScheme& cps) {
  BuiltWindow b = timed(run, "window", [&] {
    return build_window(Node(run.config, "").at("window"), cps, run.root_seed);
  });
  if (b.selection && b.selection->mode == GapSelection::Mode::Bernoulli) run.seeds["window"] = b.seed;
  if (!b.window.consistent()) {
    throw Error("WindowInconsistent", "inner approximation is not contained in the outer one", ErrorCategory::Invariant);
  }
  return b;
}

json meta(Run& run, const std::string& schema) {
  json m{{"schema", schema}, {"manifest", kManifestName}, {"seed", run.root_seed}};
  if (run.seeds.contains("window")) m["windowSeed"] = run.seeds["window"];
  if (run.config.contains("window") && run.config["window"].contains("depth")) m["depth"] = run.config["window"]["depth"];
  if (run.config.contains("analysis")) {
    const json& a = run.config["analysis"];
    for (const char* key : {"radius", "tol", "margin", "theta", "h"}) {
      if (a.contains(key)) m[key] = a[key];
    }
  }
  m["membershipEps"] = fmt(kMembershipEps);
  return m;
}

Table key_values(const std::vector<std::pair<std::string, std::string>>& kv) {
  Table t{{"field", "value"}, {}};
  for (const auto& [k, v] : kv) t.rows.push_back({k, v});
  return t;
}

FreePointSet load_free_points(Run& run, const CpsScheme& cps, const BuiltWindow& b, const Real& h) {
  if (!b.cantor) Node(run.config["window"], "/window").fail("free points need a Cantor-type window");
  Section free(run.config["analysis"], "free", "/analysis");
  const Real t = free.real("t", "10");
  const int depth = static_cast<int>(free.integer("depth", b.window.depth));
  const Real eps_gap = free.real("epsGap", "1e-9");
  return timed(run, "free-points", [&] { return free_points(cps, *b.cantor, h, t, depth, eps_gap); });
}

struct FreeChoice {
  std::vector<LatticePoint> points;  // empty when the stars come from a deterministic base
  std::vector<Real> stars;
  std::string source;
};

/// Free points F: explicit index vectors, the stars of the first base intervals, or the first
/// subset of S near the origin whose pattern sets all have measure >= minMeasure.
FreeChoice choose_free(Run& run, const CpsScheme& cps, const BuiltWindow& b, const Real& h, std::size_t fallback_size,
                       bool allow_base) {
  Section a(run.config, "analysis", "");
  FreeChoice out;
  if (a.has("points")) {
    const Node pts = a.node("points");
    if (!pts.raw().is_array()) pts.fail("must be an array of integer vectors");
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const Node p = pts.at(i);
      if (!p.raw().is_array() || static_cast<int>(p.size()) != cps.size()) {
        p.fail("must hold N+1 = " + std::to_string(cps.size()) + " integers");
      }
      IntVec v;
      for (std::size_t c = 0; c < p.size(); ++c) v.push_back(p.at(c).integer());
      out.points.push_back(cps.point(v));
    }
    out.source = "explicit";
  } else if (allow_base && b.base) {
    const auto size = static_cast<std::size_t>(a.integer("size", static_cast<std::int64_t>(fallback_size)));
    if (size > b.base->intervals.size()) a.node("size").fail("more free points than base intervals");
    for (std::size_t k = 0; k < size; ++k) out.stars.push_back(b.base->intervals[k].star);
    out.source = "base";
    return out;
  } else {
    const Real cube = a.real("cube", "3");
    const auto size = static_cast<std::size_t>(a.integer("size", static_cast<std::int64_t>(fallback_size)));
    const Real min_measure = a.real("minMeasure", "1e-5");
    const FreePointSet s = load_free_points(run, cps, b, h);
    std::vector<LatticePoint> near = points_in_cube(s.points, cube);
    auto norm = [](const LatticePoint& p) {
      Real m = 0;
      for (const auto& x : p.direct) m = std::max(m, Real(abs(x)));
      return m;
    };
    std::stable_sort(near.begin(), near.end(), [&](const auto& x, const auto& y) { return norm(x) < norm(y); });
    out.points = timed(run, "select-free", [&] { return select_free_subset(b.window, h, near, size, min_measure); });
    if (out.points.empty()) {
      throw Error("NoFreeSubset",
                  "no " + std::to_string(size) + " free points in the cube carry every pattern with measure >= " +
                      fmt(min_measure),
                  ErrorCategory::Inconclusive);
    }
    out.source = "selected";
  }
  for (const auto& p : out.points) out.stars.push_back(p.star);
  return out;
}

json free_json(const FreeChoice& f) {
  json j{{"source", f.source}, {"stars", json::array()}};
  for (const auto& s : f.stars) j["stars"].push_back(fmt(s));
  if (!f.points.empty()) {
    j["points"] = json::array();
    for (const auto& p : f.points) j["points"].push_back(vec_json(p.v));
  }
  return j;
}

// ---- figures ---------------------------------------------------------------------------------

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", x);
  return buf;
}

/// Window sandwich as three layered bars (outer, inner, boundary) and, when given, the point set
/// as tick marks along the first direct coordinate.
std::string render_svg(const WindowApprox& w, const ProjectionResult* proj, double t) {
  const double width = 800, left = 40, right = 760;
  const double height = proj ? 200 : 120;
  double lo = 0, hi = 1;
  if (!w.outer.empty()) {
    lo = static_cast<double>(w.outer.intervals().front().lo);
    hi = static_cast<double>(w.outer.intervals().back().hi);
  }
  if (hi <= lo) hi = lo + 1;
  auto x_of = [&](double v) { return left + (v - lo) / (hi - lo) * (right - left); };
  std::ostringstream svg;
  svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << num(width) << "\" height=\""
      << num(height) << "\" viewBox=\"0 0 " << num(width) << " " << num(height) << "\">\n"
      << "<title>" << xml_escape(w.label) << " depth " << w.depth << "</title>\n"
      << "<rect x=\"0\" y=\"0\" width=\"" << num(width) << "\" height=\"" << num(height) << "\" fill=\"white\"/>\n";
  auto bars = [&](const IntervalSet& s, const char* id, double y, const char* colour) {
    svg << "<g id=\"" << id << "\" fill=\"" << colour << "\">\n";
    for (const auto& iv : s.intervals()) {
      const double a = x_of(static_cast<double>(iv.lo));
      const double b = std::max(x_of(static_cast<double>(iv.hi)), a + 0.5);
      svg << "<rect x=\"" << num(a) << "\" y=\"" << num(y) << "\" width=\"" << num(b - a) << "\" height=\"20\"/>\n";
    }
    svg << "</g>\n";
  };
  bars(w.outer, "outer", 10, "#9e9e9e");
  bars(w.inner, "inner", 40, "#212121");
  bars(w.boundary(), "boundary", 70, "#c62828");
  svg << "<text x=\"" << num(left) << "\" y=\"105\" font-size=\"10\">" << num(lo) << "</text>\n"
      << "<text x=\"" << num(right - 30) << "\" y=\"105\" font-size=\"10\">" << num(hi) << "</text>\n";
  if (proj) {
    const double span = t > 0 ? t : 1;
    auto px = [&](double v) { return left + (v + span) / (2 * span) * (right - left); };
    std::set<IntVec> certain;
    for (const auto& p : proj->inner.points) certain.insert(p.v);
    svg << "<line x1=\"" << num(left) << "\" y1=\"160\" x2=\"" << num(right) << "\" y2=\"160\" stroke=\"black\"/>\n"
        << "<g id=\"points\" stroke-width=\"1\">\n";
    for (const auto& p : proj->outer.points) {
      const double x = px(static_cast<double>(p.direct[0]));
      const bool in = certain.count(p.v) > 0;
      svg << "<line x1=\"" << num(x) << "\" y1=\"" << (in ? "145" : "152") << "\" x2=\"" << num(x)
          << "\" y2=\"175\" stroke=\"" << (in ? "#1565c0" : "#c62828") << "\"/>\n";
    }
    svg << "</g>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

// ---- subcommands -----------------------------------------------------------------------------

void cmd_scheme_validate(Run& run) {
  const CpsScheme cps = load_scheme(run);
  const auto& hr = cps.heuristics();
  json rec = meta(run, "cpsent.scheme/1");
  rec["scheme"] = cps;
  rec["detA"] = fmt(cps.det());
  rec["absDetA"] = fmt(cps.det_abs());
  rec["heuristics"] = {{"injectivityRadius", hr.injectivity_radius},
                       {"densityRadius", hr.density_radius},
                       {"minDirectNorm", fmt(hr.min_direct_norm)},
                       {"maxStarGap", fmt(hr.max_star_gap)}};
  std::cout << "detA " << fmt(cps.det()) << "\n";
  run.artifacts.push_back({"scheme", rec,
                           key_values({{"detA", fmt(cps.det())},
                                       {"absDetA", fmt(cps.det_abs())},
                                       {"injectivityRadius", std::to_string(hr.injectivity_radius)},
                                       {"densityRadius", std::to_string(hr.density_radius)},
                                       {"minDirectNorm", fmt(hr.min_direct_norm)},
                                       {"maxStarGap", fmt(hr.max_star_gap)}})});
}

json base_json(const DeterministicBase& base) {
  json j{{"kappa", base.kappa}, {"numbered", base.numbered}, {"intervals", json::array()}};
  for (const auto& bi : base.intervals) {
    j["intervals"].push_back({{"k", bi.k}, {"n", bi.n}, {"v", vec_json(bi.v)}, {"star", fmt(bi.star)},
                              {"eta", fmt(bi.eta)}, {"lo", fmt(bi.lo)}, {"hi", fmt(bi.hi)},
                              {"ratio", fmt_double(bi.ratio)}});
  }
  return j;
}

void cmd_window_build(Run& run) {
  const CpsScheme cps = load_scheme(run);
  const BuiltWindow b = load_window(run, cps);
  json rec = meta(run, "cpsent.window/1");
  rec["window"] = b.window;
  if (b.base) rec["base"] = base_json(*b.base);
  Table t{{"set", "lo", "hi", "loOpen", "hiOpen"}, {}};
  for (const auto* which : {"inner", "outer"}) {
    const IntervalSet& s = std::string(which) == "inner" ? b.window.inner : b.window.outer;
    for (const auto& iv : s.intervals()) {
      t.rows.push_back({which, fmt(iv.lo), fmt(iv.hi), iv.lo_open ? "1" : "0", iv.hi_open ? "1" : "0"});
    }
  }
  std::cout << b.window.label << " depth " << b.window.depth << " inner " << b.window.inner.size() << " outer "
            << b.window.outer.size() << "\n";
  run.artifacts.push_back({"window", rec, t});
}

void cmd_window_measure(Run& run) {
  const CpsScheme cps = load_scheme(run);
  const BuiltWindow b = load_window(run, cps);
  const std::string builder = run.config["window"]["builder"].get<std::string>();
  const int first = builder == "random" || builder == "explicit" ? 1 : 0;
  Table t{{"depth", "measInner", "measOuter", "gap"}, {}};
  json rows = json::array();
  timed(run, "measure", [&] {
    for (int d = first; d <= b.window.depth; ++d) {
      WindowApprox w;
      if (builder == "deterministic") {
        w = deterministic_window(*b.base, d);
      } else if (builder == "weak") {
        w = weak_window(*b.base, d, cantor_from(Node(run.config["window"], "/window").at("M")));
      } else if (d == b.window.depth) {
        w = b.window;
      } else {
        json cfg = run.config["window"];
        cfg["depth"] = d;
        if (!cfg.contains("seed") && b.selection) cfg["seed"] = b.seed;
        w = build_window(Node(cfg, "/window"), cps, run.root_seed).window;
      }
      t.rows.push_back({std::to_string(d), fmt(w.meas_inner), fmt(w.meas_outer), fmt(w.meas_outer - w.meas_inner)});
    }
  });
  json rec = meta(run, "cpsent.measure/1");
  rec["label"] = b.window.label;
  rec["measInner"] = fmt(b.window.meas_inner);
  rec["measOuter"] = fmt(b.window.meas_outer);
  if (b.cantor) rec["cantorLimit"] = fmt(b.cantor->limit_measure());
  std::cout << "measInner " << fmt(b.window.meas_inner) << " measOuter " << fmt(b.window.meas_outer) << "\n";
  run.artifacts.push_back({"measure", rec, t});
}

void cmd_window_properness(Run& run) {
  const CpsScheme cps = load_scheme(run);
  const BuiltWindow b = load_window(run, cps);
  if (!b.selection) Node(run.config["window"], "/window").at("builder").fail("properness needs a random or explicit builder");
  const PropernessReport r = timed(run, "properness", [&] { return properness_report(*b.cantor, *b.selection, b.window.depth); });
  json rec = meta(run, "cpsent.properness/1");
  rec["proper"] = r.proper;
  rec["endpoints"] = r.endpoints;
  rec["passing"] = r.passing;
  rec["fraction"] = fmt_double(r.fraction);
  rec["radius"] = fmt(r.radius);
  rec["minNearby"] = r.min_nearby;
  rec["meanNearby"] = fmt_double(r.mean_nearby);
  rec["failureBound"] = fmt_double(r.failure_bound);
  std::cout << (r.proper ? "proper" : "not proper") << " at depth " << r.depth << " (" << r.passing << "/"
            << r.endpoints << " endpoints)\n";
  run.artifacts.push_back({"properness", rec,
                           key_values({{"proper", r.proper ? "1" : "0"},
                                       {"endpoints", std::to_string(r.endpoints)},
                                       {"passing", std::to_string(r.passing)},
                                       {"fraction", fmt_double(r.fraction)},
                                       {"radius", fmt(r.radius)},
                                       {"minNearby", std::to_string(r.min_nearby)},
                                       {"meanNearby", fmt_double(r.mean_nearby)},
                                       {"failureBound", fmt_double(r.failure_bound)}})});
  if (!r.proper) run.exit_code = kInconclusive;
}

ProjectionResult project_points(Run& run, const CpsScheme& cps, const BuiltWindow& b, Real& t_used) {
  Section a(run.config, "analysis", "");
  const Real theta = a.real("theta", "0");
  t_used = a.reals("t", {"10"}).front();
  return timed(run, "project", [&] { return cut_and_project(cps, b.window, theta, t_used); });
}

void cmd_project(Run& run) {
  const CpsScheme cps = load_scheme(run);
  const BuiltWindow b = load_window(run, cps);
  Real t;
  const ProjectionResult p = project_points(run, cps, b, t);
  std::set<IntVec> certain;
  for (const auto& q : p.inner.points) certain.insert(q.v);
  Table tab{{"v"}, {}};
  for (int i = 0; i < cps.dim(); ++i) tab.columns.push_back("x" + std::to_string(i + 1));
  tab.columns.push_back("star");
  tab.columns.push_back("certain");
  for (const auto& q : p.outer.points) {
    std::vector<std::string> row{join_vec(q.v)};
    for (const auto& x : q.direct) row.push_back(fmt(x));
    row.push_back(fmt(q.star));
    row.push_back(certain.count(q.v) ? "1" : "0");
    tab.rows.push_back(std::move(row));
  }
  json rec = meta(run, "cpsent.project/1");
  rec["t"] = fmt(t);
  rec["countInner"] = p.inner.points.size();
  rec["countOuter"] = p.outer.points.size();
  rec["uncertain"] = p.uncertain;
  std::cout << "points " << p.inner.points.size() << " certain, " << p.outer.points.size() << " possible\n";
  run.artifacts.push_back({"project", rec, tab});
  if (!run.svg_name.empty()) run.svg = render_svg(b.window, &p, static_cast<double>(t));
}

void cmd_density(Run& run) {
  const CpsScheme cps = load_scheme(run);
  const BuiltWindow b = load_window(run, cps);
  Section a(run.config, "analysis", "");
  const Real theta = a.real("theta", "0");
  const std::vector<Real> ts = a.reals("t", {"100", "1000", "10000"});
  const auto rows = timed(run, "density", [&] { return density_estimate(cps, b.window, theta, ts); });
  Table tab{{"t", "countInner", "countOuter", "uncertain", "densInner", "densOuter", "targetLo", "targetHi"}, {}};
  for (const auto& r : rows) {
    tab.rows.push_back({fmt(r.t), std::to_string(r.count_inner), std::to_string(r.count_outer),
                        std::to_string(r.uncertain), fmt(r.dens_inner), fmt(r.dens_outer), fmt(r.target_lo),
                        fmt(r.target_hi)});
  }
  json rec = meta(run, "cpsent.density/1");
  rec["absDetA"] = fmt(cps.det_abs());
  const auto& last = rows.back();
  std::cout << "t " << fmt(last.t) << " density in [" << format_real(last.dens_inner, 8) << ", "
            << format_real(last.dens_outer, 8) << "] target [" << format_real(last.target_lo, 8) << ", "
            << format_real(last.target_hi, 8) << "]\n";
  run.artifacts.push_back({"density", rec, tab});
}

void cmd_independence(Run& run, bool metric) {
  const CpsScheme cps = load_scheme(run);
  const BuiltWindow b = load_window(run, cps);
  Section a(run.config, "analysis", "");
  const Real h = a.real("h", b.base ? "0" : "0.1");
  const FreeChoice f = choose_free(run, cps, b, h, 3, true);
  json rec = meta(run, metric ? "cpsent.independence.metric/1" : "cpsent.independence.top/1");
  rec["free"] = free_json(f);
  bool ok = false;
  Table tab;
  if (metric) {
    const int copy_depth = static_cast<int>(a.integer("copyDepth", 10));
    const MetricReport r = timed(run, "metric", [&] { return metric_independence_check(b.window, h, f.stars, copy_depth); });
    tab.columns = {"pattern", "innerMeasure", "copyBound", "lowerBound", "positive"};
    for (const auto& p : r.patterns) {
      tab.rows.push_back({pattern_string(p.bits), fmt(p.inner_measure), fmt(p.copy_bound), fmt(p.lower_bound),
                          p.positive ? "1" : "0"});
    }
    ok = r.independent;
  } else {
    const int levels = static_cast<int>(a.integer("levels", 5));
    const Rational start = a.rational("start", "1");
    const TopologicalReport r =
        timed(run, "topological", [&] { return topological_independence_check(b.window, h, f.stars, levels, start); });
    tab.columns = {"pattern", "complete", "failedLevel", "level", "lo", "hi"};
    for (const auto& p : r.patterns) {
      if (p.levels.empty()) {
        tab.rows.push_back({pattern_string(p.bits), p.complete ? "1" : "0", std::to_string(p.failed_level), "", "", ""});
      }
      for (std::size_t j = 0; j < p.levels.size(); ++j) {
        tab.rows.push_back({pattern_string(p.bits), p.complete ? "1" : "0", std::to_string(p.failed_level),
                            std::to_string(j + 1), fmt(p.levels[j].lo), fmt(p.levels[j].hi)});
      }
    }
    ok = r.independent;
  }
  rec["independent"] = ok;
  std::cout << (ok ? "independent" : "not certified") << " on " << f.stars.size() << " free points\n";
  run.artifacts.push_back({metric ? "independence_metric" : "independence_top", rec, tab});
  if (!ok) run.exit_code = kInconclusive;
}

void cmd_witness(Run& run) {
  const CpsScheme cps = load_scheme(run);
  const BuiltWindow b = load_window(run, cps);
  Section a(run.config, "analysis", "");
  const Real h = a.real("h", "0.1");
  const Real theta = a.real("theta", "0");
  const Real radius = a.real("radius", "1000");
  const FreeChoice f = choose_free(run, cps, b, h, 4, false);
  std::vector<std::vector<int>> patterns;
  if (a.has("pattern")) {
    const std::string bits = a.node("pattern").str();
    if (bits.size() != f.points.size() || bits.find_first_not_of("01") != std::string::npos) {
      a.node("pattern").fail("must be a 0/1 word with one letter per free point");
    }
    std::vector<int> p;
    for (char c : bits) p.push_back(c - '0');
    patterns.push_back(p);
  } else {
    for (std::uint64_t code = 0; code < (std::uint64_t{1} << f.points.size()); ++code) {
      patterns.push_back(pattern_bits(code, f.points.size()));
    }
  }
  Table tab{{"pattern", "status", "m", "mbarStar", "verified", "candidates"}, {}};
  std::size_t found = 0;
  timed(run, "witness", [&] {
    for (const auto& bits : patterns) {
      const PatternQuery q{f.points, bits, h, theta};
      const WitnessResult r = fullshift_witness(cps, b.window, q, radius);
      const bool hit = r.status == WitnessStatus::Found;
      if (hit && !r.verified) {
        throw Error("WitnessUnverified", "witness for " + pattern_string(bits) + " failed its recheck",
                    ErrorCategory::Invariant);
      }
      found += hit;
      tab.rows.push_back({pattern_string(bits), to_string(r.status), hit ? join_vec(r.m.v) : "",
                          hit ? fmt(r.mbar_star) : "", r.verified ? "1" : "0", std::to_string(r.candidates)});
    }
  });
  json rec = meta(run, "cpsent.witness/1");
  rec["free"] = free_json(f);
  rec["found"] = found;
  rec["patterns"] = patterns.size();
  std::cout << found << "/" << patterns.size() << " patterns realized within radius " << fmt(radius) << "\n";
  run.artifacts.push_back({"witness", rec, tab});
  if (found < patterns.size()) run.exit_code = kInconclusive;
}

void cmd_entropy(Run& run) {
  const CpsScheme cps = load_scheme(run);
  const BuiltWindow b = load_window(run, cps);
  Section a(run.config, "analysis", "");
  const Real h = a.real("h", "0.1");
  const Real theta = a.real("theta", "0");
  const Real radius = a.real("radius", "10000");
  const std::vector<Real> ts = a.reals("t", {"1", "2", "3"});
  const FreePointSet s = load_free_points(run, cps, b, h);
  const EntropyReport r = timed(run, "entropy", [&] {
    return entropy_lower_estimate(cps, b.window, theta, h, s, ts, radius, b.cantor->limit_measure());
  });
  Table tab{{"t", "freeInCube", "realized", "coverage", "lowerBoundNats", "lowerBoundBits", "targetNats",
             "referenceNats"},
            {}};
  for (const auto& row : r.rows) {
    tab.rows.push_back({fmt(row.t), std::to_string(row.free_in_cube), std::to_string(row.realized),
                        fmt_double(row.coverage), fmt_double(row.lower_bound_nats), fmt_double(row.lower_bound_bits),
                        fmt_double(row.target_nats), fmt_double(row.reference_nats)});
  }
  json rec = meta(run, "cpsent.entropy/1");
  rec["nuS"] = fmt(s.density);
  rec["translates"] = r.translates;
  rec["separation"] = fmt(r.separation);
  if (a.has("r")) {
    const Real res = a.real("r", "0.01");
    const auto samples = static_cast<std::size_t>(a.integer("samples", 2000));
    const SeparatedCount sc =
        timed(run, "separated", [&] { return separated_count(cps, b.window, theta, res, ts.back(), samples); });
    rec["separated"] = {{"r", fmt(sc.r)}, {"t", fmt(sc.t)}, {"observed", sc.observed},
                        {"samples", sc.samples}, {"hEps", fmt_double(sc.h_eps)}};
  }
  for (const auto& row : r.rows) {
    std::cout << "t " << format_real(row.t, 6) << " realized " << row.realized << " lowerBound "
              << fmt_double(row.lower_bound_nats) << "\n";
  }
  run.artifacts.push_back({"entropy", rec, tab});
}

void cmd_generic(Run& run) {
  const CpsScheme cps = load_scheme(run);
  const BuiltWindow b = load_window(run, cps);
  Section a(run.config, "analysis", "");
  const Real h = a.real("h", "0.1");
  const Real radius = a.real("radius", "10000");
  const Real tol = a.real("tol", "1e-6");
  const GenericityReport r = timed(run, "generic", [&] { return genericity_check(cps, b.window, h, radius, tol); });
  json rec = meta(run, "cpsent.generic/1");
  rec["verdict"] = to_string(r.verdict);
  rec["minDistance"] = fmt(r.min_distance);
  rec["scanned"] = r.scanned;
  rec["uncertain"] = r.uncertain;
  std::vector<std::pair<std::string, std::string>> kv{{"verdict", to_string(r.verdict)},
                                                      {"minDistance", fmt(r.min_distance)},
                                                      {"scanned", std::to_string(r.scanned)},
                                                      {"uncertain", std::to_string(r.uncertain)}};
  if (r.witness) {
    rec["witness"] = {{"v", vec_json(r.witness->v)}, {"star", fmt(r.witness->star)}};
    kv.emplace_back("witness", join_vec(r.witness->v));
    kv.emplace_back("witnessStar", fmt(r.witness->star));
  }
  std::cout << to_string(r.verdict) << "\n";
  run.artifacts.push_back({"generic", rec, key_values(kv)});
  if (r.verdict == Genericity::Uncertain) run.exit_code = kInconclusive;
}

void cmd_ergodicity(Run& run) {
  const CpsScheme cps = load_scheme(run);
  const BuiltWindow b = load_window(run, cps);
  Section a(run.config, "analysis", "");
  const Real h = a.real("h", "0.1");
  const Real theta = a.real("theta", "0");
  const Real radius = a.real("radius", "10000");
  const Real t = a.reals("t", {"3"}).back();
  const Real margin = a.real("margin", "0.01");
  const Real nu_u = a.has("nuU") ? a.real("nuU", "0") : Real(1) / cps.det_abs();
  const FreePointSet s = load_free_points(run, cps, b, h);
  const ErgodicityReport r = timed(run, "ergodicity", [&] {
    return unique_ergodicity_diagnostic(cps, b.window, theta, h, s, t, radius, nu_u, margin);
  });
  json rec = meta(run, "cpsent.ergodicity/1");
  rec["verdict"] = to_string(r.verdict);
  rec["nuS"] = fmt(r.nu_s);
  rec["nuU"] = fmt(r.nu_u);
  rec["freeInCube"] = r.free_in_cube;
  rec["onesCount"] = r.ones_count;
  rec["zerosCount"] = r.zeros_count;
  std::vector<std::pair<std::string, std::string>> kv{{"verdict", to_string(r.verdict)},
                                                      {"nuS", fmt(r.nu_s)},
                                                      {"nuU", fmt(r.nu_u)},
                                                      {"t", fmt(t)},
                                                      {"freeInCube", std::to_string(r.free_in_cube)},
                                                      {"onesCount", std::to_string(r.ones_count)},
                                                      {"zerosCount", std::to_string(r.zeros_count)}};
  for (const auto& [name, w] : {std::pair{"allOnes", &r.all_ones}, std::pair{"allZeros", &r.all_zeros}}) {
    if (!*w) continue;
    rec[name] = {{"status", to_string((*w)->status)}};
    kv.emplace_back(std::string(name) + "Status", to_string((*w)->status));
    if ((*w)->status == WitnessStatus::Found) {
      rec[name]["m"] = vec_json((*w)->m.v);
      kv.emplace_back(std::string(name) + "M", join_vec((*w)->m.v));
    }
  }
  std::cout << to_string(r.verdict) << " nuS " << format_real(r.nu_s, 8) << " nuU " << format_real(r.nu_u, 8)
            << " ones " << r.ones_count << " zeros " << r.zeros_count << " of " << r.free_in_cube << "\n";
  run.artifacts.push_back({"ergodicity", rec, key_values(kv)});
  if (r.verdict == ErgodicityVerdict::Inconclusive) run.exit_code = kInconclusive;
}

void cmd_render(Run& run) {
  const CpsScheme cps = load_scheme(run);
  const BuiltWindow b = load_window(run, cps);
  Real t;
  const ProjectionResult p = project_points(run, cps, b, t);
  if (run.svg_name.empty()) run.svg_name = "render.svg";
  run.svg = timed(run, "render", [&] { return render_svg(b.window, &p, static_cast<double>(t)); });
  json rec = meta(run, "cpsent.render/1");
  rec["svg"] = run.svg_name;
  rec["bars"] = {{"outer", b.window.outer.size()}, {"inner", b.window.inner.size()}};
  rec["ticks"] = p.outer.points.size();
  std::cout << "wrote " << run.svg_name << "\n";
  run.artifacts.push_back({"render", rec, key_values({{"svg", run.svg_name},
                                                      {"outerBars", std::to_string(b.window.outer.size())},
                                                      {"innerBars", std::to_string(b.window.inner.size())},
                                                      {"ticks", std::to_string(p.outer.points.size())}})});
}

const std::map<std::string, std::function<void(Run&)>>& commands() {
  static const std::map<std::string, std::function<void(Run&)>> table{
      {"scheme validate", cmd_scheme_validate},
      {"window build", cmd_window_build},
      {"window measure", cmd_window_measure},
      {"window properness", cmd_window_properness},
      {"project", cmd_project},
      {"density", cmd_density},
      {"independence top", [](Run& r) { cmd_independence(r, false); }},
      {"independence metric", [](Run& r) { cmd_independence(r, true); }},
      {"witness", cmd_witness},
      {"entropy", cmd_entropy},
      {"generic", cmd_generic},
      {"ergodicity", cmd_ergodicity},
      {"render", cmd_render},
  };
  return table;
}

// ---- artifacts and manifest ------------------------------------------------------------------

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
  return q + "\"";
}

std::string render_artifact(const Artifact& a, const std::string& format) {
  std::ostringstream os;
  if (format == "csv") {
    os << "# manifest=" << kManifestName << " schema=" << a.record.value("schema", "") << "\n";
    for (std::size_t i = 0; i < a.table.columns.size(); ++i) os << (i ? "," : "") << csv_field(a.table.columns[i]);
    os << "\n";
    for (const auto& row : a.table.rows) {
      for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << csv_field(row[i]);
      os << "\n";
    }
  } else {
    json j = a.record;
    j["rows"] = json::array();
    for (const auto& row : a.table.rows) {
      json r = json::object();
      for (std::size_t i = 0; i < row.size(); ++i) r[a.table.columns[i]] = row[i];
      j["rows"].push_back(std::move(r));
    }
    os << j.dump(2) << "\n";
  }
  return os.str();
}

void write_file(const fs::path& p, const std::string& bytes) {
  std::ofstream f(p, std::ios::binary);
  if (!f) throw Error("Io", "cannot write " + p.string());
  f << bytes;
}

json registry(const Run& run) {
  json r = json::object();
  if (run.config.contains("window") && run.config["window"].contains("depth")) r["depth"] = run.config["window"]["depth"];
  if (run.config.contains("analysis")) {
    const json& a = run.config["analysis"];
    for (const char* key : {"radius", "tol", "margin", "t", "minMeasure"}) {
      if (a.contains(key)) r[key] = a[key];
    }
    if (a.contains("free")) r["free"] = a["free"];
  }
  r["membershipEps"] = fmt(kMembershipEps);
  return r;
}

json write_outputs(Run& run, const std::vector<std::string>& argv) {
  fs::create_directories(run.out);
  json digests = json::array();
  for (const auto& a : run.artifacts) {
    const std::string name = a.stem + (run.format == "csv" ? ".csv" : ".json");
    const std::string bytes = render_artifact(a, run.format);
    write_file(run.out / name, bytes);
    digests.push_back({{"path", name}, {"fnv1a64", hex64(fnv1a64(bytes))}});
  }
  if (!run.svg_name.empty() && !run.svg.empty()) {
    write_file(run.out / run.svg_name, run.svg);
    digests.push_back({{"path", run.svg_name}, {"fnv1a64", hex64(fnv1a64(run.svg))}});
  }
  json seeds = run.seeds;
  seeds["root"] = run.root_seed;
  json manifest{{"schema", "cpsent.manifest/1"},
                {"tool", {{"name", "cpsent"}, {"version", kVersion}}},
                {"argv", argv},
                {"command", run.command},
                {"format", run.format},
                {"svg", run.svg_name},
                {"config", run.config},
                {"configDigest", hex64(fnv1a64(run.config.dump()))},
                {"seeds", seeds},
                {"registry", registry(run)},
                {"artifacts", digests},
                {"timings", run.timings},
                {"exitCode", run.exit_code}};
  write_file(run.out / kManifestName, manifest.dump(2) + "\n");
  return manifest;
}

json read_json(const fs::path& p, const std::string& what) {
  std::ifstream f(p);
  if (!f) throw Error("Io", "cannot open " + what + " " + p.string());
  try {
    return json::parse(f);
  } catch (const json::parse_error& e) {
    throw Error("Schema", what + " " + p.string() + " is not valid JSON: " + e.what());
  }
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) throw Error("Usage", "empty entry in list '" + s + "'");
    out.push_back(item);
  }
  return out;
}

int exit_for(const Error& e) {
  switch (e.category()) {
    case ErrorCategory::Usage:
      return kUsage;
    case ErrorCategory::Inconclusive:
      return kInconclusive;
    case ErrorCategory::Invariant:
      return kInvariant;
  }
  return kInvariant;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cut-and-project sets with Cantor-type windows", "cpsent"};
  app.set_version_flag("--version", kVersion);
  app.fallthrough();
  app.require_subcommand(0, 1);

  std::string config_path, out_dir, replay_path, svg_path, radius, t_list, format = "json";
  std::optional<std::uint64_t> seed;
  std::optional<int> depth;
  app.add_option("--config", config_path, "JSON run configuration")->check(CLI::ExistingFile);
  app.add_option("--out", out_dir, "directory for artifacts and the manifest");
  app.add_option("--seed", seed, "root seed, overrides /seed");
  app.add_option("--depth", depth, "window depth, overrides /window/depth");
  app.add_option("--radius", radius, "search radius, overrides /analysis/radius");
  app.add_option("--t", t_list, "cube radii, comma separated, overrides /analysis/t");
  app.add_option("--replay", replay_path, "rerun a manifest and compare artifact digests")->check(CLI::ExistingFile);
  app.add_option("--format", format, "artifact format")->check(CLI::IsMember({"json", "csv"}));
  app.add_option("--svg", svg_path, "also draw the window (and points) to this SVG file");

  std::map<CLI::App*, std::string> paths;
  auto leaf = [&](CLI::App* parent, const std::string& name, const std::string& help, const std::string& path) {
    paths[parent->add_subcommand(name, help)] = path;
  };
  auto* scheme = app.add_subcommand("scheme", "cut-and-project scheme")->require_subcommand(1);
  leaf(scheme, "validate", "check the scheme and print det A", "scheme validate");
  auto* window = app.add_subcommand("window", "window builders")->require_subcommand(1);
  leaf(window, "build", "build the finite-depth sandwich", "window build");
  leaf(window, "measure", "exact measures at every depth", "window measure");
  leaf(window, "properness", "properness of a random window", "window properness");
  leaf(&app, "project", "cut and project inside the cube C_t", "project");
  leaf(&app, "density", "density estimates for the configured t", "density");
  auto* indep = app.add_subcommand("independence", "independence checks")->require_subcommand(1);
  leaf(indep, "top", "topological independence", "independence top");
  leaf(indep, "metric", "exact metric independence", "independence metric");
  leaf(&app, "witness", "fullshift witnesses for every pattern", "witness");
  leaf(&app, "entropy", "certified entropy lower bounds", "entropy");
  leaf(&app, "generic", "genericity of the shifted window", "generic");
  leaf(&app, "ergodicity", "unique ergodicity diagnostic", "ergodicity");
  leaf(&app, "render", "SVG of the window sandwich and point set", "render");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  const std::vector<std::string> args(argv, argv + argc);
  Run run;
  json previous;
  try {
    std::string path;
    for (const auto& [sub, name] : paths) {
      if (sub->parsed()) path = name;
    }
    if (!replay_path.empty()) {
      if (!config_path.empty() || seed || depth || !radius.empty() || !t_list.empty()) {
        throw Error("Usage", "--replay takes its configuration from the manifest; only --out may be given");
      }
      previous = read_json(replay_path, "manifest");
      const Node m(previous, "");
      if (m.at("schema").str() != "cpsent.manifest/1") m.at("schema").fail("not a cpsent manifest");
      for (std::size_t i = 0; i < m.at("command").size(); ++i) {
        run.command.push_back(m.at("command").at(i).str());
      }
      std::string replayed;
      for (const auto& part : run.command) replayed += (replayed.empty() ? "" : " ") + part;
      if (!path.empty() && path != replayed) throw Error("Usage", "manifest records '" + replayed + "', not '" + path + "'");
      path = replayed;
      run.config = m.at("config").raw();
      run.format = m.at("format").str();
      run.svg_name = m.at("svg").str();
      run.out = out_dir.empty() ? fs::path(replay_path).parent_path() / "replay" : fs::path(out_dir);
    } else {
      if (path.empty()) throw Error("Usage", "no subcommand given (see --help)");
      std::stringstream ss(path);
      for (std::string part; ss >> part;) run.command.push_back(part);
      run.config = config_path.empty() ? json::object() : read_json(config_path, "config");
      if (!run.config.is_object()) Node(run.config, "").fail("config must be a JSON object");
      if (seed) run.config["seed"] = *seed;
      if (depth) run.config["window"]["depth"] = *depth;
      if (!radius.empty()) run.config["analysis"]["radius"] = radius;
      if (!t_list.empty()) run.config["analysis"]["t"] = split_list(t_list);
      run.format = format;
      run.svg_name = svg_path.empty() ? "" : fs::path(svg_path).filename().string();
      run.out = out_dir.empty() ? fs::path("cpsent-out") : fs::path(out_dir);
      if (!svg_path.empty() && fs::path(svg_path).has_parent_path()) run.out = fs::path(svg_path).parent_path();
      if (!svg_path.empty() && !out_dir.empty()) run.out = out_dir;
    }
    const auto it = commands().find(path);
    if (it == commands().end()) throw Error("Usage", "unknown command '" + path + "'");
    const Node root(run.config, "");
    run.root_seed = run.config.contains("seed") ? root.at("seed").u64() : 0;
    if (!run.config.contains("seed")) run.config["seed"] = 0;

    it->second(run);
    if (!run.svg_name.empty() && run.svg.empty() && run.config.contains("window")) {
      const CpsScheme cps = scheme_from(root.at("scheme"));
      run.svg = render_svg(build_window(root.at("window"), cps, run.root_seed).window, nullptr, 0);
    }
    const json manifest = write_outputs(run, args);

    if (!previous.is_null()) {
      std::map<std::string, std::string> before;
      for (const auto& a : previous.at("artifacts")) before[a.at("path")] = a.at("fnv1a64");
      std::size_t mismatched = 0;
      for (const auto& a : manifest.at("artifacts")) {
        const auto b = before.find(a.at("path").get<std::string>());
        if (b == before.end() || b->second != a.at("fnv1a64").get<std::string>()) {
          std::cerr << "replay mismatch: " << a.at("path").get<std::string>() << "\n";
          ++mismatched;
        }
      }
      if (mismatched > 0 || before.size() != manifest.at("artifacts").size()) {
        std::cerr << "replay differs from " << replay_path << "\n";
        return kInvariant;
      }
      std::cout << "replay matches " << before.size() << " artifacts\n";
    }
    return run.exit_code;
  } catch (const Error& e) {
    std::cerr << "error [" << e.code() << "] " << e.what() << "\n";
    return exit_for(e);
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kInvariant;
  }
}
