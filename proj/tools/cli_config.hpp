#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "cpsent/analysis.hpp"
#include "cpsent/window_builders.hpp"

namespace cpsent::cli {

using nlohmann::json;

/// Reads typed values out of a JSON document and reports violations with their JSON pointer.
class Node {
 public:
  Node(const json& j, std::string pointer) : j_(&j), pointer_(std::move(pointer)) {}

  bool has(const std::string& key) const { return j_->is_object() && j_->contains(key); }
  Node at(const std::string& key) const;
  Node at(std::size_t index) const;
  std::size_t size() const { return j_->size(); }
  const json& raw() const { return *j_; }
  const std::string& pointer() const { return pointer_; }

  std::string str() const;
  std::int64_t integer() const;
  std::uint64_t u64() const;
  Real real() const;
  Rational rational() const;
  bool boolean() const;
  std::vector<Real> real_list() const;

  [[noreturn]] void fail(const std::string& what) const;

 private:
  const json* j_;
  std::string pointer_;
};

/// Run parameters after merging the config file with command-line overrides.
struct Settings {
  json config;  // fully resolved, written into the manifest
  std::uint64_t root_seed = 0;
};

CpsScheme scheme_from(const Node& n);
CantorScheme cantor_from(const Node& n);

struct BuiltWindow {
  WindowApprox window;
  std::optional<CantorScheme> cantor;        // the underlying Cantor scheme when there is one
  std::optional<GapSelection> selection;     // random and explicit builders
  std::optional<DeterministicBase> base;     // deterministic and weak builders
  std::uint64_t seed = 0;
};

/// Builds the window described by /window. Unknown builders are schema errors.
BuiltWindow build_window(const Node& n, const CpsScheme& cps, std::uint64_t root_seed);

std::uint64_t fnv1a64(const std::string& bytes);
std::string hex64(std::uint64_t x);

}  // namespace cpsent::cli
