#pragma once

#include <charconv>
#include <cstdint>
#include <fstream>
#include <istream>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "fairbench/embedding.hpp"
#include "fairbench/format.hpp"
#include "fairbench/generator.hpp"
#include "fairbench/io.hpp"

namespace fairbench {

struct ConfigEntry {
  std::string key;
  std::string value;
  std::size_t line = 0;
};

/// "key = value" lines; '#' starts a comment; blank lines ignored; duplicate keys rejected.
inline std::vector<ConfigEntry> parse_key_values(std::istream& in) {
  std::vector<ConfigEntry> out;
  std::map<std::string, std::size_t> seen;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view sv = line;
    if (auto hash = sv.find('#'); hash != std::string_view::npos) sv = sv.substr(0, hash);
    sv = detail::trim(sv);
    if (sv.empty()) continue;
    auto eq = sv.find('=');
    if (eq == std::string_view::npos) {
      throw InputError("config line " + std::to_string(lineno) + ": expected 'key = value'");
    }
    ConfigEntry e{std::string(detail::trim(sv.substr(0, eq))), std::string(detail::trim(sv.substr(eq + 1))), lineno};
    if (e.key.empty()) throw InputError("config line " + std::to_string(lineno) + ": empty key");
    if (auto [it, fresh] = seen.emplace(e.key, lineno); !fresh) {
      throw InputError("config line " + std::to_string(lineno) + ": duplicate key '" + e.key + "' (first on line " +
                       std::to_string(it->second) + ")");
    }
    out.push_back(std::move(e));
  }
  return out;
}

inline std::vector<ConfigEntry> read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open config file " + path);
  return parse_key_values(in);
}

namespace detail {

[[noreturn]] inline void bad_value(const ConfigEntry& e, std::string_view expected) {
  throw InputError("config line " + std::to_string(e.line) + ": '" + e.key + "' expects " + std::string(expected) +
                   ", got '" + e.value + "'");
}

inline double to_double(const ConfigEntry& e) {
  double x = 0.0;
  auto [ptr, ec] = std::from_chars(e.value.data(), e.value.data() + e.value.size(), x);
  if (ec != std::errc() || ptr != e.value.data() + e.value.size()) bad_value(e, "a number");
  return x;
}

inline std::uint64_t to_u64(const ConfigEntry& e) {
  std::uint64_t x = 0;
  if (!parse_u64(e.value, x)) bad_value(e, "a non-negative integer");
  return x;
}

inline bool to_bool(const ConfigEntry& e) {
  if (e.value == "true" || e.value == "1" || e.value == "yes") return true;
  if (e.value == "false" || e.value == "0" || e.value == "no") return false;
  bad_value(e, "true | false");
}

inline std::vector<double> to_doubles(const ConfigEntry& e) {
  std::vector<double> out;
  if (e.value.empty()) return out;
  for (auto& part : split(e.value, ',')) {
    ConfigEntry item{e.key, std::string(trim(part)), e.line};
    out.push_back(to_double(item));
  }
  return out;
}

inline std::vector<std::string> to_strings(const ConfigEntry& e) {
  std::vector<std::string> out;
  if (e.value.empty()) return out;
  for (auto& part : split(e.value, ',')) out.emplace_back(trim(part));
  return out;
}

}  // namespace detail

/// Applies one generation key; returns false if the key is not a generation key.
/// The edge-count law parameters (gamma, affine_a, affine_b) follow the law
/// currently selected, so `edge_count_law` should precede them.
inline bool apply_gen_key(GenConfig& c, const ConfigEntry& e) {
  const auto& k = e.key;
  if (k == "preset") {
    auto seed = c.seed;
    c = preset(parse_use_case(e.value));
    c.seed = seed;
  } else if (k == "n") {
    c.n = detail::to_u64(e);
  } else if (k == "m") {
    c.m = detail::to_u64(e);
  } else if (k == "alpha") {
    c.alpha = detail::to_double(e);
  } else if (k == "beta") {
    c.beta = detail::to_double(e);
  } else if (k == "anchor") {
    c.anchor = detail::to_bool(e);
  } else if (k == "homophily_scope") {
    if (e.value == "all_connections") c.homophily_scope = HomophilyScope::kAllConnections;
    else if (e.value == "anchor_only") c.homophily_scope = HomophilyScope::kAnchorOnly;
    else detail::bad_value(e, "all_connections | anchor_only");
  } else if (k == "hop_weights") {
    c.hop_weights = detail::to_doubles(e);
  } else if (k == "edge_count_law") {
    if (e.value == "gamma") c.edge_count_law = GammaLaw{};
    else if (e.value == "affine") c.edge_count_law = AffineLaw{};
    else if (e.value == "fixed") c.edge_count_law = FixedLaw{};
    else detail::bad_value(e, "gamma | affine | fixed");
  } else if (k == "gamma") {
    auto* g = std::get_if<GammaLaw>(&c.edge_count_law);
    if (!g) detail::bad_value(e, "edge_count_law = gamma first");
    g->shape = detail::to_double(e);
  } else if (k == "affine_a" || k == "affine_b") {
    auto* a = std::get_if<AffineLaw>(&c.edge_count_law);
    if (!a) detail::bad_value(e, "edge_count_law = affine first");
    (k == "affine_a" ? a->a : a->b) = detail::to_double(e);
  } else if (k == "seed") {
    c.seed = detail::to_u64(e);
  } else {
    return false;
  }
  return true;
}

/// Applies one model hyperparameter key; returns false for unknown keys.
inline bool apply_model_key(ModelSpec& m, const ConfigEntry& e) {
  const auto& k = e.key;
  if (k == "dim") m.dim = detail::to_u64(e);
  else if (k == "walks_per_node") m.walk.walks_per_node = detail::to_u64(e);
  else if (k == "walk_length") m.walk.walk_length = detail::to_u64(e);
  else if (k == "n2v_p") m.walk.p = detail::to_double(e);
  else if (k == "n2v_q") m.walk.q = detail::to_double(e);
  else if (k == "window") m.skipgram.window = detail::to_u64(e);
  else if (k == "negatives") m.skipgram.negatives = detail::to_u64(e);
  else if (k == "epochs") m.skipgram.epochs = detail::to_u64(e);
  else if (k == "learning_rate") m.skipgram.learning_rate = detail::to_double(e);
  else if (k == "cw_alpha") m.crosswalk.alpha = detail::to_double(e);
  else if (k == "cw_exponent") m.crosswalk.exponent = detail::to_double(e);
  else if (k == "cw_walks") m.crosswalk.probe_walks = detail::to_u64(e);
  else if (k == "cw_length") m.crosswalk.probe_length = detail::to_u64(e);
  else if (k == "nmf_max_iter") m.nmf.max_iter = detail::to_u64(e);
  else if (k == "nmf_tol") m.nmf.tolerance = detail::to_double(e);
  else return false;
  return true;
}

inline GenConfig gen_config_from(const std::vector<ConfigEntry>& entries, GenConfig base = {}) {
  // preset goes first so explicit keys override it regardless of file order
  for (const auto& e : entries) {
    if (e.key == "preset") apply_gen_key(base, e);
  }
  for (const auto& e : entries) {
    if (e.key == "preset") continue;
    if (!apply_gen_key(base, e)) {
      throw InputError("config line " + std::to_string(e.line) + ": unknown key '" + e.key + "'");
    }
  }
  return base;
}

}  // namespace fairbench
