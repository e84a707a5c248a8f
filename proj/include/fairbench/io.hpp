#pragma once

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "fairbench/graph.hpp"

namespace fairbench {

/// Graph plus labels as read from disk. `original_ids[i]` is the id node i
/// carried in the input files; it is the identity when ids were already dense.
struct LoadedGraph {
  Graph graph;
  SensitiveLabels labels;
  std::vector<std::uint64_t> original_ids;

  bool identity_ids() const {
    for (std::size_t i = 0; i < original_ids.size(); ++i) {
      if (original_ids[i] != i) return false;
    }
    return true;
  }
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

inline bool parse_u64(std::string_view s, std::uint64_t& out) {
  s = trim(s);
  if (s.empty()) return false;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

/// Reads "a,b" integer pairs; blank lines are skipped.
inline std::vector<std::pair<std::uint64_t, std::uint64_t>> read_pairs(std::istream& in, const std::string& what) {
  std::vector<std::pair<std::uint64_t, std::uint64_t>> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view sv = trim(line);
    if (sv.empty()) continue;
    auto comma = sv.find(',');
    std::uint64_t a = 0, b = 0;
    if (comma == std::string_view::npos || !parse_u64(sv.substr(0, comma), a) ||
        !parse_u64(sv.substr(comma + 1), b)) {
      throw InputError(what + ": malformed line " + std::to_string(lineno) + ": '" + line + "'");
    }
    out.emplace_back(a, b);
  }
  return out;
}

}  // namespace detail

/// Parses an edge stream and a label stream. The label stream defines the node
/// set; every edge endpoint must have a label.
inline LoadedGraph read_graph(std::istream& edge_in, std::istream& label_in) {
  auto label_rows = detail::read_pairs(label_in, "label file");
  auto edge_rows = detail::read_pairs(edge_in, "edge file");

  std::map<std::uint64_t, std::uint64_t> label_of;
  std::size_t lineno = 0;
  for (auto [node, s] : label_rows) {
    ++lineno;
    if (s > 1) {
      throw InputError("label file: node " + std::to_string(node) + " has label " + std::to_string(s) +
                       " outside {0,1}");
    }
    if (!label_of.emplace(node, s).second) {
      throw InputError("label file: node " + std::to_string(node) + " listed twice");
    }
  }
  lineno = 0;
  for (auto [u, v] : edge_rows) {
    ++lineno;
    for (auto x : {u, v}) {
      if (!label_of.count(x)) throw InputError("label missing for node " + std::to_string(x));
    }
    if (u == v) throw InputError("edge file: self-loop on line " + std::to_string(lineno));
  }

  LoadedGraph out;
  std::map<std::uint64_t, node_t> index;
  std::vector<std::uint8_t> s;
  for (auto [id, lab] : label_of) {
    index.emplace(id, static_cast<node_t>(out.original_ids.size()));
    out.original_ids.push_back(id);
    s.push_back(static_cast<std::uint8_t>(lab));
  }
  std::vector<Edge> edges;
  edges.reserve(edge_rows.size());
  for (auto [u, v] : edge_rows) edges.emplace_back(index.at(u), index.at(v));
  out.graph = Graph::from_edges(out.original_ids.size(), edges);
  out.labels = SensitiveLabels(std::move(s));
  return out;
}

inline LoadedGraph load_graph(const std::filesystem::path& edge_file, const std::filesystem::path& label_file) {
  std::ifstream e(edge_file), l(label_file);
  if (!e) throw InputError("cannot open edge file " + edge_file.string());
  if (!l) throw InputError("cannot open label file " + label_file.string());
  return read_graph(e, l);
}

inline void write_edges(std::ostream& out, const Graph& g) {
  for (auto [u, v] : g.edges()) out << u << ',' << v << '\n';
}

inline void write_labels(std::ostream& out, const SensitiveLabels& s) {
  for (std::size_t i = 0; i < s.size(); ++i) out << i << ',' << int(s[static_cast<node_t>(i)]) << '\n';
}

/// Canonical form: one "u,v" per edge with u < v in sorted order, labels by node id.
inline void save_graph(const Graph& g, const SensitiveLabels& s, const std::filesystem::path& edge_file,
                       const std::filesystem::path& label_file) {
  std::ofstream e(edge_file, std::ios::binary), l(label_file, std::ios::binary);
  if (!e) throw InputError("cannot write " + edge_file.string());
  if (!l) throw InputError("cannot write " + label_file.string());
  write_edges(e, g);
  write_labels(l, s);
}

/// "dense_id,original_id" per line.
inline void save_id_map(const LoadedGraph& lg, const std::filesystem::path& file) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw InputError("cannot write " + file.string());
  for (std::size_t i = 0; i < lg.original_ids.size(); ++i) out << i << ',' << lg.original_ids[i] << '\n';
}

}  // namespace fairbench
