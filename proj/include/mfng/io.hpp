#pragma once

#include <cerrno>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "mfng/errors.hpp"
#include "mfng/graph.hpp"
#include "mfng/measure.hpp"

namespace mfng::io {

inline constexpr int kMeasureSchemaVersion = 1;

/// Pairs in file order, plus the node count from a SNAP "# Nodes: N" header if present.
struct EdgeListData {
  std::vector<std::pair<std::int64_t, std::int64_t>> pairs;
  std::optional<std::size_t> declared_nodes;
};

namespace detail {

inline bool parse_int(const std::string& tok, std::int64_t& out) {
  if (tok.empty()) return false;
  errno = 0;
  char* end = nullptr;
  const long long v = std::strtoll(tok.c_str(), &end, 10);
  if (errno != 0 || end != tok.c_str() + tok.size()) return false;
  out = v;
  return true;
}

// "# Nodes: 62586 Edges: 147892" (SNAP) or "# nodes: N"
inline std::optional<std::size_t> declared_node_count(const std::string& comment) {
  std::istringstream in(comment.substr(1));
  std::string word;
  while (in >> word) {
    if (word == "Nodes:" || word == "nodes:") {
      std::string value;
      std::int64_t n = 0;
      if (in >> value && parse_int(value, n) && n >= 0) return static_cast<std::size_t>(n);
      return std::nullopt;
    }
  }
  return std::nullopt;
}

}  // namespace detail

/// One edge per line as two whitespace-separated integers; '#' starts a
/// comment line; blank lines are skipped.
inline EdgeListData read_edge_list(std::istream& in) {
  EdgeListData data;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos) continue;
    if (line[first] == '#') {
      if (!data.declared_nodes) data.declared_nodes = detail::declared_node_count(line.substr(first));
      continue;
    }
    std::istringstream fields(line);
    std::string a, b, extra;
    std::int64_t u = 0, v = 0;
    if (!(fields >> a >> b)) throw ParseError(lineno, "expected two integers");
    if (fields >> extra) throw ParseError(lineno, "unexpected trailing field '" + extra + "'");
    if (!detail::parse_int(a, u) || !detail::parse_int(b, v)) throw ParseError(lineno, "not an integer pair");
    data.pairs.emplace_back(u, v);
  }
  return data;
}

inline EdgeListData read_edge_list_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::Io, "cannot open " + path);
  return read_edge_list(in);
}

/// Reads an edge list and builds the graph, honoring a declared node count.
inline Graph load_graph(const std::string& path) {
  const auto data = read_edge_list_file(path);
  return from_edge_list(data.pairs, data.declared_nodes);
}

/// Writes "# <line>" for every header line, a "# Nodes: N Edges: E" line, then
/// one "u\tv" line per edge with u < v, sorted.
inline void write_edge_list(std::ostream& out, const Graph& g, const std::vector<std::string>& header = {}) {
  for (const auto& h : header) out << "# " << h << '\n';
  out << "# Nodes: " << g.num_nodes() << " Edges: " << g.num_edges() << '\n';
  for (const auto& [u, v] : g.edges()) out << u << '\t' << v << '\n';
}

/// Text of a double with 17 significant digits.
inline std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline std::string write_measure_json(const GeneratingMeasure& w) {
  std::ostringstream out;
  out << "{\n  \"schema_version\": " << kMeasureSchemaVersion << ",\n  \"m\": " << w.m() << ",\n  \"k\": " << w.k()
      << ",\n  \"lengths\": [";
  for (int i = 0; i < w.m(); ++i) out << (i ? ", " : "") << format_double(w.length(i));
  out << "],\n  \"probs\": [";
  for (int i = 0; i < w.m(); ++i) {
    out << (i ? ",\n            [" : "[");
    for (int j = 0; j < w.m(); ++j) out << (j ? ", " : "") << format_double(w.p(i, j));
    out << "]";
  }
  out << "]\n}\n";
  return out.str();
}

inline GeneratingMeasure read_measure_json(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::Schema, std::string("invalid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw Error(Errc::Schema, "measure document must be a JSON object");
  for (const char* key : {"schema_version", "m", "k", "lengths", "probs"})
    if (!doc.contains(key)) throw Error(Errc::Schema, std::string("missing key \"") + key + "\"");
  if (!doc["schema_version"].is_number_integer() || doc["schema_version"].get<int>() != kMeasureSchemaVersion)
    throw Error(Errc::Schema, "unsupported schema_version");
  if (!doc["m"].is_number_integer() || !doc["k"].is_number_integer())
    throw Error(Errc::Schema, "m and k must be integers");
  const int m = doc["m"].get<int>();
  const int k = doc["k"].get<int>();
  const auto& lengths = doc["lengths"];
  const auto& probs = doc["probs"];
  if (m < 1 || !lengths.is_array() || lengths.size() != static_cast<std::size_t>(m))
    throw Error(Errc::Schema, "lengths must be an array of m numbers");
  if (!probs.is_array() || probs.size() != static_cast<std::size_t>(m))
    throw Error(Errc::Schema, "probs must be an m x m nested array");
  std::vector<double> l, p;
  for (const auto& v : lengths) {
    if (!v.is_number()) throw Error(Errc::Schema, "lengths entries must be numbers");
    l.push_back(v.get<double>());
  }
  for (const auto& row : probs) {
    if (!row.is_array() || row.size() != static_cast<std::size_t>(m))
      throw Error(Errc::Schema, "probs must be an m x m nested array");
    for (const auto& v : row) {
      if (!v.is_number()) throw Error(Errc::Schema, "probs entries must be numbers");
      p.push_back(v.get<double>());
    }
  }
  try {
    return validate_measure(k, std::move(l), std::move(p));
  } catch (const Error& e) {
    throw Error(Errc::Validation, e.what());
  }
}

inline GeneratingMeasure read_measure_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::Io, "cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return read_measure_json(buf.str());
}

inline void write_measure_file(const std::string& path, const GeneratingMeasure& w) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::Io, "cannot write " + path);
  out << write_measure_json(w);
}

/// RFC 4180 quoting for a single CSV field.
inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

inline void write_degree_csv(std::ostream& out, const DegreeDistribution& dd) {
  out << "degree,count,ccdf\n";
  const auto ccdf = dd.ccdf();
  for (std::size_t d = 0; d < dd.counts.size(); ++d)
    if (dd.counts[d] > 0) out << d << ',' << dd.counts[d] << ',' << format_double(ccdf[d]) << '\n';
}

}  // namespace mfng::io
