#pragma once

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "forestgd/errors.hpp"
#include "forestgd/graph.hpp"

namespace forestgd {

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto ws = " \t\r\n";
  auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

inline std::string_view strip_comment(std::string_view s) {
  if (auto p = s.find('#'); p != std::string_view::npos) s = s.substr(0, p);
  return trim(s);
}

inline std::vector<std::string_view> split_fields(std::string_view s, std::string_view seps) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    auto b = s.find_first_not_of(seps, i);
    if (b == std::string_view::npos) break;
    auto e = s.find_first_of(seps, b);
    if (e == std::string_view::npos) e = s.size();
    out.push_back(s.substr(b, e - b));
    i = e;
  }
  return out;
}

template <typename T>
std::optional<T> parse_number(std::string_view s) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  T value{};
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  return value;
}

inline std::string line_error(std::size_t line, const std::string& what) {
  return "line " + std::to_string(line) + ": " + what;
}

inline std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  return in;
}

}  // namespace detail

/// Formats a double with 17 significant digits (round-trips exactly).
inline std::string format_double(double x) {
  char buf[32];
  int len = std::snprintf(buf, sizeof buf, "%.17g", x);
  return std::string(buf, static_cast<std::size_t>(len));
}

/// Reads an edge list: "u v [w]" per line, 0-based dense ids, '#' comments.
inline Graph read_edge_list(std::istream& in) {
  std::vector<Edge> edges;
  std::vector<std::size_t> lines;
  std::string raw;
  std::size_t line_no = 0;
  Vertex max_id = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    auto line = detail::strip_comment(raw);
    if (line.empty()) continue;
    auto fields = detail::split_fields(line, " \t,");
    if (fields.size() < 2 || fields.size() > 3) {
      throw DataError(detail::line_error(line_no, "expected 'u v [w]'"));
    }
    auto u = detail::parse_number<Vertex>(fields[0]);
    auto v = detail::parse_number<Vertex>(fields[1]);
    if (!u || !v) throw DataError(detail::line_error(line_no, "invalid vertex id"));
    double w = 1.0;
    if (fields.size() == 3) {
      auto parsed = detail::parse_number<double>(fields[2]);
      if (!parsed) throw DataError(detail::line_error(line_no, "invalid weight"));
      w = *parsed;
    }
    if (!(w > 0.0)) throw DataError(detail::line_error(line_no, "nonpositive weight"));
    if (*u == *v) throw DataError(detail::line_error(line_no, "self-loop"));
    edges.push_back({*u, *v, w});
    lines.push_back(line_no);
    max_id = std::max({max_id, *u, *v});
  }
  if (edges.empty()) throw DataError("edge list is empty");

  const std::size_t n = std::size_t{max_id} + 1;
  std::vector<bool> seen(n, false);
  for (const Edge& e : edges) seen[e.u] = seen[e.v] = true;
  for (std::size_t v = 0; v < n; ++v) {
    if (!seen[v]) throw DataError("vertex ids are not dense: id " + std::to_string(v) + " is missing");
  }

  // Duplicate detection with line numbers before handing off to Graph.
  std::vector<std::size_t> order(edges.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  auto key = [&](std::size_t i) {
    return std::pair(std::min(edges[i].u, edges[i].v), std::max(edges[i].u, edges[i].v));
  };
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return key(a) < key(b); });
  for (std::size_t i = 1; i < order.size(); ++i) {
    if (key(order[i]) == key(order[i - 1])) {
      throw DataError(detail::line_error(lines[order[i]], "duplicate undirected edge (" +
                                                              std::to_string(key(order[i]).first) + "," +
                                                              std::to_string(key(order[i]).second) + ")"));
    }
  }
  return Graph::from_edges(n, edges);
}

inline Graph load_graph(const std::filesystem::path& path) {
  auto in = detail::open_input(path);
  try {
    return read_edge_list(in);
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

/// Writes sorted "u v w" lines with 17 significant digits.
inline void write_edge_list(std::ostream& out, const Graph& g) {
  for (const Edge& e : g.edges()) {
    out << e.u << ' ' << e.v << ' ' << format_double(e.w) << '\n';
  }
}

inline void save_graph(const std::filesystem::path& path, const Graph& g) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  write_edge_list(out, g);
}

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

using NodePositions = std::vector<Point2>;

/// Reads "x,y" per line.
inline NodePositions read_coordinates(std::istream& in) {
  NodePositions pts;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    auto line = detail::strip_comment(raw);
    if (line.empty()) continue;
    auto fields = detail::split_fields(line, ", \t");
    if (fields.size() != 2) throw DataError(detail::line_error(line_no, "expected 'x,y'"));
    auto x = detail::parse_number<double>(fields[0]);
    auto y = detail::parse_number<double>(fields[1]);
    if (!x || !y) throw DataError(detail::line_error(line_no, "invalid coordinate"));
    pts.push_back({*x, *y});
  }
  return pts;
}

inline NodePositions load_coordinates(const std::filesystem::path& path) {
  auto in = detail::open_input(path);
  return read_coordinates(in);
}

/// Reads a node signal: either one value per line, or "node,value" rows
/// covering every node exactly once. The length must equal n.
inline std::vector<double> read_signal(std::istream& in, std::size_t n) {
  std::vector<double> plain;
  std::vector<std::optional<double>> keyed;
  bool is_keyed = false;
  bool decided = false;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    auto line = detail::strip_comment(raw);
    if (line.empty()) continue;
    auto fields = detail::split_fields(line, ", \t");
    if (!decided) {
      // A "node,value" header line is tolerated.
      if (fields.size() == 2 && !detail::parse_number<double>(fields[1])) {
        continue;
      }
      is_keyed = fields.size() == 2;
      decided = true;
      if (is_keyed) keyed.assign(n, std::nullopt);
    }
    if (is_keyed) {
      if (fields.size() != 2) throw DataError(detail::line_error(line_no, "expected 'node,value'"));
      auto node = detail::parse_number<std::size_t>(fields[0]);
      auto value = detail::parse_number<double>(fields[1]);
      if (!node || !value) throw DataError(detail::line_error(line_no, "invalid 'node,value' row"));
      if (*node >= n) throw DataError(detail::line_error(line_no, "node id out of range"));
      if (keyed[*node]) throw DataError(detail::line_error(line_no, "node listed twice"));
      keyed[*node] = *value;
    } else {
      if (fields.size() != 1) throw DataError(detail::line_error(line_no, "expected a single value"));
      auto value = detail::parse_number<double>(fields[0]);
      if (!value) throw DataError(detail::line_error(line_no, "invalid value"));
      plain.push_back(*value);
    }
  }
  if (is_keyed) {
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) {
      if (!keyed[i]) throw DataError("signal has no value for node " + std::to_string(i));
      out[i] = *keyed[i];
    }
    return out;
  }
  if (plain.size() != n) {
    throw DataError("signal length " + std::to_string(plain.size()) + " does not match n = " +
                    std::to_string(n));
  }
  return plain;
}

inline std::vector<double> load_signal(const std::filesystem::path& path, std::size_t n) {
  auto in = detail::open_input(path);
  try {
    return read_signal(in, n);
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

}  // namespace forestgd
