#pragma once

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <unordered_map>
#include <vector>

#include "fbgsp/dataset.hpp"
#include "fbgsp/error.hpp"
#include "fbgsp/graph.hpp"
#include "fbgsp/matrix.hpp"
#include "fbgsp/random.hpp"

namespace fbgsp {

enum class DataFormat { Auto, Generic, WebKB };

inline DataFormat parse_data_format(std::string_view s) {
  if (s == "auto") return DataFormat::Auto;
  if (s == "generic") return DataFormat::Generic;
  if (s == "webkb") return DataFormat::WebKB;
  throw Error(Errc::InvalidArgument, "unknown data format '" + std::string(s) + "' (auto, generic, webkb)");
}

namespace detail_io {

namespace fs = std::filesystem;

/// Reads a text file as lines with trailing '\r' stripped.
inline std::vector<std::string> read_lines(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::ParseError, "cannot open " + path.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
  }
  return lines;
}

[[noreturn]] inline void parse_fail(const fs::path& path, std::size_t line, const std::string& what) {
  throw Error(Errc::ParseError, path.filename().string() + ":" + std::to_string(line) + ": " + what);
}

inline std::string_view trim(std::string_view s) {
  const auto ws = [](char c) { return c == ' ' || c == '\t'; };
  while (!s.empty() && ws(s.front())) s.remove_prefix(1);
  while (!s.empty() && ws(s.back())) s.remove_suffix(1);
  return s;
}

inline bool blank(std::string_view s) { return trim(s).empty(); }

/// Splits on any of `seps`, keeping empty fields.
inline std::vector<std::string_view> split(std::string_view s, std::string_view seps) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= s.size(); ++i) {
    if (i == s.size() || seps.find(s[i]) != std::string_view::npos) {
      out.push_back(s.substr(start, i - start));
      start = i + 1;
    }
  }
  return out;
}

/// Whitespace-separated tokens.
inline std::vector<std::string_view> tokens(std::string_view s) {
  std::vector<std::string_view> out;
  for (std::string_view t : split(s, " \t"))
    if (!t.empty()) out.push_back(t);
  return out;
}

template <class T>
bool parse_number(std::string_view s, T& out) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  if (s.empty()) return false;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && ptr == s.data() + s.size();
}

/// Shortest decimal text that reads back to exactly `v`.
inline std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc{}) throw Error(Errc::IoError, "cannot format value");
  return std::string(buf, ptr);
}

inline void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::IoError, "cannot write " + path.string());
  out << content;
  if (!out.flush()) throw Error(Errc::IoError, "write failed for " + path.string());
}

inline std::size_t class_count(const std::vector<std::size_t>& labels) {
  return labels.empty() ? 0 : *std::max_element(labels.begin(), labels.end()) + 1;
}

}  // namespace detail_io

/// Generic bundle: edges.tsv, features.csv, labels.txt. N is the number of
/// feature rows; C is max(label) + 1.
inline Dataset load_generic_bundle(const std::filesystem::path& dir) {
  using namespace detail_io;
  Dataset d;
  d.name = dir.filename().empty() ? dir.parent_path().filename().string() : dir.filename().string();

  const fs::path fpath = dir / "features.csv";
  std::vector<double> values;
  std::size_t rows = 0, cols = 0;
  const auto flines = read_lines(fpath);
  for (std::size_t ln = 0; ln < flines.size(); ++ln) {
    if (blank(flines[ln])) continue;
    const auto fields = split(flines[ln], ",");
    if (rows == 0) cols = fields.size();
    if (fields.size() != cols)
      parse_fail(fpath, ln + 1, "expected " + std::to_string(cols) + " values, got " + std::to_string(fields.size()));
    for (std::string_view f : fields) {
      double v = 0.0;
      if (!parse_number(f, v) || !std::isfinite(v)) parse_fail(fpath, ln + 1, "bad number '" + std::string(f) + "'");
      values.push_back(v);
    }
    ++rows;
  }
  if (rows == 0) throw Error(Errc::ParseError, fpath.filename().string() + ": no feature rows");

  const fs::path lpath = dir / "labels.txt";
  const auto llines = read_lines(lpath);
  for (std::size_t ln = 0; ln < llines.size(); ++ln) {
    if (blank(llines[ln])) continue;
    std::size_t y = 0;
    if (!parse_number(llines[ln], y)) parse_fail(lpath, ln + 1, "bad label '" + llines[ln] + "'");
    d.labels.push_back(y);
  }

  const fs::path epath = dir / "edges.tsv";
  std::vector<Edge> edges;
  const auto elines = read_lines(epath);
  for (std::size_t ln = 0; ln < elines.size(); ++ln) {
    const std::string_view line = trim(elines[ln]);
    if (line.empty() || line.front() == '#') continue;
    const auto t = tokens(line);
    std::uint64_t u = 0, v = 0;
    if (t.size() != 2 || !parse_number(t[0], u) || !parse_number(t[1], v))
      parse_fail(epath, ln + 1, "expected two integer node ids");
    if (u >= rows || v >= rows)
      throw Error(Errc::InconsistentNodeCount, epath.filename().string() + ":" + std::to_string(ln + 1) +
                                                   ": node id out of range for " + std::to_string(rows) + " nodes");
    if (u == v) parse_fail(epath, ln + 1, "self-loop at node " + std::to_string(u));
    edges.push_back({static_cast<NodeId>(u), static_cast<NodeId>(v)});
  }

  if (d.labels.size() != rows)
    throw Error(Errc::InconsistentNodeCount, "features.csv has " + std::to_string(rows) + " rows, labels.txt has " +
                                                 std::to_string(d.labels.size()) + " labels");
  d.graph = build_graph(std::span<const Edge>(edges), rows);
  d.features = Matrix(rows, cols, std::move(values));
  d.num_classes = class_count(d.labels);
  d.validate();
  return d;
}

/// WebKB layout: out1_node_feature_label.txt (header; id<TAB>f,f,...<TAB>label)
/// and out1_graph_edges.txt (header; id<TAB>id). Node ids are remapped to
/// 0..N-1 in node-file order. Self-loop edges are dropped and counted.
inline Dataset load_webkb(const std::filesystem::path& dir) {
  using namespace detail_io;
  Dataset d;
  d.name = dir.filename().empty() ? dir.parent_path().filename().string() : dir.filename().string();

  const fs::path npath = dir / "out1_node_feature_label.txt";
  const auto nlines = read_lines(npath);
  if (nlines.empty()) throw Error(Errc::ParseError, npath.filename().string() + ": missing header");
  std::unordered_map<std::uint64_t, NodeId> index;
  std::vector<double> values;
  std::size_t cols = 0;
  for (std::size_t ln = 1; ln < nlines.size(); ++ln) {
    if (blank(nlines[ln])) continue;
    const auto fields = split(nlines[ln], "\t");
    std::uint64_t id = 0;
    std::size_t label = 0;
    if (fields.size() != 3 || !parse_number(fields[0], id) || !parse_number(fields[2], label))
      parse_fail(npath, ln + 1, "expected id<TAB>features<TAB>label");
    const auto feats = split(trim(fields[1]), ",");
    if (index.empty()) cols = feats.size();
    if (feats.size() != cols)
      parse_fail(npath, ln + 1, "expected " + std::to_string(cols) + " features, got " + std::to_string(feats.size()));
    for (std::string_view f : feats) {
      double v = 0.0;
      if (!parse_number(f, v) || !std::isfinite(v)) parse_fail(npath, ln + 1, "bad feature '" + std::string(f) + "'");
      values.push_back(v);
    }
    if (!index.emplace(id, static_cast<NodeId>(index.size())).second)
      parse_fail(npath, ln + 1, "duplicate node id " + std::to_string(id));
    d.labels.push_back(label);
  }
  const std::size_t n = index.size();
  if (n == 0) throw Error(Errc::ParseError, npath.filename().string() + ": no nodes");

  const fs::path epath = dir / "out1_graph_edges.txt";
  const auto elines = read_lines(epath);
  if (elines.empty()) throw Error(Errc::ParseError, epath.filename().string() + ": missing header");
  std::vector<Edge> edges;
  for (std::size_t ln = 1; ln < elines.size(); ++ln) {
    if (blank(elines[ln])) continue;
    const auto t = tokens(elines[ln]);
    std::uint64_t a = 0, b = 0;
    if (t.size() != 2 || !parse_number(t[0], a) || !parse_number(t[1], b))
      parse_fail(epath, ln + 1, "expected two integer node ids");
    const auto ia = index.find(a), ib = index.find(b);
    if (ia == index.end() || ib == index.end())
      throw Error(Errc::InconsistentNodeCount,
                  epath.filename().string() + ":" + std::to_string(ln + 1) + ": edge references unknown node id");
    if (ia->second == ib->second) {
      ++d.dropped_self_loops;
      continue;
    }
    edges.push_back({ia->second, ib->second});
  }

  d.graph = build_graph(std::span<const Edge>(edges), n);
  d.features = Matrix(n, cols, std::move(values));
  d.num_classes = class_count(d.labels);
  d.validate();
  return d;
}

/// Auto picks WebKB when its node file exists, otherwise the generic bundle.
inline Dataset load_dataset(const std::filesystem::path& dir, DataFormat format = DataFormat::Auto) {
  if (!std::filesystem::is_directory(dir)) throw Error(Errc::ParseError, "not a directory: " + dir.string());
  if (format == DataFormat::Auto)
    format = std::filesystem::exists(dir / "out1_node_feature_label.txt") ? DataFormat::WebKB : DataFormat::Generic;
  return format == DataFormat::WebKB ? load_webkb(dir) : load_generic_bundle(dir);
}

struct CsbmParams {
  std::size_t n = 500;
  std::size_t classes = 2;
  double p_in = 0.2;
  double p_out = 0.02;
  std::size_t feature_dim = 64;
  double mu = 1.0;
  double sigma = 1.0;
  std::uint64_t seed = 0;

  void validate() const {
    detail::require(n >= 1 && classes >= 1 && classes <= n, Errc::InvalidArgument, "need 1 <= classes <= n");
    detail::require(p_in >= 0 && p_in <= 1 && p_out >= 0 && p_out <= 1, Errc::InvalidArgument,
                    "edge probabilities must lie in [0, 1]");
    detail::require(feature_dim >= 1, Errc::InvalidArgument, "feature_dim must be positive");
    detail::require(mu >= 0 && sigma > 0, Errc::InvalidArgument, "need mu >= 0 and sigma > 0");
  }

  friend bool operator==(const CsbmParams&, const CsbmParams&) = default;
};

/// Entry k of class c's mean direction: a Hadamard-style sign pattern, so
/// distinct classes have (near-)orthogonal means of norm mu.
inline double csbm_mean_sign(std::size_t c, std::size_t k) {
  return (std::popcount(static_cast<std::uint64_t>((c + 1) & k)) % 2 == 0) ? 1.0 : -1.0;
}

/// Labels round-robin; pairs (i<j) in lexicographic order each draw one
/// uniform; then features row-major, mean + sigma * normal.
inline Dataset generate_csbm(const CsbmParams& p) {
  p.validate();
  Rng rng(p.seed);
  Dataset d;
  d.name = "csbm";
  d.num_classes = p.classes;
  d.labels.resize(p.n);
  for (std::size_t i = 0; i < p.n; ++i) d.labels[i] = i % p.classes;

  std::vector<Edge> edges;
  for (std::size_t i = 0; i < p.n; ++i)
    for (std::size_t j = i + 1; j < p.n; ++j) {
      const double prob = d.labels[i] == d.labels[j] ? p.p_in : p.p_out;
      if (rng.uniform() < prob) edges.push_back({static_cast<NodeId>(i), static_cast<NodeId>(j)});
    }
  d.graph = build_graph(std::span<const Edge>(edges), p.n);

  const double amp = p.mu / std::sqrt(static_cast<double>(p.feature_dim));
  d.features = Matrix(p.n, p.feature_dim);
  for (std::size_t i = 0; i < p.n; ++i)
    for (std::size_t k = 0; k < p.feature_dim; ++k)
      d.features(i, k) = amp * csbm_mean_sign(d.labels[i], k) + p.sigma * rng.normal();
  return d;
}

/// Expected edge homophily p_in*n_in / (p_in*n_in + p_out*n_out) for the
/// round-robin labelling.
inline double csbm_expected_edge_homophily(const CsbmParams& p) {
  double n_in = 0.0;
  for (std::size_t c = 0; c < p.classes; ++c) {
    const double size = static_cast<double>(p.n / p.classes + (c < p.n % p.classes ? 1 : 0));
    n_in += size * (size - 1.0) / 2.0;
  }
  const double total = static_cast<double>(p.n) * static_cast<double>(p.n - 1) / 2.0;
  const double n_out = total - n_in;
  const double denom = p.p_in * n_in + p.p_out * n_out;
  return denom > 0 ? p.p_in * n_in / denom : 0.0;
}

/// Writes edges.tsv, features.csv and labels.txt. Values use shortest
/// round-trip formatting, so loading the bundle reproduces the dataset.
inline void write_generic_bundle(const Dataset& d, const std::filesystem::path& dir) {
  using namespace detail_io;
  d.validate();
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(Errc::IoError, "cannot create " + dir.string() + ": " + ec.message());

  std::string edges = "# " + std::to_string(d.graph.node_count()) + " nodes, " +
                      std::to_string(d.graph.edge_count()) + " undirected edges\n";
  for (const Edge& e : d.graph.edges()) edges += std::to_string(e.u) + "\t" + std::to_string(e.v) + "\n";
  write_file(dir / "edges.tsv", edges);

  std::string feats;
  for (std::size_t i = 0; i < d.features.rows(); ++i) {
    for (std::size_t k = 0; k < d.features.cols(); ++k) {
      if (k) feats += ',';
      feats += format_double(d.features(i, k));
    }
    feats += '\n';
  }
  write_file(dir / "features.csv", feats);

  std::string labels;
  for (std::size_t y : d.labels) labels += std::to_string(y) + "\n";
  write_file(dir / "labels.txt", labels);
}

}  // namespace fbgsp
