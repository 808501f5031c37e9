#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <queue>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "isingsaw/common.hpp"
#include "isingsaw/rng.hpp"

namespace isingsaw {

using Edge = std::pair<int, int>;

/// Simple undirected graph on vertices 0..n-1.
///
/// Neighbor lists are sorted ascending and the vertex index order is the
/// fixed enumeration that every tie-break (SAW pinning, kernel state layout)
/// refers to. Immutable after construction.
class Graph {
 public:
  Graph() = default;

  explicit Graph(int vertex_count) : adjacency_(checked_count(vertex_count)) {}

  Graph(int vertex_count, const std::vector<Edge>& edges) : Graph(vertex_count) {
    for (const auto& [u, v] : edges) {
      if (u < 0 || v < 0 || u >= vertex_count || v >= vertex_count) {
        throw InvalidInput("edge (" + std::to_string(u) + "," + std::to_string(v) +
                           ") has vertex index out of range for n=" +
                           std::to_string(vertex_count));
      }
      if (u == v) throw InvalidInput("self-loop at vertex " + std::to_string(u));
      adjacency_[u].push_back(v);
      adjacency_[v].push_back(u);
    }
    for (auto& nbrs : adjacency_) {
      std::sort(nbrs.begin(), nbrs.end());
      nbrs.erase(std::unique(nbrs.begin(), nbrs.end()), nbrs.end());
    }
  }

  int vertex_count() const { return static_cast<int>(adjacency_.size()); }
  const std::vector<int>& neighbors(int v) const { return adjacency_.at(v); }
  int degree(int v) const { return static_cast<int>(adjacency_.at(v).size()); }

  int max_degree() const {
    int d = 0;
    for (const auto& nbrs : adjacency_) d = std::max(d, static_cast<int>(nbrs.size()));
    return d;
  }

  bool is_regular() const {
    if (adjacency_.empty()) return true;
    const auto d = adjacency_.front().size();
    return std::all_of(adjacency_.begin(), adjacency_.end(),
                       [d](const auto& nbrs) { return nbrs.size() == d; });
  }

  bool has_edge(int u, int v) const {
    const auto& nbrs = adjacency_.at(u);
    return std::binary_search(nbrs.begin(), nbrs.end(), v);
  }

  // Edges with u < v, in lexicographic order.
  std::vector<Edge> edges() const {
    std::vector<Edge> out;
    for (int u = 0; u < vertex_count(); ++u) {
      for (int v : adjacency_[u]) {
        if (u < v) out.emplace_back(u, v);
      }
    }
    return out;
  }

  std::size_t edge_count() const {
    std::size_t twice = 0;
    for (const auto& nbrs : adjacency_) twice += nbrs.size();
    return twice / 2;
  }

  bool connected() const;

  bool operator==(const Graph&) const = default;

 private:
  static std::size_t checked_count(int n) {
    if (n <= 0) throw InvalidInput("vertex count must be positive");
    return static_cast<std::size_t>(n);
  }

  std::vector<std::vector<int>> adjacency_;
};

inline constexpr int kUnreachable = std::numeric_limits<int>::max();

// Hop counts from v; unreachable vertices get kUnreachable.
inline std::vector<int> bfs_distances(const Graph& g, int v) {
  if (v < 0 || v >= g.vertex_count()) throw InvalidInput("vertex out of range");
  std::vector<int> dist(g.vertex_count(), kUnreachable);
  std::queue<int> frontier;
  dist[v] = 0;
  frontier.push(v);
  while (!frontier.empty()) {
    const int u = frontier.front();
    frontier.pop();
    for (int w : g.neighbors(u)) {
      if (dist[w] == kUnreachable) {
        dist[w] = dist[u] + 1;
        frontier.push(w);
      }
    }
  }
  return dist;
}

inline bool Graph::connected() const {
  const auto dist = bfs_distances(*this, 0);
  return std::none_of(dist.begin(), dist.end(), [](int d) { return d == kUnreachable; });
}

// ---------------------------------------------------------------------------
// Edge-list text format:
//   n <count>
//   u v
//   ...
// Blank lines and lines starting with '#' are ignored.

inline Graph load_edge_list(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  int n = -1;
  std::vector<Edge> edges;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream fields(line);
    const auto where = "edge list line " + std::to_string(line_no) + ": ";
    if (n < 0) {
      std::string tag;
      long long count = 0;
      std::string extra;
      if (!(fields >> tag >> count) || tag != "n" || (fields >> extra) || count <= 0 ||
          count > std::numeric_limits<int>::max()) {
        throw InvalidInput(where + "expected header 'n <count>'");
      }
      n = static_cast<int>(count);
      continue;
    }
    long long u = 0, v = 0;
    std::string extra;
    if (!(fields >> u >> v) || (fields >> extra)) {
      throw InvalidInput(where + "malformed edge '" + line + "'");
    }
    if (u < 0 || v < 0 || u >= n || v >= n) {
      throw InvalidInput(where + "vertex index out of range");
    }
    if (u == v) throw InvalidInput(where + "self-loop at vertex " + std::to_string(u));
    edges.emplace_back(static_cast<int>(u), static_cast<int>(v));
  }
  if (n < 0) throw InvalidInput("edge list: missing header 'n <count>'");
  return Graph(n, edges);
}

inline std::string emit_edge_list(const Graph& g) {
  std::string out = "n " + std::to_string(g.vertex_count()) + "\n";
  for (const auto& [u, v] : g.edges()) {
    out += std::to_string(u) + " " + std::to_string(v) + "\n";
  }
  return out;
}

inline std::string to_dot(const Graph& g) {
  std::string out = "graph G {\n";
  for (int v = 0; v < g.vertex_count(); ++v) out += "  " + std::to_string(v) + ";\n";
  for (const auto& [u, v] : g.edges()) {
    out += "  " + std::to_string(u) + " -- " + std::to_string(v) + ";\n";
  }
  out += "}\n";
  return out;
}

// ---------------------------------------------------------------------------
// Generators

enum class GraphKind { cycle, complete, path, random_regular, edge_list };

struct GraphSpec {
  GraphKind kind = GraphKind::cycle;
  int n = 0;
  int d = 0;
  std::uint64_t seed = 0;
  std::string edge_text;  // edge_list only
  std::string label;      // canonical spec string, echoed into outputs
};

inline Graph cycle_graph(int n) {
  if (n < 3) throw InvalidInput("cycle needs n >= 3");
  std::vector<Edge> edges;
  for (int i = 0; i < n; ++i) edges.emplace_back(i, (i + 1) % n);
  return Graph(n, edges);
}

inline Graph path_graph(int n) {
  std::vector<Edge> edges;
  for (int i = 0; i + 1 < n; ++i) edges.emplace_back(i, i + 1);
  return Graph(n, edges);
}

inline Graph complete_graph(int n) {
  std::vector<Edge> edges;
  for (int u = 0; u < n; ++u) {
    for (int v = u + 1; v < n; ++v) edges.emplace_back(u, v);
  }
  return Graph(n, edges);
}

/// Pairing (configuration) model with whole-restart rejection of loops and
/// multi-edges. Deterministic for a fixed seed.
inline Graph random_regular_graph(int n, int d, std::uint64_t seed, int max_attempts = 100000) {
  if (n <= 0 || d < 0) throw InvalidInput("random-regular needs n > 0, d >= 0");
  if ((static_cast<long long>(n) * d) % 2 != 0) throw InvalidInput("random-regular needs n*d even");
  if (d >= n) throw InvalidInput("random-regular needs d < n");
  CounterRng rng = CounterRng::stream({seed, 0x5252u});
  std::vector<int> points(static_cast<std::size_t>(n) * d);
  for (std::size_t i = 0; i < points.size(); ++i) points[i] = static_cast<int>(i / d);
  for (int attempt = 0; attempt < max_attempts; ++attempt) {
    shuffle(points, rng);
    std::vector<Edge> edges;
    edges.reserve(points.size() / 2);
    bool ok = true;
    std::vector<std::vector<int>> seen(n);
    for (std::size_t i = 0; i < points.size() && ok; i += 2) {
      const int u = points[i];
      const int v = points[i + 1];
      if (u == v || std::find(seen[u].begin(), seen[u].end(), v) != seen[u].end()) {
        ok = false;
        break;
      }
      seen[u].push_back(v);
      seen[v].push_back(u);
      edges.emplace_back(std::min(u, v), std::max(u, v));
    }
    if (ok) return Graph(n, edges);
  }
  throw CapExceeded("random-regular: rejection budget exhausted");
}

inline const char* petersen_edges() {
  return "n 10\n0 1\n1 2\n2 3\n3 4\n4 0\n0 5\n1 6\n2 7\n3 8\n4 9\n5 7\n7 9\n9 6\n6 8\n8 5\n";
}

inline Graph generate(const GraphSpec& spec) {
  switch (spec.kind) {
    case GraphKind::cycle:
      return cycle_graph(spec.n);
    case GraphKind::complete:
      return complete_graph(spec.n);
    case GraphKind::path:
      return path_graph(spec.n);
    case GraphKind::random_regular:
      return random_regular_graph(spec.n, spec.d, spec.seed);
    case GraphKind::edge_list:
      return load_edge_list(spec.edge_text);
  }
  throw InvalidInput("unknown graph kind");
}

namespace detail {

inline int parse_positive(std::string_view s, std::string_view what) {
  int value = 0;
  std::size_t used = 0;
  try {
    value = std::stoi(std::string(s), &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != s.size() || s.empty() || value <= 0) {
    throw InvalidInput("graph spec: bad " + std::string(what) + " '" + std::string(s) + "'");
  }
  return value;
}

}  // namespace detail

/// Parses graph spec strings:
///   cycle:N  path:N  complete:N  kN  rr:n=N,d=D,seed=S
///   petersen  prism  k33  cube  octahedron
/// `file:PATH` is resolved by the caller, which passes the file body as
/// `file_text`.
inline GraphSpec parse_graph_spec(std::string_view text, std::string_view file_text = {}) {
  GraphSpec spec;
  spec.label = std::string(text);
  const auto colon = text.find(':');
  const std::string_view head = text.substr(0, colon);
  const std::string_view tail =
      colon == std::string_view::npos ? std::string_view{} : text.substr(colon + 1);

  auto edge_list = [&](std::string body) {
    spec.kind = GraphKind::edge_list;
    spec.edge_text = std::move(body);
    return spec;
  };

  if (head == "file") return edge_list(std::string(file_text));
  if (text == "petersen") return edge_list(petersen_edges());
  if (text == "prism") return edge_list("n 6\n0 1\n1 2\n2 0\n3 4\n4 5\n5 3\n0 3\n1 4\n2 5\n");
  if (text == "k33") return edge_list("n 6\n0 3\n0 4\n0 5\n1 3\n1 4\n1 5\n2 3\n2 4\n2 5\n");
  if (text == "cube") {
    return edge_list(
        "n 8\n0 1\n0 2\n0 4\n1 3\n1 5\n2 3\n2 6\n3 7\n4 5\n4 6\n5 7\n6 7\n");
  }
  if (text == "octahedron") {
    return edge_list(
        "n 6\n0 2\n0 3\n0 4\n0 5\n1 2\n1 3\n1 4\n1 5\n2 4\n2 5\n3 4\n3 5\n");
  }
  if (head == "cycle" || head == "path" || head == "complete") {
    spec.kind = head == "cycle" ? GraphKind::cycle
                : head == "path" ? GraphKind::path
                                 : GraphKind::complete;
    spec.n = detail::parse_positive(tail, "vertex count");
    return spec;
  }
  if (colon == std::string_view::npos && head.size() >= 2 && (head[0] == 'k' || head[0] == 'K') &&
      std::all_of(head.begin() + 1, head.end(), [](char c) { return c >= '0' && c <= '9'; })) {
    spec.kind = GraphKind::complete;
    spec.n = detail::parse_positive(head.substr(1), "vertex count");
    return spec;
  }
  if (head == "rr") {
    spec.kind = GraphKind::random_regular;
    bool has_n = false, has_d = false;
    std::string_view rest = tail;
    while (!rest.empty()) {
      const auto comma = rest.find(',');
      const std::string_view item = rest.substr(0, comma);
      rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
      const auto eq = item.find('=');
      if (eq == std::string_view::npos) throw InvalidInput("graph spec: expected key=value in rr");
      const auto key = item.substr(0, eq);
      const auto val = item.substr(eq + 1);
      if (key == "n") {
        spec.n = detail::parse_positive(val, "n");
        has_n = true;
      } else if (key == "d") {
        spec.d = detail::parse_positive(val, "d");
        has_d = true;
      } else if (key == "seed") {
        try {
          spec.seed = std::stoull(std::string(val));
        } catch (const std::exception&) {
          throw InvalidInput("graph spec: bad seed");
        }
      } else {
        throw InvalidInput("graph spec: unknown rr key '" + std::string(key) + "'");
      }
    }
    if (!has_n || !has_d) throw InvalidInput("graph spec: rr needs n= and d=");
    if ((static_cast<long long>(spec.n) * spec.d) % 2 != 0) {
      throw InvalidInput("graph spec: rr needs n*d even");
    }
    if (spec.d >= spec.n) throw InvalidInput("graph spec: rr needs d < n");
    return spec;
  }
  throw InvalidInput("graph spec: unrecognized '" + std::string(text) + "'");
}

inline Graph make_graph(std::string_view spec_text) { return generate(parse_graph_spec(spec_text)); }

// ---------------------------------------------------------------------------
// Spectral radius of the adjacency matrix.
//
// Power iteration on A + I: the shift keeps bipartite graphs (eigenvalues +r
// and -r) from oscillating, and for a nonnegative matrix the Perron value is
// the spectral radius.
inline double adjacency_spectral_radius(const Graph& g, double tol = 1e-12,
                                        int max_iterations = 1000000) {
  if (!(tol > 0)) throw InvalidInput("spectral radius: tol must be positive");
  if (!g.connected()) throw InvalidInput("spectral radius: graph must be connected");
  const int n = g.vertex_count();
  if (g.edge_count() == 0) return 0.0;
  std::vector<double> x(n), y(n);
  for (int v = 0; v < n; ++v) x[v] = 1.0 + 0.01 * static_cast<double>(v % 7);
  auto normalize = [](std::vector<double>& z) {
    double s = 0.0;
    for (double a : z) s += a * a;
    s = std::sqrt(s);
    for (double& a : z) a /= s;
  };
  normalize(x);
  for (int it = 0; it < max_iterations; ++it) {
    for (int v = 0; v < n; ++v) {
      double acc = x[v];
      for (int w : g.neighbors(v)) acc += x[w];
      y[v] = acc;
    }
    double rayleigh = 0.0;
    for (int v = 0; v < n; ++v) rayleigh += x[v] * y[v];
    double residual = 0.0;
    for (int v = 0; v < n; ++v) residual += (y[v] - rayleigh * x[v]) * (y[v] - rayleigh * x[v]);
    // For a symmetric matrix the Rayleigh quotient is within the residual
    // norm of an eigenvalue; the positive start vector pins it to Perron.
    if (std::sqrt(residual) < tol) return rayleigh - 1.0;
    x = y;
    normalize(x);
  }
  throw NotConverged("spectral radius: power iteration did not converge");
}

}  // namespace isingsaw
