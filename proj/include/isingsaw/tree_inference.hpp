#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "isingsaw/bounds.hpp"
#include "isingsaw/common.hpp"
#include "isingsaw/exact_ising.hpp"
#include "isingsaw/graph.hpp"
#include "isingsaw/rng.hpp"
#include "isingsaw/saw_tree.hpp"

namespace isingsaw {

/// Ising model on a rooted tree with coupling `coupling` on every edge,
/// finite per-node fields and a set of pinned nodes. Nodes are indexed so
/// that parent[i] < i; node 0 is the root.
class TreeModel {
 public:
  TreeModel(std::vector<int> parents, double coupling)
      : parent_(std::move(parents)), coupling_(coupling) {
    if (parent_.empty()) throw InvalidInput("tree: at least one node required");
    if (parent_[0] != -1) throw InvalidInput("tree: node 0 must be the root");
    if (!std::isfinite(coupling_)) throw InvalidInput("tree: coupling must be finite");
    children_.resize(parent_.size());
    depth_.assign(parent_.size(), 0);
    for (std::size_t i = 1; i < parent_.size(); ++i) {
      if (parent_[i] < 0 || parent_[i] >= static_cast<int>(i)) {
        throw InvalidInput("tree: parent index must precede child");
      }
      children_[parent_[i]].push_back(static_cast<int>(i));
      depth_[i] = depth_[parent_[i]] + 1;
    }
    field_.assign(parent_.size(), 0.0);
    pin_.assign(parent_.size(), 0);
  }

  // SAW tree with its construction pins applied.
  static TreeModel from_saw(const SawTree& t, double coupling) {
    std::vector<int> parents(t.size());
    for (const auto& node : t.nodes) parents[node.id] = node.parent;
    TreeModel tm(std::move(parents), coupling);
    for (const auto& node : t.nodes) tm.pin_[node.id] = static_cast<std::int8_t>(node.pin);
    return tm;
  }

  int size() const { return static_cast<int>(parent_.size()); }
  int parent(int v) const { return parent_.at(v); }
  const std::vector<int>& children(int v) const { return children_.at(v); }
  int depth(int v) const { return depth_.at(v); }
  double coupling() const { return coupling_; }
  double field(int v) const { return field_.at(v); }
  int pin(int v) const { return pin_.at(v); }

  int degree(int v) const {
    return static_cast<int>(children_.at(v).size()) + (parent_.at(v) >= 0 ? 1 : 0);
  }

  int max_degree() const {
    int d = 0;
    for (int v = 0; v < size(); ++v) d = std::max(d, degree(v));
    return d;
  }

  void set_field(int v, double h) {
    if (!std::isfinite(h)) throw InvalidInput("tree: node fields must be finite; use pins");
    field_.at(v) = h;
  }

  TreeModel with_pins(std::span<const Pin> pins) const {
    TreeModel out = *this;
    for (const Pin& p : pins) {
      if (p.site < 0 || p.site >= size()) throw InvalidInput("tree: pinned node out of range");
      if (p.sign != 1 && p.sign != -1) throw InvalidInput("tree: pin sign must be +1 or -1");
      if (out.pin_[p.site] != 0 && out.pin_[p.site] != p.sign) {
        throw ZeroProbability("tree: conditioning event has probability zero (node " +
                              std::to_string(p.site) + " pinned both ways)");
      }
      out.pin_[p.site] = static_cast<std::int8_t>(p.sign);
    }
    return out;
  }

 private:
  std::vector<int> parent_;
  std::vector<std::vector<int>> children_;
  std::vector<int> depth_;
  double coupling_ = 0.0;
  std::vector<double> field_;
  std::vector<std::int8_t> pin_;
};

namespace detail {

// Upward pass: msg[v] = {log Z_v(sigma_v = -), log Z_v(sigma_v = +)} over the
// subtree of v. Returns the root message.
inline std::array<double, 2> root_message(const TreeModel& tm) {
  const int n = tm.size();
  std::vector<std::array<double, 2>> msg(n);
  const double b = tm.coupling();
  for (int v = n - 1; v >= 0; --v) {
    // Pinned nodes carry no field term, matching the enumeration convention.
    const double h = tm.pin(v) != 0 ? 0.0 : tm.field(v);
    std::array<double, 2> m{-h, h};
    for (int c : tm.children(v)) {
      const auto& mc = msg[c];
      // sum over sigma_c of exp(b sigma_v sigma_c) Z_c(sigma_c)
      m[0] += log_sum_exp(b + mc[0], -b + mc[1]);
      m[1] += log_sum_exp(-b + mc[0], b + mc[1]);
    }
    if (tm.pin(v) > 0) m[0] = -kInf;
    if (tm.pin(v) < 0) m[1] = -kInf;
    msg[v] = m;
  }
  return msg[0];
}

inline double magnetization_from(const std::array<double, 2>& m) {
  if (m[0] == -kInf && m[1] == -kInf) throw ZeroProbability("tree: zero-probability pin set");
  if (m[0] == -kInf) return 1.0;
  if (m[1] == -kInf) return -1.0;
  return std::tanh(0.5 * (m[1] - m[0]));
}

}  // namespace detail

// log Z over free nodes; pinned nodes contribute couplings but no field term.
inline double tree_log_partition(const TreeModel& tm) {
  const auto m = detail::root_message(tm);
  return log_sum_exp(m[0], m[1]);
}

/// Exact E(sigma_root | pins) by leaf-to-root message passing.
inline double root_magnetization(const TreeModel& tm) {
  return detail::magnetization_from(detail::root_message(tm));
}

inline double root_magnetization(const TreeModel& tm, std::span<const Pin> extra_pins) {
  return root_magnetization(tm.with_pins(extra_pins));
}

// P(sigma_v = +) under the model's pins.
inline double node_plus_probability(const TreeModel& tm, int v) {
  if (tm.pin(v) != 0) return tm.pin(v) > 0 ? 1.0 : 0.0;
  const Pin plus{v, 1};
  const double log_plus = tree_log_partition(tm.with_pins(std::span(&plus, 1))) + tm.field(v);
  return std::exp(log_plus - tree_log_partition(tm));
}

struct CondStats {
  double p = 0.0;        // P(sigma_v = +)
  double m_plus = 0.0;   // E(sigma_root | sigma_v = +)
  double m_minus = 0.0;  // E(sigma_root | sigma_v = -)

  double mean() const { return p * m_plus + (1 - p) * m_minus; }
  double covariance() const { return 2.0 * p * (1 - p) * (m_plus - m_minus); }
  // E(sigma_root | sigma_v = +) - E(sigma_root)
  double plus_increment() const { return (1 - p) * (m_plus - m_minus); }
};

inline CondStats cond_stats(const TreeModel& tm, int v) {
  if (v < 0 || v >= tm.size()) throw InvalidInput("cond_stats: node out of range");
  if (tm.pin(v) != 0) throw InvalidInput("cond_stats: node " + std::to_string(v) + " is pinned");
  const Pin plus{v, 1}, minus{v, -1};
  CondStats st;
  st.p = node_plus_probability(tm, v);
  st.m_plus = root_magnetization(tm, std::span(&plus, 1));
  st.m_minus = root_magnetization(tm, std::span(&minus, 1));
  return st;
}

/// Increments E_{h_{i-1}}(sigma_root | sigma_{v_i} = +) - E_{h_{i-1}}(sigma_root)
/// for plus-pins added one at a time in the given order. They sum to the full
/// conditional magnetization minus the unconditioned one.
inline std::vector<double> telescoping_increments(const TreeModel& tm, std::span<const int> order) {
  std::vector<double> out;
  TreeModel current = tm;
  double before = root_magnetization(current);
  for (int v : order) {
    const Pin plus{v, 1};
    current = current.with_pins(std::span(&plus, 1));
    const double after = root_magnetization(current);
    out.push_back(after - before);
    before = after;
  }
  return out;
}

struct Prop4Result {
  double lhs = 0.0;  // E_h(sigma_root | sigma_{v_i} = + for all i)
  double rhs = 0.0;  // 50 sum_i tanh(s)^depth(v_i)
  double unconditioned = 0.0;
  bool hypothesis_holds = true;  // |E_h(sigma_root)| <= 1e-9
  bool checked = false;
  bool holds(double tol = 1e-9) const { return !checked || lhs <= rhs + tol; }
};

/// Both sides of the root-conditioning bound for plus-pins at `nodes`, on a
/// tree of maximum degree d with coupling s in [0, beta_c(d)]. When the
/// unconditioned root magnetization is not zero the check is skipped.
inline Prop4Result prop4_check(const TreeModel& tm, std::span<const int> nodes, int d) {
  const double s = tm.coupling();
  if (s < 0) throw InvalidInput("prop4_check: coupling must be nonnegative");
  if (s > critical_beta(d).value * (1 + 1e-15)) {
    throw InvalidInput("prop4_check: coupling exceeds beta_c(d)");
  }
  if (tm.max_degree() > d) throw InvalidInput("prop4_check: tree degree exceeds d");
  Prop4Result r;
  r.unconditioned = root_magnetization(tm);
  r.hypothesis_holds = std::abs(r.unconditioned) <= 1e-9;
  const double theta = std::tanh(s);
  std::vector<Pin> pins;
  for (int v : nodes) {
    pins.push_back({v, 1});
    r.rhs += 50.0 * std::pow(theta, tm.depth(v));
  }
  if (!r.hypothesis_holds) return r;
  r.lhs = nodes.empty() ? r.unconditioned : root_magnetization(tm, pins);
  r.checked = true;
  return r;
}

struct WeitzSides {
  double graph_side = 0.0;  // P_G(sigma_v = + | sigma_y = +)
  double tree_side = 0.0;   // P_T(sigma_root = + | conditions for y)
  std::size_t tree_nodes = 0;
};

inline WeitzSides weitz_identity(const Graph& g, int v, int y, double s,
                                 std::size_t node_cap = kDefaultSawNodeCap,
                                 int enumeration_cap = kDefaultEnumerationCap) {
  const ExactModel m(g, IsingParams::zero_field(g.vertex_count(), s), enumeration_cap);
  const Pin plus_y{y, 1};
  WeitzSides out;
  out.graph_side = 0.5 * (1.0 + conditional_magnetization(m, v, std::span(&plus_y, 1)));
  const SawTree tree = build_saw_tree(g, v, node_cap);
  out.tree_nodes = tree.size();
  const TreeModel tm = TreeModel::from_saw(tree, s);
  const auto pins = condition_for(tree, y);
  out.tree_side = 0.5 * (1.0 + root_magnetization(tm, pins));
  return out;
}

// ---------------------------------------------------------------------------

/// The tree as a Graph plus IsingParams (pins become infinite fields), for
/// cross-checking against enumeration.
inline std::pair<Graph, IsingParams> tree_as_graph(const TreeModel& tm) {
  std::vector<Edge> edges;
  for (int v = 1; v < tm.size(); ++v) edges.emplace_back(tm.parent(v), v);
  Graph g(tm.size(), edges);
  IsingParams p{tm.coupling(), std::vector<double>(tm.size())};
  for (int v = 0; v < tm.size(); ++v) {
    p.field[v] = tm.pin(v) > 0 ? kInf : tm.pin(v) < 0 ? -kInf : tm.field(v);
  }
  return {std::move(g), std::move(p)};
}

/// Random recursive tree: node i attaches to a uniformly chosen earlier node
/// whose degree is still below max_degree.
inline std::vector<int> random_tree_parents(int nodes, int max_degree, CounterRng& rng) {
  if (nodes <= 0 || max_degree < 1 || (nodes > 2 && max_degree < 2)) {
    throw InvalidInput("random tree: infeasible size/degree");
  }
  std::vector<int> parents(nodes, -1);
  std::vector<int> degree(nodes, 0);
  std::vector<int> open;
  for (int i = 1; i < nodes; ++i) {
    open.clear();
    for (int j = 0; j < i; ++j) {
      if (degree[j] < max_degree) open.push_back(j);
    }
    const int p = open[rng.below(open.size())];
    parents[i] = p;
    ++degree[p];
    ++degree[i];
  }
  return parents;
}

}  // namespace isingsaw
