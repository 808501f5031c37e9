#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "isingsaw/common.hpp"
#include "isingsaw/graph.hpp"

namespace isingsaw {

enum class PinMark : std::int8_t { free = 0, plus = 1, minus = -1 };

inline const char* to_string(PinMark p) {
  switch (p) {
    case PinMark::plus: return "plus";
    case PinMark::minus: return "minus";
    case PinMark::free: break;
  }
  return "free";
}

struct SawNode {
  int id = 0;
  int label = 0;    // source-graph vertex this node is a copy of
  int parent = -1;  // -1 at the root
  int depth = 0;
  PinMark pin = PinMark::free;
  std::vector<int> children;
};

/// Tree of self-avoiding walks from `source_root`, in depth-first preorder
/// (parents precede children, node 0 is the root).
///
/// A walk that steps onto a vertex w already on it closes a cycle. The copy
/// of w is then a pinned leaf: plus when the closing neighbor (the vertex the
/// walk enters w from) has a larger index than the neighbor through which the
/// walk first left w, minus otherwise.
struct SawTree {
  std::vector<SawNode> nodes;
  int root = 0;
  int source_root = 0;
  int source_vertex_count = 0;

  std::size_t size() const { return nodes.size(); }
};

inline constexpr std::size_t kDefaultSawNodeCap = 2000000;

inline SawTree build_saw_tree(const Graph& g, int v, std::size_t node_cap = kDefaultSawNodeCap) {
  if (v < 0 || v >= g.vertex_count()) throw InvalidInput("saw: root vertex out of range");
  if (node_cap == 0) throw InvalidInput("saw: node_cap must be positive");
  if (!g.connected()) throw InvalidInput("saw: graph must be connected");
  SawTree tree;
  tree.source_root = v;
  tree.source_vertex_count = g.vertex_count();

  // position_on_walk[w] = index of w in the current walk, or -1.
  std::vector<int> position_on_walk(g.vertex_count(), -1);
  std::vector<int> walk;

  auto add_node = [&](int label, int parent, PinMark pin) {
    if (tree.nodes.size() >= node_cap) {
      throw CapExceeded("saw: tree exceeds node cap " + std::to_string(node_cap));
    }
    SawNode node;
    node.id = static_cast<int>(tree.nodes.size());
    node.label = label;
    node.parent = parent;
    node.depth = parent < 0 ? 0 : tree.nodes[parent].depth + 1;
    node.pin = pin;
    tree.nodes.push_back(node);
    if (parent >= 0) tree.nodes[parent].children.push_back(node.id);
    return node.id;
  };

  struct Frame {
    int node;
    std::size_t next_neighbor;
  };
  std::vector<Frame> stack;
  stack.push_back({add_node(v, -1, PinMark::free), 0});
  walk.push_back(v);
  position_on_walk[v] = 0;

  while (!stack.empty()) {
    Frame& frame = stack.back();
    const int u = tree.nodes[frame.node].label;
    const auto& nbrs = g.neighbors(u);
    if (frame.next_neighbor == nbrs.size()) {
      position_on_walk[u] = -1;
      walk.pop_back();
      stack.pop_back();
      continue;
    }
    const int z = nbrs[frame.next_neighbor++];
    const int predecessor = walk.size() >= 2 ? walk[walk.size() - 2] : -1;
    if (z == predecessor) continue;
    const int pos = position_on_walk[z];
    const int parent = frame.node;  // frame may dangle after push_back
    if (pos >= 0) {
      const int left_via = walk[pos + 1];
      add_node(z, parent, u > left_via ? PinMark::plus : PinMark::minus);
      continue;
    }
    const int child = add_node(z, parent, PinMark::free);
    position_on_walk[z] = static_cast<int>(walk.size());
    walk.push_back(z);
    stack.push_back({child, 0});
  }
  return tree;
}

/// Conditions on the tree for the event sigma_y = +: every construction pin
/// keeps its sign and every free copy of y is pinned plus.
inline std::vector<Pin> condition_for(const SawTree& t, int y) {
  if (y < 0 || y >= t.source_vertex_count) throw InvalidInput("saw: vertex out of range");
  std::vector<Pin> pins;
  for (const auto& node : t.nodes) {
    if (node.pin != PinMark::free) {
      pins.push_back({node.id, static_cast<int>(node.pin)});
    } else if (node.label == y) {
      pins.push_back({node.id, 1});
    }
  }
  return pins;
}

inline std::vector<Pin> construction_pins(const SawTree& t) {
  std::vector<Pin> pins;
  for (const auto& node : t.nodes) {
    if (node.pin != PinMark::free) pins.push_back({node.id, static_cast<int>(node.pin)});
  }
  return pins;
}

inline std::string to_dot(const SawTree& t) {
  std::string out = "digraph saw {\n";
  for (const auto& node : t.nodes) {
    out += "  n" + std::to_string(node.id) + " [label=\"" + std::to_string(node.id) + ":" +
           std::to_string(node.label) + "\"";
    if (node.pin == PinMark::plus) out += ", style=filled, fillcolor=\"tomato\"";
    if (node.pin == PinMark::minus) out += ", style=filled, fillcolor=\"lightblue\"";
    out += "];\n";
  }
  for (const auto& node : t.nodes) {
    if (node.parent >= 0) {
      out += "  n" + std::to_string(node.parent) + " -> n" + std::to_string(node.id) + ";\n";
    }
  }
  out += "}\n";
  return out;
}

}  // namespace isingsaw
