#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "isingsaw/exact_ising.hpp"
#include "isingsaw/rng.hpp"
#include "isingsaw/tree_inference.hpp"

using namespace isingsaw;

TEST(TreeModel, RejectsBadParents) {
  EXPECT_THROW(TreeModel({}, 0.1), InvalidInput);
  EXPECT_THROW(TreeModel({0}, 0.1), InvalidInput);
  EXPECT_THROW(TreeModel({-1, 1}, 0.1), InvalidInput);
  EXPECT_THROW(TreeModel({-1, 0, 3, 0}, 0.1), InvalidInput);
  TreeModel tm({-1, 0}, 0.1);
  EXPECT_THROW(tm.set_field(1, kInf), InvalidInput);
  const Pin clash[] = {{1, 1}, {1, -1}};
  EXPECT_THROW(tm.with_pins(clash), ZeroProbability);
}

TEST(RootMagnetization, PathPinnedAtDistanceTwo) {
  const TreeModel path({-1, 0, 1}, 0.5);
  const Pin end{2, 1};
  EXPECT_NEAR(root_magnetization(path, std::span(&end, 1)), 0.21355226703407257, 1e-14);
  EXPECT_NEAR(root_magnetization(path, std::span(&end, 1)), std::pow(std::tanh(0.5), 2), 1e-15);
}

TEST(RootMagnetization, StarWithMinusLeaf) {
  const double s = 0.7;
  TreeModel star({-1, 0, 0, 0}, s);
  const Pin leaf{2, -1};
  EXPECT_NEAR(root_magnetization(star, std::span(&leaf, 1)), -std::tanh(s), 1e-14);
  EXPECT_NEAR(root_magnetization(star), 0.0, 1e-15);
}

TEST(RootMagnetization, PinnedRoot) {
  const TreeModel tm({-1, 0}, 0.3);
  const Pin root{0, -1};
  EXPECT_EQ(root_magnetization(tm, std::span(&root, 1)), -1.0);
}

TEST(RootMagnetization, MatchesEnumerationOnRandomTrees) {
  CounterRng rng = CounterRng::stream({21});
  for (int trial = 0; trial < 60; ++trial) {
    const int nodes = 2 + static_cast<int>(rng.below(15));
    const double s = 1.2 * rng.uniform();
    TreeModel tm(random_tree_parents(nodes, 4, rng), s);
    for (int v = 0; v < nodes; ++v) tm.set_field(v, 0.8 * rng.normal());
    std::vector<Pin> pins;
    for (int v = 1; v < nodes; ++v) {
      if (rng.uniform() < 0.2) pins.push_back({v, rng.uniform() < 0.5 ? 1 : -1});
    }
    const TreeModel pinned = tm.with_pins(pins);
    const auto [g, params] = tree_as_graph(pinned);
    const ExactModel m(g, params);
    EXPECT_NEAR(root_magnetization(pinned), magnetization(m, 0), 1e-12);
    EXPECT_NEAR(tree_log_partition(pinned), m.log_z(), 1e-10);
    for (int v = 0; v < nodes; ++v) {
      EXPECT_NEAR(node_plus_probability(pinned, v), 0.5 * (1 + magnetization(m, v)), 1e-12);
    }
  }
}

TEST(CondStats, CovarianceMatchesEnumeration) {
  CounterRng rng = CounterRng::stream({22});
  for (int trial = 0; trial < 30; ++trial) {
    const int nodes = 3 + static_cast<int>(rng.below(8));
    TreeModel tm(random_tree_parents(nodes, 3, rng), 0.5 * rng.uniform());
    for (int v = 0; v < nodes; ++v) tm.set_field(v, rng.normal());
    const auto [g, params] = tree_as_graph(tm);
    const ExactModel m(g, params);
    for (int v = 1; v < nodes; ++v) {
      const CondStats st = cond_stats(tm, v);
      EXPECT_NEAR(st.covariance(), covariance(m, 0, v), 1e-12);
      EXPECT_NEAR(st.mean(), magnetization(m, 0), 1e-12);
    }
  }
}

TEST(CondStats, RejectsPinnedNode) {
  const TreeModel tm = TreeModel({-1, 0}, 0.3).with_pins(std::vector<Pin>{{1, 1}});
  EXPECT_THROW(cond_stats(tm, 1), InvalidInput);
}

TEST(Telescoping, SumsToConditionalShift) {
  CounterRng rng = CounterRng::stream({23});
  const TreeModel tm(random_tree_parents(12, 3, rng), 0.4);
  const std::vector<int> order{11, 3, 7, 5};
  const auto inc = telescoping_increments(tm, order);
  std::vector<Pin> pins;
  for (int v : order) pins.push_back({v, 1});
  const double total = std::accumulate(inc.begin(), inc.end(), 0.0);
  EXPECT_NEAR(total, root_magnetization(tm, pins) - root_magnetization(tm), 1e-14);
  for (double x : inc) EXPECT_GE(x, -1e-15);
}

TEST(RootConditioning, HoldsOnSmallTrees) {
  CounterRng rng = CounterRng::stream({24});
  const double bc = critical_beta(4).value;
  for (int trial = 0; trial < 40; ++trial) {
    const TreeModel tm(random_tree_parents(12, 4, rng), bc * rng.uniform());
    std::vector<int> nodes;
    for (int v = 1; v < 12; ++v) {
      if (rng.uniform() < 0.3) nodes.push_back(v);
    }
    const Prop4Result r = prop4_check(tm, nodes, 4);
    EXPECT_TRUE(r.checked);
    EXPECT_TRUE(r.holds());
  }
}

TEST(RootConditioning, SkipsWhenRootNotCentered) {
  TreeModel tm({-1, 0, 0}, 0.2);
  tm.set_field(1, 0.5);
  const std::vector<int> nodes{2};
  const Prop4Result r = prop4_check(tm, nodes, 3);
  EXPECT_FALSE(r.hypothesis_holds);
  EXPECT_FALSE(r.checked);
  EXPECT_THROW(prop4_check(TreeModel({-1, 0}, 0.6), nodes, 3), InvalidInput);
  EXPECT_THROW(prop4_check(TreeModel({-1, 0, 0, 0, 0}, 0.1), nodes, 3), InvalidInput);
}

TEST(Weitz, TriangleAndFiveCycle) {
  const std::pair<const char*, double> cases[] = {{"k3", 0.3}, {"cycle:5", 0.5}};
  for (auto [spec, s] : cases) {
    const Graph g = make_graph(spec);
    for (int v = 0; v < g.vertex_count(); ++v) {
      for (int y = 0; y < g.vertex_count(); ++y) {
        const WeitzSides w = weitz_identity(g, v, y, s);
        EXPECT_NEAR(w.graph_side, w.tree_side, 1e-12) << spec << " v=" << v << " y=" << y;
      }
    }
  }
  // Triangle, root 0 given sigma_1 = +: four-term sum over (sigma_0, sigma_2).
  const double e = std::exp(4 * 0.3);
  const WeitzSides w = weitz_identity(make_graph("k3"), 0, 1, 0.3);
  EXPECT_NEAR(2 * w.tree_side - 1, (e - 1) / (e + 3), 1e-14);
}

TEST(Weitz, PetersenSampledPairs) {
  const Graph g = make_graph("petersen");
  for (int y : {1, 5, 7}) {
    const WeitzSides w = weitz_identity(g, 0, y, critical_beta(3).value);
    EXPECT_NEAR(w.graph_side, w.tree_side, 1e-12);
  }
}

TEST(RandomTree, RespectsDegreeCap) {
  CounterRng rng = CounterRng::stream({25});
  for (int trial = 0; trial < 50; ++trial) {
    const TreeModel tm(random_tree_parents(12, 3, rng), 0.1);
    EXPECT_LE(tm.max_degree(), 3);
  }
  EXPECT_THROW(random_tree_parents(5, 1, rng), InvalidInput);
}
