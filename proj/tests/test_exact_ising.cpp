#include <gtest/gtest.h>

#include <bit>
#include <cmath>
#include <numeric>

#include "isingsaw/exact_ising.hpp"
#include "isingsaw/rng.hpp"

using namespace isingsaw;

namespace {

const Graph kEdge = make_graph("path:2");

ExactModel edge_model(double beta, double h0 = 0.0, double h1 = 0.0) {
  return ExactModel(kEdge, IsingParams{beta, {h0, h1}});
}

// Second implementation of Ent(f): plain sums over the enumerated states.
double entropy_by_loops(const ExactModel& m, const std::vector<double>& f) {
  double ef = 0.0, eflogf = 0.0;
  for (std::uint32_t s = 0; s < m.state_count(); ++s) {
    const double p = std::exp(m.log_weight(s) - m.log_z());
    ef += p * f[s];
    if (f[s] > 0) eflogf += p * f[s] * std::log(f[s]);
  }
  return eflogf - ef * std::log(ef);
}

}  // namespace

TEST(ExactModel, SingleEdgePartitionFunction) {
  EXPECT_NEAR(std::exp(edge_model(0.0).log_z()), 4.0, 1e-12);
  const ExactModel free_edge = edge_model(0.0);
  for (double p : free_edge.probabilities()) EXPECT_NEAR(p, 0.25, 1e-15);
  const double b = 0.7;
  EXPECT_NEAR(std::exp(edge_model(b).log_z()), 2 * std::exp(b) + 2 * std::exp(-b), 1e-12);
}

TEST(ExactModel, PinnedVertexRestrictsStates) {
  const double b = 0.4;
  const ExactModel m = edge_model(b, 0.0, kInf);
  ASSERT_EQ(m.free_count(), 1);
  ASSERT_EQ(m.state_count(), 2u);
  // state 1 has vertex 0 = +, agreeing with the pinned +.
  EXPECT_NEAR(m.log_weight(1), b, 1e-15);
  EXPECT_NEAR(m.log_weight(0), -b, 1e-15);
}

TEST(ExactModel, StateLayoutIsLittleEndianOverFreeVertices) {
  const Graph g = make_graph("path:3");
  const ExactModel m(g, IsingParams{0.1, {0.0, -kInf, 0.0}});
  EXPECT_EQ(m.free_vertices(), (std::vector<int>{0, 2}));
  EXPECT_EQ(m.spin(0b01, 0), 1);
  EXPECT_EQ(m.spin(0b01, 2), -1);
  EXPECT_EQ(m.spin(0b10, 2), 1);
  EXPECT_EQ(m.spin(0b11, 1), -1);
}

TEST(ExactModel, ProbabilitiesSumToOne) {
  CounterRng rng = CounterRng::stream({3});
  for (const char* spec : {"k4", "cycle:7", "petersen", "rr:n=12,d=3,seed=2"}) {
    const Graph g = make_graph(spec);
    IsingParams p{0.45, std::vector<double>(g.vertex_count())};
    for (double& h : p.field) h = rng.normal();
    const ExactModel m(g, p);
    const auto probs = m.probabilities();
    EXPECT_NEAR(std::accumulate(probs.begin(), probs.end(), 0.0), 1.0, 1e-12) << spec;
  }
}

TEST(ExactModel, Errors) {
  EXPECT_THROW(ExactModel(kEdge, IsingParams{0.1, {0.0}}), InvalidInput);
  EXPECT_THROW(ExactModel(kEdge, IsingParams{-0.1, {0.0, 0.0}}), InvalidInput);
  EXPECT_THROW(ExactModel(kEdge, IsingParams{0.1, {NAN, 0.0}}), InvalidInput);
  EXPECT_THROW(ExactModel(make_graph("cycle:21"), IsingParams::zero_field(21, 0.1)), CapExceeded);
  EXPECT_THROW(ExactModel(make_graph("cycle:8"), IsingParams::zero_field(8, 0.1), 7), CapExceeded);
  const Pin plus{0, 1}, minus{0, -1};
  const IsingParams pinned = IsingParams::zero_field(2, 0.1).with_pins(std::span(&plus, 1));
  EXPECT_THROW(pinned.with_pins(std::span(&minus, 1)), ZeroProbability);
}

TEST(Magnetization, Examples) {
  const ExactModel single(Graph(1), IsingParams{0.0, {0.8}});
  EXPECT_NEAR(magnetization(single, 0), std::tanh(0.8), 1e-14);
  EXPECT_NEAR(magnetization(edge_model(0.5, 0.0, kInf), 0), std::tanh(0.5), 1e-14);
  EXPECT_EQ(magnetization(edge_model(0.5, 0.0, kInf), 1), 1.0);
}

TEST(Magnetization, ZeroFieldSymmetry) {
  for (const char* spec : {"k4", "cycle:6", "petersen", "cube"}) {
    const Graph g = make_graph(spec);
    const ExactModel m(g, IsingParams::zero_field(g.vertex_count(), 0.37));
    for (int v = 0; v < g.vertex_count(); ++v) EXPECT_NEAR(magnetization(m, v), 0.0, 1e-12);
    const std::uint32_t all = m.state_count() - 1;
    for (std::uint32_t s = 0; s < m.state_count(); ++s) {
      ASSERT_NEAR(m.log_weight(s), m.log_weight(all ^ s), 1e-12);
    }
  }
}

TEST(Correlation, Examples) {
  const ExactModel m = edge_model(0.6);
  EXPECT_EQ(correlation(m, 1, 1), 1.0);
  EXPECT_NEAR(correlation(m, 0, 1), std::tanh(0.6), 1e-14);
  const ExactModel c4(make_graph("cycle:4"), IsingParams::zero_field(4, 0.3));
  EXPECT_NEAR(correlation(c4, 0, 1), 0.3137745644616406887, 1e-14);
  EXPECT_NEAR(correlation(c4, 0, 2), 0.1685124939791212426, 1e-14);
}

TEST(Correlation, GriffithsNonnegative) {
  for (const char* spec : {"k5", "cycle:7", "petersen", "rr:n=10,d=4,seed=1"}) {
    const Graph g = make_graph(spec);
    for (double b : {0.05, 0.3, 1.0}) {
      const ExactModel m(g, IsingParams::zero_field(g.vertex_count(), b));
      for (double c : correlation_matrix(m)) EXPECT_GE(c, -1e-12) << spec;
    }
  }
}

TEST(Correlation, MatrixMatchesPairwise) {
  const Graph g = make_graph("prism");
  const ExactModel m(g, IsingParams{0.3, {0.1, -0.2, 0.0, 0.5, kInf, 0.0}});
  const auto c = correlation_matrix(m);
  for (int x = 0; x < 6; ++x) {
    for (int y = 0; y < 6; ++y) EXPECT_NEAR(c[x * 6 + y], correlation(m, x, y), 1e-13);
  }
}

TEST(Covariance, TwoSpinClosedForm) {
  // Single edge with uniform field h: weights over (++, +-, -+, --) are
  // e^{b+2h}, e^{-b}, e^{-b}, e^{b-2h}.
  const double b = 0.45, h = 0.3;
  const ExactModel m = edge_model(b, h, h);
  const double wpp = std::exp(b + 2 * h), wpm = std::exp(-b), wmm = std::exp(b - 2 * h);
  const double z = wpp + 2 * wpm + wmm;
  const double corr = (wpp + wmm - 2 * wpm) / z;
  const double mag = (wpp - wmm) / z;
  EXPECT_NEAR(covariance(m, 0, 1), corr - mag * mag, 1e-14);
  EXPECT_NEAR(covariance(edge_model(b), 0, 1), std::tanh(b), 1e-14);
  EXPECT_NEAR(covariance(edge_model(b), 0, 0), 1.0, 1e-14);
}

TEST(Covariance, BoundedByZeroFieldCorrelation) {
  CounterRng rng = CounterRng::stream({17});
  for (const char* spec : {"k4", "cycle:6", "prism"}) {
    const Graph g = make_graph(spec);
    const int n = g.vertex_count();
    const ExactModel zero(g, IsingParams::zero_field(n, 0.35));
    const auto c0 = correlation_matrix(zero);
    for (int draw = 0; draw < 50; ++draw) {
      IsingParams p{0.35, std::vector<double>(n)};
      for (double& h : p.field) h = 1.5 * rng.normal();
      const ExactModel m(g, p);
      for (int u = 0; u < n; ++u) {
        for (int v = 0; v < n; ++v) ASSERT_LE(covariance(m, u, v), c0[u * n + v] + 1e-10);
      }
    }
  }
}

TEST(ConditionalMagnetization, Examples) {
  const Graph path = make_graph("path:3");
  const ExactModel m(path, IsingParams::zero_field(3, 0.4));
  const Pin b_plus{2, 1}, self{0, 1};
  EXPECT_NEAR(conditional_magnetization(m, 0, std::span(&b_plus, 1)), std::pow(std::tanh(0.4), 2), 1e-14);
  EXPECT_EQ(conditional_magnetization(m, 0, std::span(&self, 1)), 1.0);
  EXPECT_EQ(conditional_magnetization(m, 0, {}), magnetization(m, 0));
  const Pin clash[] = {{1, 1}, {1, -1}};
  EXPECT_THROW(conditional_magnetization(m, 0, clash), ZeroProbability);
}

TEST(Susceptibility, Examples) {
  EXPECT_NEAR(susceptibility(make_graph("petersen"), 0.0).chi, 1.0, 1e-12);
  EXPECT_NEAR(susceptibility(kEdge, 0.3).chi, 1.0 + std::tanh(0.3), 1e-14);
  EXPECT_NEAR(susceptibility(make_graph("k4"), 0.2).chi, 1.8519263723007078194, 1e-13);
}

TEST(Susceptibility, RowSumsMatchCorrelationMatrix) {
  const Graph g = make_graph("rr:n=10,d=3,seed=3");
  const ExactModel m(g, IsingParams::zero_field(10, 0.5));
  const auto c = correlation_matrix(m);
  const auto rows = correlation_row_sums(m);
  for (int x = 0; x < 10; ++x) {
    double acc = 0.0;
    for (int y = 0; y < 10; ++y) acc += c[x * 10 + y];
    EXPECT_NEAR(rows[x], acc, 1e-12);
  }
}

TEST(Entropy, Examples) {
  const ExactModel m(make_graph("cycle:4"), IsingParams::zero_field(4, 0.3));
  EXPECT_NEAR(entropy(m, std::vector<double>(16, 2.5)), 0.0, 1e-14);
  std::vector<double> indicator(16, 0.0);
  indicator[5] = 1.0;
  const double p = m.probability(5);
  EXPECT_NEAR(entropy(m, indicator), -p * std::log(p), 1e-14);
  std::vector<double> negative(16, 1.0);
  negative[3] = -0.1;
  EXPECT_THROW(entropy(m, negative), InvalidInput);
  EXPECT_THROW(entropy(m, std::vector<double>(15, 1.0)), InvalidInput);
}

TEST(Entropy, MatchesSecondImplementation) {
  const ExactModel m = edge_model(0.8, 0.2, -0.5);
  CounterRng rng = CounterRng::stream({5});
  for (int i = 0; i < 100; ++i) {
    std::vector<double> f(4);
    for (double& x : f) x = std::exp(rng.normal());
    const double ent = entropy(m, f);
    EXPECT_NEAR(ent, entropy_by_loops(m, f), 1e-12);
    EXPECT_GE(ent, 0.0);
    std::vector<double> sq(4);
    for (int s = 0; s < 4; ++s) sq[s] = f[s] * f[s];
    EXPECT_NEAR(entropy_of_square(m, f), entropy(m, sq), 1e-12);
  }
}

TEST(DirichletE1, Examples) {
  const ExactModel single(Graph(1), IsingParams::zero_field(1, 0.0));
  EXPECT_NEAR(dirichlet_e1(single, std::vector<double>{0.0, 1.0}), 1.0, 1e-15);
  const ExactModel c4(make_graph("cycle:4"), IsingParams::zero_field(4, 0.3));
  EXPECT_EQ(dirichlet_e1(c4, std::vector<double>(16, 3.0)), 0.0);
}

TEST(DirichletE1, MatchesDoubleLoop) {
  const Graph g = make_graph("cycle:4");
  const ExactModel m(g, IsingParams{0.3, {0.2, 0.0, -0.4, 0.1}});
  CounterRng rng = CounterRng::stream({6});
  std::vector<double> f(16);
  for (double& x : f) x = rng.normal();
  // Sum over pairs of states differing in exactly one spin.
  double acc = 0.0;
  for (std::uint32_t s = 0; s < 16; ++s) {
    for (std::uint32_t t = 0; t < 16; ++t) {
      if (std::popcount(s ^ t) == 1) acc += m.probability(s) * (f[s] - f[t]) * (f[s] - f[t]);
    }
  }
  EXPECT_NEAR(dirichlet_e1(m, f), acc, 1e-12);
}
