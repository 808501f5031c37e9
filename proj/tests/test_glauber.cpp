#include <gtest/gtest.h>

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>

#include "isingsaw/bounds.hpp"
#include "isingsaw/glauber.hpp"
#include "oracles.hpp"

using namespace isingsaw;

namespace {

ExactModel zero_field(const char* spec, double beta) {
  const Graph g = make_graph(spec);
  return ExactModel(g, IsingParams::zero_field(g.vertex_count(), beta));
}

}  // namespace

TEST(Kernel, SingleSpin) {
  const ExactModel m(Graph(1), IsingParams::zero_field(1, 0.0));
  const ChainKernel k = build_kernel(m);
  EXPECT_DOUBLE_EQ(k(0, 1), 0.5);
  EXPECT_DOUBLE_EQ(k(1, 0), 0.5);
  EXPECT_DOUBLE_EQ(k(0, 0), 0.5);
}

TEST(Kernel, RowsSumToOneAndDetailedBalance) {
  const ExactModel m = zero_field("cycle:4", 0.4);
  const ChainKernel k = build_kernel(m);
  for (std::uint32_t s = 0; s < m.state_count(); ++s) {
    double row = 0.0;
    for (std::uint32_t t = 0; t < m.state_count(); ++t) {
      row += k(s, t);
      EXPECT_NEAR(m.probability(s) * k(s, t), m.probability(t) * k(t, s), 1e-15);
    }
    EXPECT_NEAR(row, 1.0, 1e-14);
  }
}

TEST(Kernel, StationaryWithFieldsAndPins) {
  const Graph g = make_graph("prism");
  const ExactModel m(g, IsingParams{0.6, {0.3, -kInf, 0.0, -0.7, 0.2, kInf}});
  const ChainKernel k = build_kernel(m);
  EXPECT_EQ(k.sites(), 4);
  std::vector<double> out(m.state_count());
  k.apply(m.probabilities(), out);
  for (std::uint32_t s = 0; s < m.state_count(); ++s) EXPECT_NEAR(out[s], m.probability(s), 1e-15);
}

TEST(Kernel, NonAdjacentStatesHaveZeroProbability) {
  const ExactModel m = zero_field("k4", 0.2);
  const ChainKernel k = build_kernel(m);
  EXPECT_EQ(k(0b0000, 0b0011), 0.0);
  EXPECT_GT(k(0b0000, 0b0001), 0.0);
}

TEST(Kernel, CapExceeded) {
  const ExactModel m = zero_field("cycle:15", 0.1);
  EXPECT_THROW(build_kernel(m), CapExceeded);
}

TEST(TvDistance, Examples) {
  const std::vector<double> a{0.25, 0.25, 0.25, 0.25};
  EXPECT_EQ(tv_distance(a, a), 0.0);
  EXPECT_DOUBLE_EQ(tv_distance(std::vector<double>{1, 0}, std::vector<double>{0, 1}), 1.0);
  EXPECT_DOUBLE_EQ(tv_distance(a, std::vector<double>{1, 0, 0, 0}), 0.75);
  EXPECT_THROW(tv_distance(a, std::vector<double>{1, 0}), InvalidInput);
}

TEST(MixingTime, SingleSpin) {
  const ExactModel m(Graph(1), IsingParams::zero_field(1, 0.0));
  EXPECT_EQ(exact_mixing_time(build_kernel(m), 0.25).t_mix, 1);
}

TEST(MixingTime, ProductChainOracle) {
  for (int n = 1; n <= 6; ++n) {
    const ExactModel m = zero_field(("path:" + std::to_string(n)).c_str(), 0.0);
    const ChainKernel k = build_kernel(m);
    for (double eps : {0.25, 0.1, 0.01}) {
      const MixingResult r = exact_mixing_time(k, eps);
      ASSERT_EQ(r.t_mix, oracle::product_chain_mixing_time(n, eps)) << n << " " << eps;
      for (std::size_t t = 0; t < r.worst_tv.size(); ++t) {
        ASSERT_NEAR(r.worst_tv[t], oracle::product_chain_tv(n, static_cast<int>(t)), 1e-12);
      }
    }
  }
}

TEST(MixingTime, CycleFourRegression) {
  const MixingResult r = exact_mixing_time(build_kernel(zero_field("cycle:4", 0.3)), 0.25);
  EXPECT_EQ(r.t_mix, 8);
  EXPECT_TRUE(r.exhaustive);
  EXPECT_EQ(r.worst_tv.size(), 9u);
  // Extreme starts attain the worst case here.
  EXPECT_TRUE(r.worst_start == 0 || r.worst_start == 15);
}

TEST(MixingTime, TvDecayIsMonotone) {
  for (const char* spec : {"k4", "cycle:6", "prism"}) {
    const MixingResult r = exact_mixing_time(build_kernel(zero_field(spec, 0.5)), 0.01);
    for (std::size_t t = 1; t < r.worst_tv.size(); ++t) ASSERT_LE(r.worst_tv[t], r.worst_tv[t - 1] + 1e-12);
  }
}

TEST(MixingTime, ThreadCountDoesNotMatter) {
  const ExactModel m = zero_field("rr:n=8,d=3,seed=1", 0.4);
  const ChainKernel k = build_kernel(m);
  const MixingResult a = exact_mixing_time(k, 0.25, 100000, 1);
  const MixingResult b = exact_mixing_time(k, 0.25, 100000, 3);
  EXPECT_EQ(a.t_mix, b.t_mix);
  EXPECT_EQ(a.worst_tv, b.worst_tv);
}

TEST(MixingTime, LargeModelsUseSampledStarts) {
  const MixingResult r = exact_mixing_time(build_kernel(zero_field("cycle:11", 0.2)), 0.25);
  EXPECT_FALSE(r.exhaustive);
  EXPECT_EQ(r.starts.size(), 102u);
}

TEST(SpectralGap, SingleSpinAndProductChain) {
  const ExactModel one(Graph(1), IsingParams::zero_field(1, 0.0));
  EXPECT_NEAR(spectral_gap(build_kernel(one)), 1.0, 1e-10);
  for (int n = 2; n <= 4; ++n) {
    const ExactModel m = zero_field(("path:" + std::to_string(n)).c_str(), 0.0);
    EXPECT_NEAR(spectral_gap(build_kernel(m)), 1.0 / n, 1e-9) << n;
  }
}

TEST(SpectralGap, MatchesDenseEigendecomposition) {
  for (const char* spec : {"cycle:4", "k4", "path:4"}) {
    const ExactModel m = zero_field(spec, 0.45);
    const ChainKernel k = build_kernel(m);
    const int states = static_cast<int>(m.state_count());
    Eigen::MatrixXd sym(states, states);
    for (int s = 0; s < states; ++s) {
      for (int t = 0; t < states; ++t) {
        sym(s, t) = std::sqrt(m.probability(s)) * k(s, t) / std::sqrt(m.probability(t));
      }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(sym);
    const auto& ev = solver.eigenvalues();  // ascending
    EXPECT_NEAR(ev(states - 1), 1.0, 1e-12);
    EXPECT_GE(ev(0), -1e-12);
    EXPECT_NEAR(spectral_gap(k), 1.0 - ev(states - 2), 1e-9) << spec;
  }
}

TEST(Step, FlipProbabilityIsHalfAtZeroCoupling) {
  const Graph g = make_graph("k4");
  const IsingParams p = IsingParams::zero_field(4, 0.0);
  const GlauberSampler sampler(g, p);
  const SpinConfig state{1, -1, 1, 1};
  for (int v = 0; v < 4; ++v) EXPECT_DOUBLE_EQ(sampler.flip_probability(state, v), 0.5);

  const ExactModel m(g, p);
  CounterRng rng = CounterRng::stream({31});
  SpinConfig s(4, 1);
  const int steps = 100000;
  int flips = 0;
  for (int i = 0; i < steps; ++i) {
    const SpinConfig before = s;
    const int v = step(s, m, rng);
    flips += s[v] != before[v];
  }
  const double sigma = std::sqrt(0.25 / steps);
  EXPECT_NEAR(static_cast<double>(flips) / steps, 0.5, 3 * sigma);
}

TEST(Step, LocalMatchesGlobalWeights) {
  CounterRng rng = CounterRng::stream({32});
  for (const char* spec : {"cycle:7", "petersen", "rr:n=10,d=4,seed=1"}) {
    const Graph g = make_graph(spec);
    const int n = g.vertex_count();
    IsingParams p{0.7, std::vector<double>(n)};
    for (double& h : p.field) h = rng.normal();
    const ExactModel m(g, p);
    const GlauberSampler sampler(g, p);
    for (int trial = 0; trial < 50; ++trial) {
      const auto state = static_cast<std::uint32_t>(rng.below(m.state_count()));
      SpinConfig spins(n);
      for (int v = 0; v < n; ++v) spins[v] = static_cast<std::int8_t>(m.spin(state, v));
      for (int v = 0; v < n; ++v) {
        const double w = m.log_weight(state);
        const double w_flip = m.log_weight(state ^ (1u << v));
        const double global = std::exp(w_flip) / (std::exp(w) + std::exp(w_flip));
        ASSERT_NEAR(sampler.flip_probability(spins, v), global, 1e-12);
      }
    }
  }
}

TEST(Step, PinnedSitesNeverMove) {
  const Graph g = make_graph("cycle:5");
  const IsingParams p{0.5, {kInf, 0.0, 0.0, -kInf, 0.0}};
  const GlauberSampler sampler(g, p);
  CounterRng rng = CounterRng::stream({33});
  CounterRng unused;
  SpinConfig s = initial_config(p, StartKind::random, rng);
  EXPECT_EQ(s[0], 1);
  EXPECT_EQ(s[3], -1);
  for (int i = 0; i < 1000; ++i) {
    const int v = sampler.step(s, rng);
    ASSERT_NE(v, 0);
    ASSERT_NE(v, 3);
  }
  EXPECT_EQ(s[0], 1);
  EXPECT_EQ(s[3], -1);
  EXPECT_EQ(initial_config(p, StartKind::all_minus, unused)[0], 1);
}

TEST(Coupling, OrderPreservedEveryStep) {
  for (const char* spec : {"k4", "cycle:8", "petersen"}) {
    const Graph g = make_graph(spec);
    const IsingParams p = IsingParams::zero_field(g.vertex_count(), critical_beta(3).value);
    const GlauberSampler sampler(g, p);
    CounterRng rng = CounterRng::stream({34});
    CounterRng unused;
    SpinConfig up = initial_config(p, StartKind::all_plus, unused);
    SpinConfig down = initial_config(p, StartKind::all_minus, unused);
    for (int i = 0; i < 5000; ++i) {
      sampler.coupled_step(up, down, rng);
      for (std::size_t v = 0; v < up.size(); ++v) ASSERT_GE(up[v], down[v]);
    }
  }
  ChainRunConfig cfg;
  cfg.replicas = 200;
  cfg.seed = 5;
  const Graph g = make_graph("cycle:10");
  const CouplingStats st = monotone_coupling_time(g, IsingParams::zero_field(10, 0.8), cfg);
  EXPECT_EQ(st.order_violations, 0);
  EXPECT_EQ(st.censored, 0);
}

TEST(Coupling, CouponCollectorAtZeroCoupling) {
  const int n = 8;
  ChainRunConfig cfg;
  cfg.replicas = 1000;
  cfg.seed = 77;
  const CouplingStats st = monotone_coupling_time(make_graph("cycle:8"), IsingParams::zero_field(n, 0.0), cfg);
  ASSERT_EQ(st.censored, 0);
  // Mean n H_n with the coupon-collector standard deviation below n pi/sqrt(6).
  const double sd = n * M_PI / std::sqrt(6.0);
  EXPECT_NEAR(st.mean, n * oracle::harmonic(n), 3 * sd / std::sqrt(1000.0));
  // Sample median within the oracle quantiles at 0.5 -/+ 3 sigma.
  const double band = 3 * std::sqrt(0.25 / cfg.replicas);
  EXPECT_GE(st.median, oracle::coupon_quantile(n, 0.5 - band));
  EXPECT_LE(st.median, oracle::coupon_quantile(n, 0.5 + band));
}

TEST(Coupling, BoundsExactTv) {
  const Graph g = make_graph("cycle:6");
  const double beta = 0.5;
  const ExactModel m(g, IsingParams::zero_field(6, beta));
  const MixingResult r = exact_mixing_time(build_kernel(m), 0.05);
  ChainRunConfig cfg;
  cfg.replicas = 2000;
  cfg.seed = 3;
  const CouplingStats st = monotone_coupling_time(g, m.params(), cfg);
  for (std::size_t t = 0; t < r.worst_tv.size(); ++t) {
    const double p = st.uncoalesced_fraction(static_cast<long long>(t));
    const double slack = 3 * std::sqrt(p * (1 - p) / cfg.replicas) + 1.0 / cfg.replicas;
    EXPECT_LE(r.worst_tv[t], p + slack) << "t=" << t;
  }
}

TEST(Coupling, ReproducibleAcrossThreadCounts) {
  ChainRunConfig cfg;
  cfg.replicas = 64;
  cfg.seed = 12;
  const Graph g = make_graph("rr:n=20,d=3,seed=1");
  const IsingParams p = IsingParams::zero_field(20, 0.3);
  const CouplingStats a = monotone_coupling_time(g, p, cfg, 1);
  const CouplingStats b = monotone_coupling_time(g, p, cfg, 4);
  EXPECT_EQ(a.times, b.times);
  EXPECT_EQ(a.median, b.median);
}

TEST(Coupling, BudgetExhaustionIsReported) {
  ChainRunConfig cfg;
  cfg.replicas = 10;
  cfg.steps = 5;
  const CouplingStats st = monotone_coupling_time(make_graph("cycle:10"), IsingParams::zero_field(10, 0.5), cfg);
  EXPECT_EQ(st.censored, 10);
  EXPECT_TRUE(std::isinf(st.median));
}
