#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"

#include "isingsaw/bounds.hpp"
#include "isingsaw/exact_ising.hpp"
#include "isingsaw/glauber.hpp"
#include "isingsaw/graph.hpp"
#include "isingsaw/log_sobolev.hpp"
#include "isingsaw/parallel.hpp"
#include "isingsaw/rng.hpp"
#include "isingsaw/saw_tree.hpp"
#include "isingsaw/tree_inference.hpp"

namespace isingsaw {

// ---------------------------------------------------------------------------
// Check records

enum class Relation { at_most, equal };

/// One verified statement. Sweeps are folded into a single record holding the
/// worst instance (largest lhs - rhs, or largest |lhs - rhs| for equalities)
/// and the number of evaluations behind it.
struct CheckRecord {
  std::string name;
  std::string instance;
  Relation relation = Relation::at_most;
  double lhs = 0.0;
  double rhs = 0.0;
  double tolerance = 0.0;
  std::size_t count = 0;
  bool pass = true;

  double margin() const { return relation == Relation::equal ? std::abs(lhs - rhs) : lhs - rhs; }

  void observe(double l, double r) {
    const double m = relation == Relation::equal ? std::abs(l - r) : l - r;
    if (count == 0 || m > margin() || std::isnan(m)) {
      lhs = l;
      rhs = r;
    }
    ++count;
    pass = pass && (relation == Relation::equal ? std::abs(l - r) <= tolerance : l <= r + tolerance);
  }
};

inline CheckRecord make_check(std::string name, std::string instance, Relation rel, double tol) {
  CheckRecord c;
  c.name = std::move(name);
  c.instance = std::move(instance);
  c.relation = rel;
  c.tolerance = tol;
  return c;
}

// Degree hypothesis each suite's graphs satisfy.
inline const char* suite_hypothesis(const std::string& suite) {
  if (suite == "weitz" || suite == "dss") return "none (any connected graph)";
  if (suite == "prop4") return "maximal degree d (trees)";
  if (suite == "dirichlet") return "maximal degree d";
  if (suite == "chi" || suite == "lsi") return "d-regular";
  return "per suite";
}

struct SuiteReport {
  std::string suite;
  std::uint64_t seed = 0;
  std::vector<CheckRecord> checks;

  std::size_t failed() const {
    return static_cast<std::size_t>(std::count_if(checks.begin(), checks.end(), [](const auto& c) { return !c.pass; }));
  }
  std::size_t passed() const { return checks.size() - failed(); }
  bool ok() const { return failed() == 0; }

  void append(const SuiteReport& other) { checks.insert(checks.end(), other.checks.begin(), other.checks.end()); }

  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j;
    j["suite"] = suite;
    j["seed"] = seed;
    j["hypothesis"] = suite_hypothesis(suite);
    j["summary"] = {{"checks", checks.size()}, {"passed", passed()}, {"failed", failed()}};
    auto& arr = j["checks"] = nlohmann::ordered_json::array();
    for (const auto& c : checks) {
      arr.push_back({{"name", c.name},
                     {"instance", c.instance},
                     {"relation", c.relation == Relation::equal ? "==" : "<="},
                     {"lhs", c.lhs},
                     {"rhs", c.rhs},
                     {"tolerance", c.tolerance},
                     {"count", c.count},
                     {"pass", c.pass}});
    }
    return j;
  }
};

struct VerifyOptions {
  std::uint64_t seed = 1;
  unsigned threads = 1;
  std::size_t node_cap = kDefaultSawNodeCap;
  int enumeration_cap = kDefaultEnumerationCap;
  int dss_fields = 1000;
  int dirichlet_functions = 1000;
  int lsi_functions = 10000;
  int lsi_restarts = 8;
  int prop4_trees = 200;
};

// ---------------------------------------------------------------------------
// Built-in graph corpora

struct CorpusGraph {
  std::string spec;
  Graph graph;
};

inline std::vector<CorpusGraph> load_corpus(const std::vector<std::string>& specs) {
  std::vector<CorpusGraph> out;
  for (const auto& s : specs) out.push_back({s, make_graph(s)});
  return out;
}

// Connected graphs for the SAW identity and covariance sweeps.
inline std::vector<CorpusGraph> weitz_corpus() {
  return load_corpus({"k3", "k4", "cycle:4", "cycle:5", "cycle:6", "cycle:7", "cycle:8", "petersen",
                      "rr:n=8,d=3,seed=1", "rr:n=8,d=3,seed=2", "rr:n=8,d=3,seed=3",
                      "rr:n=8,d=3,seed=4", "rr:n=8,d=3,seed=5"});
}

// d-regular graphs (d >= 3) small enough to enumerate.
inline std::vector<CorpusGraph> regular_corpus() {
  return load_corpus({"k4", "k33", "prism", "cube", "petersen", "rr:n=8,d=3,seed=1",
                      "rr:n=8,d=3,seed=2", "rr:n=8,d=3,seed=3", "rr:n=8,d=3,seed=4",
                      "rr:n=8,d=3,seed=5", "rr:n=12,d=3,seed=1", "rr:n=16,d=3,seed=1", "k5",
                      "octahedron", "rr:n=10,d=4,seed=1"});
}

// Models with at most six spins for the Dirichlet-form sweeps.
inline std::vector<CorpusGraph> small_corpus() {
  return load_corpus({"k4", "k33", "prism", "k5", "octahedron", "cycle:5", "path:4"});
}

// beta_c for the degree bound used with this graph; graphs of maximum degree
// below 3 use beta_c(3).
inline int effective_degree(const Graph& g) { return std::max(3, g.max_degree()); }

inline std::string fmt_num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

// ---------------------------------------------------------------------------
// Suites

/// SAW identity: P_G(sigma_v=+|sigma_y=+) equals the tree root marginal under
/// condition_for(y), for every ordered pair and s in {0.1, 0.3, beta_c}.
inline SuiteReport verify_weitz(const VerifyOptions& opt) {
  SuiteReport rep{"weitz", opt.seed, {}};
  for (const auto& cg : weitz_corpus()) {
    const Graph& g = cg.graph;
    const int n = g.vertex_count();
    const double bc = critical_beta(effective_degree(g)).value;
    for (double s : {0.1, 0.3, bc}) {
      std::vector<WeitzSides> sides(static_cast<std::size_t>(n) * n);
      parallel_for(sides.size(), opt.threads, [&](std::size_t i) {
        sides[i] = weitz_identity(g, static_cast<int>(i / n), static_cast<int>(i % n), s, opt.node_cap,
                                  opt.enumeration_cap);
      });
      for (std::size_t i = 0; i < sides.size(); ++i) {
        auto c = make_check("weitz_identity",
                            cg.spec + " v=" + std::to_string(i / n) + " y=" + std::to_string(i % n) +
                                " s=" + fmt_num(s),
                            Relation::equal, 1e-10);
        c.observe(sides[i].graph_side, sides[i].tree_side);
        rep.checks.push_back(c);
      }
    }
  }
  return rep;
}

/// Root-conditioning bound, the covariance and total-expectation identities,
/// telescoping, and message passing against enumeration.
inline SuiteReport verify_prop4(const VerifyOptions& opt) {
  SuiteReport rep{"prop4", opt.seed, {}};

  // Random trees.
  const int trees = opt.prop4_trees;
  std::vector<std::vector<CheckRecord>> per_tree(trees);
  parallel_for(static_cast<std::size_t>(trees), opt.threads, [&](std::size_t t) {
    CounterRng rng = CounterRng::stream({opt.seed, t, 0x5034u});
    const int nodes = 2 + static_cast<int>(rng.below(11));
    const int cap = 2 + static_cast<int>(rng.below(3));
    const std::vector<int> parents = random_tree_parents(nodes, cap, rng);
    const int d = std::max(3, TreeModel(parents, 0.0).max_degree());
    const double s = rng.uniform() * critical_beta(d).value;
    const TreeModel zero(parents, s);
    const std::string tag = "tree#" + std::to_string(t) + " nodes=" + std::to_string(nodes) +
                            " d=" + std::to_string(d) + " s=" + fmt_num(s);
    auto& out = per_tree[t];

    // Bound at zero field with k random plus-pins.
    std::vector<int> all(nodes);
    for (int v = 0; v < nodes; ++v) all[v] = v;
    shuffle(all, rng);
    const int k = 1 + static_cast<int>(rng.below(std::min(4, nodes)));
    const std::vector<int> chosen(all.begin(), all.begin() + k);
    const auto r = prop4_check(zero, chosen, d);
    auto bound = make_check("prop4_bound", tag, Relation::at_most, 1e-9);
    bound.observe(r.lhs, r.rhs);
    bound.pass = bound.pass && r.checked;
    out.push_back(bound);

    // Identities under a random finite field and random pins.
    TreeModel fielded = zero;
    for (int v = 0; v < nodes; ++v) fielded.set_field(v, rng.normal());
    std::vector<Pin> pins;
    for (int v = 1; v < nodes; ++v) {
      if (rng.uniform() < 0.2) pins.push_back({v, rng.uniform() < 0.5 ? 1 : -1});
    }
    const TreeModel pinned = fielded.with_pins(pins);
    const auto [tg, tp] = tree_as_graph(pinned);
    const ExactModel em(tg, tp);

    auto cov = make_check("covariance_identity", tag, Relation::equal, 1e-12);
    auto mean = make_check("total_expectation", tag, Relation::equal, 1e-12);
    auto mono = make_check("monotone_m_plus_ge_m_minus", tag, Relation::at_most, 1e-12);
    auto mp = make_check("message_passing_vs_enumeration", tag, Relation::equal, 1e-10);
    const double root_mag = root_magnetization(pinned);
    mp.observe(root_mag, magnetization(em, 0));
    for (int v = 0; v < nodes; ++v) {
      if (pinned.pin(v) != 0) continue;
      const CondStats st = cond_stats(pinned, v);
      cov.observe(st.covariance(), covariance(em, 0, v));
      mean.observe(st.mean(), root_mag);
      mono.observe(st.m_minus, st.m_plus);
    }
    out.push_back(cov);
    out.push_back(mean);
    out.push_back(mono);
    out.push_back(mp);

    // Telescoping in a shuffled order: increments from (1-p)(m+ - m-) under
    // h_{i-1} sum to the enumerated conditional magnetization.
    std::vector<int> order;
    for (int v = 0; v < nodes; ++v) {
      if (pinned.pin(v) == 0 && rng.uniform() < 0.5) order.push_back(v);
    }
    shuffle(order, rng);
    double total = root_mag;
    TreeModel current = pinned;
    std::vector<Pin> cond;
    for (int v : order) {
      total += cond_stats(current, v).plus_increment();
      const Pin plus{v, 1};
      current = current.with_pins(std::span(&plus, 1));
      cond.push_back(plus);
    }
    auto tele = make_check("telescoping", tag + " k=" + std::to_string(order.size()), Relation::equal, 1e-10);
    tele.observe(total, conditional_magnetization(em, 0, cond));
    out.push_back(tele);
  });
  for (auto& v : per_tree) rep.checks.insert(rep.checks.end(), v.begin(), v.end());

  // SAW trees of the identity corpus.
  for (const auto& cg : weitz_corpus()) {
    const Graph& g = cg.graph;
    const int n = g.vertex_count();
    const int d = effective_degree(g);
    const double bc = critical_beta(d).value;
    for (double s : {0.1, 0.3, bc}) {
      struct PairResult {
        Prop4Result bound;
        double min_p_margin = kInf;  // min over pins of p_i - 1/(1+e^{2ds})
        double min_p = 1.0;
        double min_mono = kInf;      // min over pins of m+ - m-
      };
      std::vector<PairResult> res(static_cast<std::size_t>(n) * n);
      parallel_for(res.size(), opt.threads, [&](std::size_t i) {
        const int v = static_cast<int>(i / n), y = static_cast<int>(i % n);
        const SawTree tree = build_saw_tree(g, v, opt.node_cap);
        const TreeModel tm = TreeModel::from_saw(tree, s);
        std::vector<int> copies;
        for (const auto& node : tree.nodes) {
          if (node.pin == PinMark::free && node.label == y) copies.push_back(node.id);
        }
        auto& pr = res[i];
        pr.bound = prop4_check(tm, copies, d);
        const double floor = 1.0 / (1.0 + std::exp(2.0 * d * s));
        TreeModel current = tm;
        for (int c : copies) {
          const CondStats st = cond_stats(current, c);
          pr.min_p_margin = std::min(pr.min_p_margin, st.p - floor);
          pr.min_p = std::min(pr.min_p, st.p);
          pr.min_mono = std::min(pr.min_mono, st.m_plus - st.m_minus);
          const Pin plus{c, 1};
          current = current.with_pins(std::span(&plus, 1));
        }
      });
      const std::string tag = cg.spec + " s=" + fmt_num(s);
      auto hyp = make_check("saw_root_unbiased", tag, Relation::equal, 1e-9);
      auto pfloor = make_check("saw_p_floor", tag, Relation::at_most, 1e-12);
      auto mono = make_check("saw_monotone", tag, Relation::at_most, 1e-12);
      for (std::size_t i = 0; i < res.size(); ++i) {
        const auto& pr = res[i];
        hyp.observe(pr.bound.unconditioned, 0.0);
        if (std::isfinite(pr.min_p_margin)) {
          pfloor.observe(1.0 / (1.0 + std::exp(2.0 * d * s)), pr.min_p);
          mono.observe(0.0, pr.min_mono);
        }
        auto c = make_check("prop4_bound_saw",
                            cg.spec + " v=" + std::to_string(i / n) + " y=" + std::to_string(i % n) +
                                " s=" + fmt_num(s),
                            Relation::at_most, 1e-9);
        c.observe(pr.bound.lhs, pr.bound.rhs);
        c.pass = c.pass && pr.bound.checked;
        rep.checks.push_back(c);
      }
      rep.checks.push_back(hyp);
      rep.checks.push_back(pfloor);
      rep.checks.push_back(mono);
    }
  }
  return rep;
}

/// Susceptibility against the min-bound and the geometric-series bound on a
/// 50-point grid in [0, beta_c - 1e-3].
inline SuiteReport verify_chi(const VerifyOptions& opt) {
  SuiteReport rep{"chi", opt.seed, {}};
  constexpr int kGrid = 50;
  for (const auto& cg : regular_corpus()) {
    const Graph& g = cg.graph;
    const int d = g.max_degree();
    const int n = g.vertex_count();
    const double bc = critical_beta(d).value;
    const double top = bc - 1e-3;
    std::vector<std::vector<double>> rows(kGrid);
    parallel_for(kGrid, opt.threads, [&](std::size_t j) {
      const double s = top * static_cast<double>(j) / (kGrid - 1);
      const ExactModel m(g, IsingParams::zero_field(n, s), opt.enumeration_cap);
      rows[j] = correlation_row_sums(m);
    });
    auto lemma = make_check("chi_lemma_bound", cg.spec, Relation::at_most, 1e-9);
    auto geo = make_check("row_sum_geometric_bound", cg.spec, Relation::at_most, 1e-9);
    auto chain = make_check("geometric_le_lemma_branch", cg.spec, Relation::at_most, 1e-9);
    for (int j = 0; j < kGrid; ++j) {
      const double s = top * j / (kGrid - 1);
      const double chi = *std::max_element(rows[j].begin(), rows[j].end());
      lemma.observe(chi, chi_lemma_bound(d, s, n));
      const double gb = chi_geometric_bound(d, s);
      for (double r : rows[j]) geo.observe(r, gb);
      chain.observe(gb, chi_lemma_bound_uncapped(d, s));
    }
    rep.checks.push_back(lemma);
    rep.checks.push_back(geo);
    rep.checks.push_back(chain);
  }
  return rep;
}

/// Cov_g(u,v) <= E_0(sigma_u sigma_v) for random finite fields g.
inline SuiteReport verify_dss(const VerifyOptions& opt) {
  SuiteReport rep{"dss", opt.seed, {}};
  std::size_t graph_index = 0;
  for (const auto& cg : weitz_corpus()) {
    const Graph& g = cg.graph;
    const int n = g.vertex_count();
    ++graph_index;
    if (n > 8) continue;
    const double bc = critical_beta(effective_degree(g)).value;
    const std::vector<double> betas{0.1, 0.3, bc};
    std::vector<std::vector<double>> zero_corr;
    for (double b : betas) zero_corr.push_back(correlation_matrix(ExactModel(g, IsingParams::zero_field(n, b))));

    const int fields = opt.dss_fields;
    std::vector<std::pair<double, double>> worst(fields);  // (cov, bound) at the worst pair
    parallel_for(static_cast<std::size_t>(fields), opt.threads, [&](std::size_t f) {
      CounterRng rng = CounterRng::stream({opt.seed, graph_index, f, 0x4453u});
      const std::size_t bi = f % betas.size();
      IsingParams p = IsingParams::zero_field(n, betas[bi]);
      for (double& h : p.field) h = 1.5 * rng.normal();
      const ExactModel m(g, p);
      const auto corr = correlation_matrix(m);
      std::vector<double> mag(n);
      for (int v = 0; v < n; ++v) mag[v] = magnetization(m, v);
      double best = -kInf;
      for (int u = 0; u < n; ++u) {
        for (int v = 0; v < n; ++v) {
          const double cov = corr[u * n + v] - mag[u] * mag[v];
          const double bound = zero_corr[bi][u * n + v];
          if (cov - bound > best) {
            best = cov - bound;
            worst[f] = {cov, bound};
          }
        }
      }
    });
    for (std::size_t bi = 0; bi < betas.size(); ++bi) {
      auto c = make_check("dss_covariance_bound", cg.spec + " beta=" + fmt_num(betas[bi]), Relation::at_most, 1e-10);
      for (int f = static_cast<int>(bi); f < fields; f += static_cast<int>(betas.size())) {
        c.observe(worst[f].first, worst[f].second);
      }
      rep.checks.push_back(c);
    }
  }
  return rep;
}

/// E_2(f,f) >= E_1(f,f) / (2 n (1 + e^{2 d beta})) for random positive f.
inline SuiteReport verify_dirichlet(const VerifyOptions& opt) {
  SuiteReport rep{"dirichlet", opt.seed, {}};
  std::size_t gi = 0;
  for (const auto& cg : small_corpus()) {
    const Graph& g = cg.graph;
    const int n = g.vertex_count();
    const int d = g.max_degree();
    ++gi;
    for (double beta : {0.1, 0.3, critical_beta(effective_degree(g)).value}) {
      const ExactModel m(g, IsingParams::zero_field(n, beta));
      const ChainKernel k = build_kernel(m);
      const double factor = 1.0 / (2.0 * n * (1.0 + std::exp(2.0 * d * beta)));
      auto c = make_check("dirichlet_comparison", cg.spec + " beta=" + fmt_num(beta), Relation::at_most, 1e-12);
      CounterRng rng = CounterRng::stream({opt.seed, gi, static_cast<std::uint64_t>(beta * 1e6), 0x4449u});
      TestFunction f(m.state_count());
      for (int i = 0; i < opt.dirichlet_functions; ++i) {
        for (double& x : f) x = std::exp(rng.normal());
        c.observe(factor * dirichlet_e1(m, f), dirichlet_e2(m, k, f));
      }
      rep.checks.push_back(c);
    }
  }
  return rep;
}

/// E_1(f,f) / Ent(f^2) >= 1/B with B the log-Sobolev bound evaluated on the
/// exact susceptibility curve, for random f and optimizer outputs.
inline SuiteReport verify_lsi(const VerifyOptions& opt) {
  SuiteReport rep{"lsi", opt.seed, {}};
  std::size_t gi = 0;
  for (const auto& cg : small_corpus()) {
    const Graph& g = cg.graph;
    ++gi;
    if (g.max_degree() < 3 || !g.is_regular()) continue;
    const int n = g.vertex_count();
    const double norm_a = adjacency_spectral_radius(g);
    const double bc = critical_beta(g.max_degree()).value;
    for (double beta : {0.1, 0.5 * bc, bc}) {
      const LsiBound b = bd_lsi_bound(beta, norm_a, [&](double s) { return susceptibility(g, s).chi; });
      const double floor = 1.0 / b.value;
      const ExactModel m(g, IsingParams::zero_field(n, beta));
      const std::string tag = cg.spec + " beta=" + fmt_num(beta);
      auto sampled = make_check("lsi_sampled_ratio", tag, Relation::at_most, 1e-9);
      CounterRng rng = CounterRng::stream({opt.seed, gi, static_cast<std::uint64_t>(beta * 1e6), 0x4C49u});
      TestFunction f(m.state_count());
      for (int i = 0; i < opt.lsi_functions; ++i) {
        for (double& x : f) x = std::exp(rng.normal());
        const double ent = entropy_of_square(m, f);
        if (ent > 1e-9) sampled.observe(floor, dirichlet_e1(m, f) / ent);
      }
      rep.checks.push_back(sampled);
      const LsiEstimate est = lsi_ratio_minimize(m, DirichletForm::e1, opt.lsi_restarts, opt.seed + gi);
      auto optimized = make_check("lsi_optimized_ratio", tag, Relation::at_most, 1e-9);
      for (double r : est.restart_ratios) {
        if (std::isfinite(r)) optimized.observe(floor, r);
      }
      rep.checks.push_back(optimized);
    }
  }
  return rep;
}

inline const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names{"weitz", "prop4", "chi", "dss", "dirichlet", "lsi"};
  return names;
}

inline SuiteReport run_suite(const std::string& name, const VerifyOptions& opt) {
  if (name == "weitz") return verify_weitz(opt);
  if (name == "prop4") return verify_prop4(opt);
  if (name == "chi") return verify_chi(opt);
  if (name == "dss") return verify_dss(opt);
  if (name == "dirichlet") return verify_dirichlet(opt);
  if (name == "lsi") return verify_lsi(opt);
  if (name == "all") {
    SuiteReport all{"all", opt.seed, {}};
    for (const auto& n : suite_names()) all.append(run_suite(n, opt));
    return all;
  }
  throw InvalidInput("unknown suite '" + name + "'");
}

}  // namespace isingsaw
