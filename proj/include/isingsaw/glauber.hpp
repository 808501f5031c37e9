#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "isingsaw/common.hpp"
#include "isingsaw/exact_ising.hpp"
#include "isingsaw/parallel.hpp"
#include "isingsaw/rng.hpp"

namespace isingsaw {

inline constexpr int kDefaultKernelCap = 14;

/// Heat-bath Glauber kernel on the free spins of an ExactModel.
///
/// From state sigma a free site k is chosen with probability 1/n_free and
/// flipped with probability w(sigma^k) / (w(sigma) + w(sigma^k)); otherwise
/// the chain holds. Rows are stored sparsely as n_free flip probabilities
/// plus the holding mass. The model must outlive the kernel.
class ChainKernel {
 public:
  const ExactModel& model() const { return *model_; }
  int sites() const { return sites_; }
  std::uint32_t state_count() const { return model_->state_count(); }

  // P(sigma, sigma^k).
  double flip(std::uint32_t state, int k) const { return flip_[state * sites_ + k]; }
  double hold(std::uint32_t state) const { return hold_[state]; }

  double operator()(std::uint32_t from, std::uint32_t to) const {
    if (from == to) return hold(from);
    const std::uint32_t diff = from ^ to;
    if ((diff & (diff - 1)) != 0) return 0.0;
    return flip(from, std::countr_zero(diff));
  }

  // out = dist * P (row vector times kernel).
  void apply(std::span<const double> dist, std::span<double> out) const {
    const std::uint32_t states = state_count();
    for (std::uint32_t t = 0; t < states; ++t) {
      double acc = dist[t] * hold_[t];
      for (int k = 0; k < sites_; ++k) {
        const std::uint32_t from = t ^ (std::uint32_t{1} << k);
        acc += dist[from] * flip_[from * sites_ + k];
      }
      out[t] = acc;
    }
  }

  // out = P * x (kernel times column vector).
  void apply_right(std::span<const double> x, std::span<double> out) const {
    const std::uint32_t states = state_count();
    for (std::uint32_t s = 0; s < states; ++s) {
      double acc = hold_[s] * x[s];
      for (int k = 0; k < sites_; ++k) acc += flip_[s * sites_ + k] * x[s ^ (std::uint32_t{1} << k)];
      out[s] = acc;
    }
  }

 private:
  friend ChainKernel build_kernel(const ExactModel& m, int cap);

  const ExactModel* model_ = nullptr;
  int sites_ = 0;
  std::vector<double> flip_;
  std::vector<double> hold_;
};

// Flip probability given log w(sigma^k) - log w(sigma).
inline double heat_bath_flip(double log_ratio) { return 1.0 / (1.0 + std::exp(-log_ratio)); }

inline ChainKernel build_kernel(const ExactModel& m, int cap = kDefaultKernelCap) {
  if (m.free_count() > cap) {
    throw CapExceeded("kernel: " + std::to_string(m.free_count()) + " free spins exceeds cap " +
                      std::to_string(cap));
  }
  ChainKernel k;
  k.model_ = &m;
  k.sites_ = m.free_count();
  const std::uint32_t states = m.state_count();
  k.flip_.assign(static_cast<std::size_t>(states) * k.sites_, 0.0);
  k.hold_.assign(states, 1.0);
  if (k.sites_ == 0) return k;
  const double site_prob = 1.0 / k.sites_;
  for (std::uint32_t s = 0; s < states; ++s) {
    double moved = 0.0;
    for (int i = 0; i < k.sites_; ++i) {
      const double p = site_prob * heat_bath_flip(m.flip_log_ratio(s, i));
      k.flip_[s * k.sites_ + i] = p;
      moved += p;
    }
    k.hold_[s] = 1.0 - moved;
  }
  return k;
}

/// Half the L1 distance between two distributions on the same support.
inline double tv_distance(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw InvalidInput("tv_distance: size mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += std::abs(a[i] - b[i]);
  return 0.5 * acc;
}

// ---------------------------------------------------------------------------
// Exact mixing time by iterating point-mass rows.

inline constexpr int kExhaustiveStartLimit = 10;

struct MixingResult {
  int t_mix = 0;
  double eps = 0.25;
  std::vector<double> worst_tv;  // worst_tv[t] = max over starts of TV(P^t delta, mu)
  std::uint32_t worst_start = 0; // maximizer at t = t_mix - 1 (or 0 when t_mix = 0)
  bool exhaustive = true;        // false: "lower-bounded max" over a subset of starts
  std::vector<std::uint32_t> starts;
};

namespace detail {

inline std::vector<std::uint32_t> mixing_starts(const ExactModel& m, std::uint64_t seed) {
  const std::uint32_t states = m.state_count();
  std::vector<std::uint32_t> starts;
  if (m.free_count() <= kExhaustiveStartLimit) {
    starts.resize(states);
    for (std::uint32_t s = 0; s < states; ++s) starts[s] = s;
    return starts;
  }
  starts.push_back(states - 1);  // all plus
  starts.push_back(0);           // all minus
  CounterRng rng = CounterRng::stream({seed, 0x4D49u});
  for (int i = 0; i < 100; ++i) starts.push_back(static_cast<std::uint32_t>(rng.below(states)));
  return starts;
}

}  // namespace detail

/// Smallest t with max over starts of TV(P^t delta_start, mu) <= eps.
///
/// All starts are used for up to 10 free spins; above that the all-plus,
/// all-minus and 100 seeded random starts are used and the result is flagged
/// as non-exhaustive.
inline MixingResult exact_mixing_time(const ChainKernel& k, double eps, int max_steps = 1000000,
                                      unsigned threads = 1, std::uint64_t seed = 0) {
  if (!(eps > 0 && eps < 1)) throw InvalidInput("eps must lie in (0,1)");
  const ExactModel& m = k.model();
  const std::uint32_t states = m.state_count();
  MixingResult result;
  result.eps = eps;
  result.starts = detail::mixing_starts(m, seed);
  result.exhaustive = m.free_count() <= kExhaustiveStartLimit;
  const std::size_t count = result.starts.size();
  const auto mu = m.probabilities();

  std::vector<std::vector<double>> dist(count, std::vector<double>(states, 0.0));
  std::vector<std::vector<double>> scratch(count, std::vector<double>(states, 0.0));
  std::vector<double> tv(count, 0.0);
  for (std::size_t i = 0; i < count; ++i) dist[i][result.starts[i]] = 1.0;

  for (int t = 0;; ++t) {
    if (t > 0) {
      parallel_for(count, threads, [&](std::size_t i) {
        k.apply(dist[i], scratch[i]);
        dist[i].swap(scratch[i]);
      });
    }
    parallel_for(count, threads, [&](std::size_t i) { tv[i] = tv_distance(dist[i], mu); });
    const auto worst = std::max_element(tv.begin(), tv.end());
    result.worst_tv.push_back(*worst);
    if (*worst <= eps) {
      result.t_mix = t;
      return result;
    }
    result.worst_start = result.starts[static_cast<std::size_t>(worst - tv.begin())];
    if (t >= max_steps) throw CapExceeded("exact_mixing_time: iteration cap reached");
  }
}

// ---------------------------------------------------------------------------

/// 1 - lambda_2 of a reversible kernel by power iteration on the symmetrized
/// operator D^{1/2} P D^{-1/2} with the sqrt(mu) direction projected out.
/// Heat-bath kernels are averages of L2(mu) projections, so the spectrum is in
/// [0,1] and the dominant remaining eigenvalue is lambda_2.
inline double spectral_gap(const ChainKernel& k, double tol = 1e-12, int max_iterations = 2000000,
                           std::uint64_t seed = 0) {
  if (!(tol > 0)) throw InvalidInput("spectral_gap: tol must be positive");
  const std::uint32_t states = k.state_count();
  if (states == 1) return 1.0;
  const auto mu = k.model().probabilities();
  std::vector<double> root(states), x(states), y(states), tmp(states);
  for (std::uint32_t s = 0; s < states; ++s) root[s] = std::sqrt(mu[s]);

  auto deflate = [&](std::vector<double>& z) {
    double dot = 0.0;
    for (std::uint32_t s = 0; s < states; ++s) dot += z[s] * root[s];
    for (std::uint32_t s = 0; s < states; ++s) z[s] -= dot * root[s];
  };
  auto normalize = [&](std::vector<double>& z) {
    double norm = 0.0;
    for (double a : z) norm += a * a;
    norm = std::sqrt(norm);
    if (norm == 0.0) return false;
    for (double& a : z) a /= norm;
    return true;
  };
  // S x = D^{1/2} P D^{-1/2} x
  auto apply_sym = [&](const std::vector<double>& in, std::vector<double>& out) {
    for (std::uint32_t s = 0; s < states; ++s) tmp[s] = in[s] / root[s];
    k.apply_right(tmp, out);
    for (std::uint32_t s = 0; s < states; ++s) out[s] *= root[s];
  };

  CounterRng rng = CounterRng::stream({seed, 0x5347u});
  for (auto& a : x) a = rng.normal();
  deflate(x);
  if (!normalize(x)) throw NotConverged("spectral_gap: degenerate start vector");

  for (int it = 0; it < max_iterations; ++it) {
    apply_sym(x, y);
    deflate(y);
    double lambda = 0.0;
    for (std::uint32_t s = 0; s < states; ++s) lambda += x[s] * y[s];
    double residual = 0.0;
    for (std::uint32_t s = 0; s < states; ++s) residual += (y[s] - lambda * x[s]) * (y[s] - lambda * x[s]);
    if (std::sqrt(residual) < tol) return 1.0 - lambda;
    x.swap(y);
    if (!normalize(x)) return 1.0;  // orthogonal complement annihilated: all mass at once
  }
  throw NotConverged("spectral_gap: power iteration did not converge");
}

// ---------------------------------------------------------------------------
// Monte Carlo stepping.

using SpinConfig = std::vector<std::int8_t>;

enum class StartKind { all_plus, all_minus, random, given };

struct ChainRunConfig {
  std::uint64_t seed = 1;
  long long steps = 1000000;  // per-replica step budget
  int replicas = 100;
  StartKind start = StartKind::all_plus;
};

inline SpinConfig initial_config(const IsingParams& p, StartKind kind, CounterRng& rng,
                                 const SpinConfig& given = {}) {
  const int n = static_cast<int>(p.field.size());
  SpinConfig s(n, 1);
  for (int v = 0; v < n; ++v) {
    switch (kind) {
      case StartKind::all_plus: s[v] = 1; break;
      case StartKind::all_minus: s[v] = -1; break;
      case StartKind::random: s[v] = rng.uniform() < 0.5 ? 1 : -1; break;
      case StartKind::given:
        if (given.size() != static_cast<std::size_t>(n)) throw InvalidInput("given start has wrong size");
        s[v] = given[v];
        break;
    }
    if (p.pin_sign(v) != 0) s[v] = static_cast<std::int8_t>(p.pin_sign(v));
  }
  return s;
}

/// Local single-site sampler: every update reads only the chosen site's
/// neighborhood.
class GlauberSampler {
 public:
  GlauberSampler(const Graph& g, const IsingParams& p) : graph_(&g), params_(&p) {
    if (static_cast<int>(p.field.size()) != g.vertex_count()) {
      throw InvalidInput("field size does not match vertex count");
    }
    for (int v = 0; v < g.vertex_count(); ++v) {
      if (p.pin_sign(v) == 0) free_.push_back(v);
    }
  }

  const std::vector<int>& free_vertices() const { return free_; }

  // Probability that site v is + after a heat-bath update.
  double plus_probability(const SpinConfig& state, int v) const {
    double nb = 0.0;
    for (int w : graph_->neighbors(v)) nb += state[w];
    const double local = params_->beta * nb + params_->field[v];
    return 1.0 / (1.0 + std::exp(-2.0 * local));
  }

  // Probability of flipping site v: w(sigma^v) / (w(sigma) + w(sigma^v)).
  double flip_probability(const SpinConfig& state, int v) const {
    const double plus = plus_probability(state, v);
    return state[v] > 0 ? 1.0 - plus : plus;
  }

  // One step: uniform free site, flip with the heat-bath probability.
  // Returns the site visited, or -1 when nothing is free.
  int step(SpinConfig& state, CounterRng& rng) const {
    if (free_.empty()) return -1;
    const int v = free_[rng.below(free_.size())];
    if (rng.uniform() < flip_probability(state, v)) state[v] = static_cast<std::int8_t>(-state[v]);
    return v;
  }

  // Monotone update of two coupled chains with shared site and variate.
  // Returns the site visited and whether the chains disagreed there before
  // and after the update.
  struct CoupledMove {
    int site = -1;
    bool differed_before = false;
    bool differs_after = false;
  };

  CoupledMove coupled_step(SpinConfig& upper, SpinConfig& lower, CounterRng& rng) const {
    if (free_.empty()) return {};
    const int v = free_[rng.below(free_.size())];
    const double u = rng.uniform();
    CoupledMove move{v, upper[v] != lower[v], false};
    upper[v] = u < plus_probability(upper, v) ? 1 : -1;
    lower[v] = u < plus_probability(lower, v) ? 1 : -1;
    move.differs_after = upper[v] != lower[v];
    return move;
  }

 private:
  const Graph* graph_;
  const IsingParams* params_;
  std::vector<int> free_;
};

inline int step(SpinConfig& state, const ExactModel& m, CounterRng& rng) {
  return GlauberSampler(m.graph(), m.params()).step(state, rng);
}

// ---------------------------------------------------------------------------
// Grand coupling from the extreme configurations.

struct CouplingStats {
  std::vector<long long> times;  // per replica; -1 when the budget ran out
  int censored = 0;
  long long order_violations = 0;
  double mean = 0.0;             // over coalesced replicas
  double q10 = 0, q25 = 0, median = 0, q75 = 0, q90 = 0;

  // Fraction of replicas not yet coalesced at time t (censored count as such).
  double uncoalesced_fraction(long long t) const {
    if (times.empty()) return 0.0;
    std::size_t open = 0;
    for (long long c : times) open += (c < 0 || c > t) ? 1 : 0;
    return static_cast<double>(open) / static_cast<double>(times.size());
  }
};

namespace detail {

// Lower empirical quantile; censored replicas sort as +infinity.
inline double quantile(std::vector<long long> sorted, double q) {
  if (sorted.empty()) return 0.0;
  const auto idx = static_cast<std::size_t>(std::ceil(q * static_cast<double>(sorted.size()))) ;
  const std::size_t i = idx == 0 ? 0 : idx - 1;
  const long long v = sorted[std::min(i, sorted.size() - 1)];
  return v == std::numeric_limits<long long>::max() ? kInf : static_cast<double>(v);
}

}  // namespace detail

/// Runs plus- and minus-started chains per replica with shared randomness until
/// they agree. Replica r uses the stream keyed by (seed, r), so results are
/// independent of thread count.
inline CouplingStats monotone_coupling_time(const Graph& g, const IsingParams& p,
                                            const ChainRunConfig& cfg, unsigned threads = 1) {
  if (p.beta < 0) throw InvalidInput("monotone coupling needs beta >= 0");
  if (cfg.replicas <= 0 || cfg.steps <= 0) throw InvalidInput("replicas and steps must be positive");
  const GlauberSampler sampler(g, p);
  CouplingStats stats;
  stats.times.assign(cfg.replicas, -1);
  std::vector<long long> violations(cfg.replicas, 0);

  parallel_for(static_cast<std::size_t>(cfg.replicas), threads, [&](std::size_t r) {
    CounterRng rng = CounterRng::stream({cfg.seed, r, 0x434Fu});
    CounterRng no_draws;  // extreme starts consume no variates
    SpinConfig upper = initial_config(p, StartKind::all_plus, no_draws);
    SpinConfig lower = initial_config(p, StartKind::all_minus, no_draws);
    long long differing = 0;
    for (std::size_t v = 0; v < upper.size(); ++v) differing += upper[v] != lower[v];
    if (differing == 0) {
      stats.times[r] = 0;
      return;
    }
    for (long long t = 1; t <= cfg.steps; ++t) {
      const auto move = sampler.coupled_step(upper, lower, rng);
      if (upper[move.site] < lower[move.site]) ++violations[r];
      differing += static_cast<long long>(move.differs_after) - static_cast<long long>(move.differed_before);
      if (differing == 0) {
        stats.times[r] = t;
        return;
      }
    }
  });

  std::vector<long long> sorted;
  double total = 0.0;
  std::size_t done = 0;
  for (int r = 0; r < cfg.replicas; ++r) {
    stats.order_violations += violations[r];
    if (stats.times[r] < 0) {
      ++stats.censored;
      sorted.push_back(std::numeric_limits<long long>::max());
    } else {
      sorted.push_back(stats.times[r]);
      total += static_cast<double>(stats.times[r]);
      ++done;
    }
  }
  std::sort(sorted.begin(), sorted.end());
  stats.mean = done ? total / static_cast<double>(done) : kInf;
  stats.q10 = detail::quantile(sorted, 0.10);
  stats.q25 = detail::quantile(sorted, 0.25);
  stats.median = detail::quantile(sorted, 0.50);
  stats.q75 = detail::quantile(sorted, 0.75);
  stats.q90 = detail::quantile(sorted, 0.90);
  return stats;
}

}  // namespace isingsaw
