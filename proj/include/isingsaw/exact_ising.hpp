#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "isingsaw/common.hpp"
#include "isingsaw/graph.hpp"

namespace isingsaw {

/// Inverse temperature plus per-vertex external field. A field of +inf or
/// -inf pins the vertex to +1 or -1.
struct IsingParams {
  double beta = 0.0;
  std::vector<double> field;

  static IsingParams zero_field(int n, double beta) { return {beta, std::vector<double>(n, 0.0)}; }

  // +1 / -1 for a pinned vertex, 0 for a free one.
  int pin_sign(int v) const {
    const double h = field.at(v);
    if (h == kInf) return 1;
    if (h == -kInf) return -1;
    return 0;
  }

  IsingParams with_pins(std::span<const Pin> pins) const {
    IsingParams out = *this;
    for (const Pin& p : pins) {
      if (p.sign != 1 && p.sign != -1) throw InvalidInput("pin sign must be +1 or -1");
      if (p.site < 0 || p.site >= static_cast<int>(field.size())) {
        throw InvalidInput("pin vertex out of range");
      }
      const int existing = out.pin_sign(p.site);
      if (existing != 0 && existing != p.sign) {
        throw ZeroProbability("conditioning event has probability zero: vertex " +
                              std::to_string(p.site) + " already pinned to the opposite sign");
      }
      out.field[p.site] = p.sign > 0 ? kInf : -kInf;
    }
    return out;
  }
};

// Test functions live on the model's state space: one value per enumerated
// configuration of the free spins.
using TestFunction = std::vector<double>;

inline constexpr int kDefaultEnumerationCap = 20;

/// Exact Ising measure on a small graph, stored as a table of log weights
/// over the 2^free configurations of the unpinned spins.
///
/// State layout: bit k of a state index is the spin of the k-th free vertex
/// in vertex order (set means +1). Pinned vertices are not enumerated; their
/// signs enter the edge terms as constants.
class ExactModel {
 public:
  ExactModel(Graph graph, IsingParams params, int enumeration_cap = kDefaultEnumerationCap)
      : graph_(std::move(graph)), params_(std::move(params)) {
    const int n = graph_.vertex_count();
    if (static_cast<int>(params_.field.size()) != n) {
      throw InvalidInput("field size does not match vertex count");
    }
    if (!std::isfinite(params_.beta) || params_.beta < 0) {
      throw InvalidInput("beta must be finite and nonnegative");
    }
    slot_.assign(n, -1);
    for (int v = 0; v < n; ++v) {
      if (std::isnan(params_.field[v])) throw InvalidInput("NaN external field");
      if (params_.pin_sign(v) == 0) {
        slot_[v] = static_cast<int>(free_.size());
        free_.push_back(v);
      }
    }
    if (static_cast<int>(free_.size()) > enumeration_cap) {
      throw CapExceeded("exact enumeration: " + std::to_string(free_.size()) +
                        " free spins exceeds cap " + std::to_string(enumeration_cap));
    }
    build_weights();
  }

  const Graph& graph() const { return graph_; }
  const IsingParams& params() const { return params_; }
  int vertex_count() const { return graph_.vertex_count(); }
  int free_count() const { return static_cast<int>(free_.size()); }
  const std::vector<int>& free_vertices() const { return free_; }
  // Position of v among the free vertices, or -1 when pinned.
  int free_slot(int v) const { return slot_.at(v); }
  std::uint32_t state_count() const { return std::uint32_t{1} << free_.size(); }

  int spin(std::uint32_t state, int v) const {
    const int k = slot_[v];
    if (k < 0) return params_.pin_sign(v);
    return (state >> k) & 1u ? 1 : -1;
  }

  double log_weight(std::uint32_t state) const { return log_weights_[state]; }
  double log_z() const { return log_z_; }
  double probability(std::uint32_t state) const { return probabilities_[state]; }
  std::span<const double> probabilities() const { return probabilities_; }
  std::span<const double> log_weights() const { return log_weights_; }

  double min_probability() const {
    return *std::min_element(probabilities_.begin(), probabilities_.end());
  }

  // Change in log weight when free slot k of `state` is flipped, computed
  // from the neighborhood only: log w(sigma^k) - log w(sigma).
  double flip_log_ratio(std::uint32_t state, int k) const {
    const int v = free_[k];
    const int s = (state >> k) & 1u ? 1 : -1;
    double local = params_.field[v];
    double nb = 0.0;
    for (int w : graph_.neighbors(v)) nb += spin(state, w);
    local += params_.beta * nb;
    return -2.0 * s * local;
  }

 private:
  void build_weights() {
    const std::uint32_t states = state_count();
    const auto edges = graph_.edges();
    log_weights_.resize(states);
    std::vector<int> spins(graph_.vertex_count());
    for (int v = 0; v < graph_.vertex_count(); ++v) spins[v] = params_.pin_sign(v);
    for (std::uint32_t s = 0; s < states; ++s) {
      for (std::size_t k = 0; k < free_.size(); ++k) spins[free_[k]] = (s >> k) & 1u ? 1 : -1;
      double coupling = 0.0;
      for (const auto& [u, v] : edges) coupling += spins[u] * spins[v];
      double external = 0.0;
      for (int v : free_) external += params_.field[v] * spins[v];
      log_weights_[s] = params_.beta * coupling + external;
    }
    log_z_ = log_sum_exp(log_weights_);
    probabilities_.resize(states);
    for (std::uint32_t s = 0; s < states; ++s) probabilities_[s] = std::exp(log_weights_[s] - log_z_);
  }

  Graph graph_;
  IsingParams params_;
  std::vector<int> free_;
  std::vector<int> slot_;
  std::vector<double> log_weights_;
  std::vector<double> probabilities_;
  double log_z_ = 0.0;
};

inline ExactModel build_model(const Graph& g, const IsingParams& p,
                              int enumeration_cap = kDefaultEnumerationCap) {
  return ExactModel(g, p, enumeration_cap);
}

inline double magnetization(const ExactModel& m, int v) {
  if (v < 0 || v >= m.vertex_count()) throw InvalidInput("vertex out of range");
  const int pinned = m.params().pin_sign(v);
  if (pinned != 0) return pinned;
  const int k = m.free_slot(v);
  double acc = 0.0;
  const auto probs = m.probabilities();
  for (std::uint32_t s = 0; s < m.state_count(); ++s) acc += (s >> k) & 1u ? probs[s] : -probs[s];
  return acc;
}

inline double correlation(const ExactModel& m, int x, int y) {
  if (x < 0 || y < 0 || x >= m.vertex_count() || y >= m.vertex_count()) {
    throw InvalidInput("vertex out of range");
  }
  if (x == y) return 1.0;
  double acc = 0.0;
  const auto probs = m.probabilities();
  for (std::uint32_t s = 0; s < m.state_count(); ++s) acc += probs[s] * m.spin(s, x) * m.spin(s, y);
  return acc;
}

inline double covariance(const ExactModel& m, int x, int y) {
  return correlation(m, x, y) - magnetization(m, x) * magnetization(m, y);
}

// All pair correlations E(sigma_x sigma_y) as a row-major n x n matrix.
inline std::vector<double> correlation_matrix(const ExactModel& m) {
  const int n = m.vertex_count();
  std::vector<double> c(static_cast<std::size_t>(n) * n, 0.0);
  std::vector<int> spins(n);
  const auto probs = m.probabilities();
  for (std::uint32_t s = 0; s < m.state_count(); ++s) {
    for (int v = 0; v < n; ++v) spins[v] = m.spin(s, v);
    const double p = probs[s];
    for (int x = 0; x < n; ++x) {
      const double px = p * spins[x];
      for (int y = x + 1; y < n; ++y) c[x * n + y] += px * spins[y];
    }
  }
  for (int x = 0; x < n; ++x) {
    c[x * n + x] = 1.0;
    for (int y = x + 1; y < n; ++y) c[y * n + x] = c[x * n + y];
  }
  return c;
}

inline double conditional_magnetization(const ExactModel& m, int v, std::span<const Pin> pins) {
  if (pins.empty()) return magnetization(m, v);
  const ExactModel conditioned(m.graph(), m.params().with_pins(pins), std::max(m.free_count(), 0));
  return magnetization(conditioned, v);
}

// Row sums sum_y E(sigma_x sigma_y), computed as E(sigma_x * M) with M the
// total magnetization.
inline std::vector<double> correlation_row_sums(const ExactModel& m) {
  const int n = m.vertex_count();
  std::vector<double> rows(n, 0.0);
  std::vector<int> spins(n);
  const auto probs = m.probabilities();
  for (std::uint32_t s = 0; s < m.state_count(); ++s) {
    int total = 0;
    for (int v = 0; v < n; ++v) {
      spins[v] = m.spin(s, v);
      total += spins[v];
    }
    const double pm = probs[s] * total;
    for (int x = 0; x < n; ++x) rows[x] += pm * spins[x];
  }
  return rows;
}

struct Susceptibility {
  double chi = 0.0;
  int argmax = 0;
};

/// Zero-field susceptibility max_x sum_y E_s(sigma_x sigma_y).
inline Susceptibility susceptibility(const Graph& g, double s,
                                     int enumeration_cap = kDefaultEnumerationCap) {
  const ExactModel m(g, IsingParams::zero_field(g.vertex_count(), s), enumeration_cap);
  const auto rows = correlation_row_sums(m);
  const auto best = std::max_element(rows.begin(), rows.end());
  return {*best, static_cast<int>(best - rows.begin())};
}

// ---------------------------------------------------------------------------
// Entropy and the single-flip Dirichlet form.

namespace detail {
inline void check_size(const ExactModel& m, std::span<const double> f) {
  if (f.size() != m.state_count()) throw InvalidInput("test function size does not match state count");
}
inline double x_log_x(double x) { return x > 0.0 ? x * std::log(x) : 0.0; }
}  // namespace detail

/// Ent(f) = E[f log f] - E[f] log E[f], with 0 log 0 = 0. Requires f >= 0.
inline double entropy(const ExactModel& m, std::span<const double> f) {
  detail::check_size(m, f);
  const auto probs = m.probabilities();
  double mean = 0.0, mean_flogf = 0.0;
  for (std::size_t s = 0; s < f.size(); ++s) {
    if (f[s] < 0) throw InvalidInput("entropy: test function must be nonnegative");
    mean += probs[s] * f[s];
    mean_flogf += probs[s] * detail::x_log_x(f[s]);
  }
  return mean_flogf - detail::x_log_x(mean);
}

// Ent(f^2) without materializing f^2.
inline double entropy_of_square(const ExactModel& m, std::span<const double> f) {
  detail::check_size(m, f);
  const auto probs = m.probabilities();
  double mean = 0.0, mean_flogf = 0.0;
  for (std::size_t s = 0; s < f.size(); ++s) {
    const double sq = f[s] * f[s];
    mean += probs[s] * sq;
    mean_flogf += probs[s] * detail::x_log_x(sq);
  }
  return mean_flogf - detail::x_log_x(mean);
}

/// E_1(f,f) = sum_i E[(f(sigma) - f(sigma^i))^2] over the free sites i.
inline double dirichlet_e1(const ExactModel& m, std::span<const double> f) {
  detail::check_size(m, f);
  const auto probs = m.probabilities();
  double acc = 0.0;
  for (std::uint32_t s = 0; s < m.state_count(); ++s) {
    double local = 0.0;
    for (int k = 0; k < m.free_count(); ++k) {
      const double diff = f[s] - f[s ^ (std::uint32_t{1} << k)];
      local += diff * diff;
    }
    acc += probs[s] * local;
  }
  return acc;
}

}  // namespace isingsaw
