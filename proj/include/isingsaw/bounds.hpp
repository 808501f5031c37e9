#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "isingsaw/common.hpp"

namespace isingsaw {

// Tree uniqueness threshold beta_c(d) = atanh(1/(d-1)).
struct BetaCritical {
  int d = 3;
  double value = 0.0;

  double theta() const { return std::tanh(value); }
};

inline BetaCritical critical_beta(int d) {
  if (d < 3) throw InvalidInput("critical_beta: d must be at least 3");
  return {d, std::atanh(1.0 / (d - 1))};
}

/// min(100 d / ((d-1)^2 (beta_c - s)), n)
inline double chi_lemma_bound(int d, double s, long long n) {
  const double bc = critical_beta(d).value;
  if (!(s >= 0.0)) throw InvalidInput("chi_lemma_bound: s must be nonnegative");
  if (s >= bc) throw InvalidInput("chi_lemma_bound: s must be below beta_c");
  const double first = 100.0 * d / ((d - 1.0) * (d - 1.0) * (bc - s));
  return std::min(first, static_cast<double>(n));
}

// The first branch alone (no cap at n).
inline double chi_lemma_bound_uncapped(int d, double s) {
  const double bc = critical_beta(d).value;
  if (s >= bc) throw InvalidInput("chi_lemma_bound: s must be below beta_c");
  return 100.0 * d / ((d - 1.0) * (d - 1.0) * (bc - s));
}

/// 1 + 50 sum_{k>=1} d (d-1)^{k-1} theta^k = 1 + 50 d theta / (1 - (d-1) theta).
inline double chi_geometric_bound(int d, double s) {
  if (d < 2) throw InvalidInput("chi_geometric_bound: d must be at least 2");
  const double theta = std::tanh(s);
  const double ratio = (d - 1) * theta;
  if (ratio >= 1.0) throw InvalidInput("chi_geometric_bound: requires (d-1) tanh(s) < 1");
  return 1.0 + 50.0 * d * theta / (1.0 - ratio);
}

// ---------------------------------------------------------------------------
// Log-Sobolev bound from the susceptibility integral.

enum class ChiSource { exact, lemma_bound, cap_n };

inline const char* to_string(ChiSource p) {
  switch (p) {
    case ChiSource::exact: return "exact";
    case ChiSource::lemma_bound: return "lemma-bound";
    case ChiSource::cap_n: return "cap-n";
  }
  return "exact";
}

struct ChiCurve {
  std::vector<double> grid;  // strictly increasing, starting at 0
  std::vector<double> chi;
  std::vector<ChiSource> source;

  void validate() const {
    if (grid.size() != chi.size() || (!source.empty() && source.size() != grid.size())) {
      throw InvalidInput("ChiCurve: grid and values differ in length");
    }
    for (std::size_t i = 0; i < grid.size(); ++i) {
      if (i > 0 && !(grid[i] > grid[i - 1])) throw InvalidInput("ChiCurve: grid not strictly increasing");
      if (!(chi[i] >= 1.0 - 1e-12)) throw InvalidInput("ChiCurve: chi below 1");
    }
  }
};

struct LsiBound {
  double value = 0.0;      // B = 1/2 + beta ||A|| exp(2 ||A|| I)
  double log_value = 0.0;  // log B, finite even when B overflows
  double integral = 0.0;   // I = int_0^beta chi_s ds
};

namespace detail {

inline LsiBound lsi_bound_from_integral(double beta, double norm_a, double integral) {
  LsiBound b;
  b.integral = integral;
  const double log_second = beta * norm_a > 0.0
                                ? std::log(beta * norm_a) + 2.0 * norm_a * integral
                                : -kInf;
  b.log_value = log_sum_exp(std::log(0.5), log_second);
  b.value = std::exp(b.log_value);
  return b;
}

// Trapezoid over the curve's points restricted to [0, beta], taking every
// `stride`-th point (the endpoint at beta is always included).
inline double trapezoid(const ChiCurve& c, double beta, std::size_t stride) {
  std::vector<std::size_t> idx;
  std::size_t last = 0;
  for (std::size_t i = 0; i < c.grid.size() && c.grid[i] <= beta * (1 + 1e-15); ++i) {
    last = i;
    if (i % stride == 0) idx.push_back(i);
  }
  if (idx.back() != last) idx.push_back(last);
  double acc = 0.0;
  for (std::size_t j = 1; j < idx.size(); ++j) {
    const auto a = idx[j - 1], b = idx[j];
    acc += 0.5 * (c.chi[a] + c.chi[b]) * (c.grid[b] - c.grid[a]);
  }
  // Tail from the last grid point to beta, chi linearly interpolated.
  if (c.grid[last] < beta && last + 1 < c.grid.size()) {
    const double w = (beta - c.grid[last]) / (c.grid[last + 1] - c.grid[last]);
    const double at_beta = c.chi[last] + w * (c.chi[last + 1] - c.chi[last]);
    acc += 0.5 * (c.chi[last] + at_beta) * (beta - c.grid[last]);
  }
  return acc;
}

}  // namespace detail

inline constexpr double kLsiRefineTolerance = 1e-3;

/// B = 1/2 + beta ||A|| exp(2 ||A|| int_0^beta chi_s ds), integral by the
/// trapezoid rule on a fixed curve. The curve must start at 0 and reach beta.
/// Halving the curve (every other point) must move B by less than 0.1%,
/// otherwise the grid is reported as too coarse.
inline LsiBound bd_lsi_bound(double beta, double norm_a, const ChiCurve& chi) {
  if (beta < 0 || norm_a < 0) throw InvalidInput("bd_lsi_bound: negative input");
  if (beta == 0.0) return detail::lsi_bound_from_integral(0.0, norm_a, 0.0);
  chi.validate();
  if (chi.grid.empty() || chi.grid.front() != 0.0 ||
      chi.grid.back() < beta) {
    throw InvalidInput("bd_lsi_bound: chi curve must cover [0, beta]");
  }
  const double fine = detail::trapezoid(chi, beta, 1);
  const LsiBound result = detail::lsi_bound_from_integral(beta, norm_a, fine);
  std::size_t used = 0;
  for (double s : chi.grid) used += s <= beta * (1 + 1e-15) ? 1 : 0;
  if (used < 3) throw InvalidInput("bd_lsi_bound: grid too coarse to refine (need 3 points)");
  const double coarse = detail::trapezoid(chi, beta, 2);
  const LsiBound check = detail::lsi_bound_from_integral(beta, norm_a, coarse);
  if (std::abs(std::expm1(check.log_value - result.log_value)) >= kLsiRefineTolerance) {
    throw InvalidInput("bd_lsi_bound: grid too coarse (halving changes bound by >= 0.1%)");
  }
  return result;
}

/// Same bound with chi supplied as a function: the trapezoid grid on
/// [0, beta] is doubled until B changes by less than 0.1% relatively.
inline LsiBound bd_lsi_bound(double beta, double norm_a, const std::function<double(double)>& chi,
                             int max_doublings = 20, ChiCurve* used_curve = nullptr) {
  if (beta < 0 || norm_a < 0) throw InvalidInput("bd_lsi_bound: negative input");
  if (beta == 0.0) return detail::lsi_bound_from_integral(0.0, norm_a, 0.0);
  std::vector<double> values{chi(0.0), chi(beta)};
  std::size_t intervals = 1;
  auto integrate = [&] {
    const double h = beta / static_cast<double>(intervals);
    double acc = 0.5 * (values.front() + values.back());
    for (std::size_t i = 1; i < intervals; ++i) acc += values[i];
    return acc * h;
  };
  LsiBound prev = detail::lsi_bound_from_integral(beta, norm_a, integrate());
  for (int round = 0; round < max_doublings; ++round) {
    std::vector<double> next(2 * intervals + 1);
    for (std::size_t i = 0; i <= intervals; ++i) next[2 * i] = values[i];
    for (std::size_t i = 0; i < intervals; ++i) {
      next[2 * i + 1] = chi(beta * static_cast<double>(2 * i + 1) / static_cast<double>(2 * intervals));
    }
    values.swap(next);
    intervals *= 2;
    const LsiBound cur = detail::lsi_bound_from_integral(beta, norm_a, integrate());
    if (std::abs(std::expm1(cur.log_value - prev.log_value)) < kLsiRefineTolerance) {
      if (used_curve) {
        used_curve->grid.clear();
        used_curve->chi = values;
        used_curve->source.assign(values.size(), ChiSource::exact);
        for (std::size_t i = 0; i <= intervals; ++i) {
          used_curve->grid.push_back(beta * static_cast<double>(i) / static_cast<double>(intervals));
        }
      }
      return cur;
    }
    prev = cur;
  }
  throw NotConverged("bd_lsi_bound: trapezoid refinement did not settle");
}

// ---------------------------------------------------------------------------

/// t_mix(eps) <= (1 / (4 alpha)) (log log(1/mu_min) + log(1 / (2 eps^2))).
/// The inner logarithm is clamped at 1 (mu_min >= 1/e) so the outer one is
/// defined.
inline double mixing_from_lsi(double alpha, double mu_min, double eps) {
  if (!(alpha > 0)) throw InvalidInput("mixing_from_lsi: alpha must be positive");
  if (!(mu_min > 0 && mu_min <= 1)) throw InvalidInput("mixing_from_lsi: mu_min must lie in (0,1]");
  if (!(eps > 0 && eps < 1)) throw InvalidInput("mixing_from_lsi: eps must lie in (0,1)");
  const double inner = std::max(-std::log(mu_min), 1.0);
  return (std::log(inner) + std::log(1.0 / (2.0 * eps * eps))) / (4.0 * alpha);
}

struct AlphaBound {
  double sharp = 0.0;    // 2 n (1 + e^{2 d beta}) gamma^{-1}
  double rounded = 0.0;  // 200 n gamma^{-1}
  bool rounded_valid = false;  // 1 + e^{2 d beta} <= 100
};

/// Upper bounds on alpha^{-1} from gamma^{-1} through the single-flip
/// comparison of the two Dirichlet forms.
inline AlphaBound alpha_from_gamma(double gamma_inv, long long n, int d, double beta) {
  if (!(gamma_inv > 0) || n <= 0 || d <= 0 || beta < 0) {
    throw InvalidInput("alpha_from_gamma: inputs must be positive");
  }
  const double factor = 1.0 + std::exp(2.0 * d * beta);
  AlphaBound b;
  b.sharp = 2.0 * static_cast<double>(n) * factor * gamma_inv;
  b.rounded = 200.0 * static_cast<double>(n) * gamma_inv;
  b.rounded_valid = factor <= 100.0;
  return b;
}

/// (100 d / (d-1)^2) (log n - log beta_c) + 1, the closed form obtained by
/// splitting int_0^{beta_c} chi_s ds at beta_c - 1/n.
inline double chi_integral_bound(int d, long long n) {
  if (n < 2) throw InvalidInput("chi_integral_bound: n must be at least 2");
  const double bc = critical_beta(d).value;
  return 100.0 * d / ((d - 1.0) * (d - 1.0)) * (std::log(static_cast<double>(n)) - std::log(bc)) + 1.0;
}

struct ExponentBound {
  double exponent = 0.0;    // 1 + 200 d^2 / (d-1)^2
  double log10_bound = 0.0; // log10(100 n^exponent)
  double bound = 0.0;       // 100 n^exponent, +inf on overflow
};

inline ExponentBound theorem1_exponent(int d, long long n) {
  if (d < 3) throw InvalidInput("theorem1_exponent: d must be at least 3");
  if (n < 1) throw InvalidInput("theorem1_exponent: n must be positive");
  ExponentBound e;
  e.exponent = 1.0 + 200.0 * d * d / ((d - 1.0) * (d - 1.0));
  e.log10_bound = 2.0 + e.exponent * std::log10(static_cast<double>(n));
  e.bound = 100.0 * std::pow(static_cast<double>(n), e.exponent);
  return e;
}

}  // namespace isingsaw
