#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "isingsaw/common.hpp"
#include "isingsaw/exact_ising.hpp"
#include "isingsaw/glauber.hpp"
#include "isingsaw/rng.hpp"

namespace isingsaw {

/// E_2(f,f) = 1/2 sum_{sigma,tau} mu(sigma) P(sigma,tau) (f(sigma) - f(tau))^2.
inline double dirichlet_e2(const ExactModel& m, const ChainKernel& k, std::span<const double> f) {
  if (&k.model() != &m) throw InvalidInput("dirichlet_e2: kernel was built on a different model");
  detail::check_size(m, f);
  const auto probs = m.probabilities();
  double acc = 0.0;
  for (std::uint32_t s = 0; s < m.state_count(); ++s) {
    double local = 0.0;
    for (int i = 0; i < k.sites(); ++i) {
      const double diff = f[s] - f[s ^ (std::uint32_t{1} << i)];
      local += k.flip(s, i) * diff * diff;
    }
    acc += probs[s] * local;
  }
  return 0.5 * acc;
}

enum class DirichletForm { e1, e2 };

inline const char* to_string(DirichletForm form) { return form == DirichletForm::e1 ? "E1" : "E2"; }

inline constexpr int kLsiFreeCap = 6;

struct LsiOptions {
  int max_iterations = 3000;
  // Iterates with Ent(f^2) below this (at E f^2 = 1) are treated as constant.
  double degenerate_entropy = 1e-8;
};

struct LsiEstimate {
  double ratio = kInf;                 // best E(f,f) / Ent(f^2) found
  TestFunction minimizer;              // normalized to E f^2 = 1
  std::vector<double> restart_ratios;  // final ratio of each restart
  std::vector<double> running_best;    // best-so-far after each restart
};

namespace detail {

// Symmetric weights on the hypercube edges {s, s^bit(k)}, stored at the
// endpoint with bit k clear: the chosen form equals sum w (f(s) - f(s'))^2.
class PairForm {
 public:
  PairForm(const ExactModel& m, DirichletForm form) : sites_(m.free_count()) {
    const std::uint32_t states = m.state_count();
    weights_.assign(static_cast<std::size_t>(states) * sites_, 0.0);
    const auto probs = m.probabilities();
    if (form == DirichletForm::e1) {
      for (std::uint32_t s = 0; s < states; ++s) {
        for (int k = 0; k < sites_; ++k) {
          const std::uint32_t t = s ^ (std::uint32_t{1} << k);
          if (s < t) weights_[s * sites_ + k] = probs[s] + probs[t];
        }
      }
    } else {
      const ChainKernel kernel = build_kernel(m, kLsiFreeCap);
      for (std::uint32_t s = 0; s < states; ++s) {
        for (int k = 0; k < sites_; ++k) {
          const std::uint32_t t = s ^ (std::uint32_t{1} << k);
          if (s < t) weights_[s * sites_ + k] = 0.5 * (probs[s] * kernel.flip(s, k) + probs[t] * kernel.flip(t, k));
        }
      }
    }
  }

  double value(std::span<const double> f) const {
    double acc = 0.0;
    for (std::size_t s = 0; s < f.size(); ++s) {
      for (int k = 0; k < sites_; ++k) {
        const double w = weights_[s * sites_ + k];
        if (w == 0.0) continue;
        const double diff = f[s] - f[s ^ (std::size_t{1} << k)];
        acc += w * diff * diff;
      }
    }
    return acc;
  }

  void gradient(std::span<const double> f, std::span<double> out) const {
    std::fill(out.begin(), out.end(), 0.0);
    for (std::size_t s = 0; s < f.size(); ++s) {
      for (int k = 0; k < sites_; ++k) {
        const double w = weights_[s * sites_ + k];
        if (w == 0.0) continue;
        const std::size_t t = s ^ (std::size_t{1} << k);
        const double g = 2.0 * w * (f[s] - f[t]);
        out[s] += g;
        out[t] -= g;
      }
    }
  }

 private:
  int sites_;
  std::vector<double> weights_;
};

inline void normalize_second_moment(const ExactModel& m, std::vector<double>& f) {
  const auto probs = m.probabilities();
  double second = 0.0;
  for (std::size_t s = 0; s < f.size(); ++s) second += probs[s] * f[s] * f[s];
  const double scale = 1.0 / std::sqrt(second);
  for (double& x : f) x *= scale;
}

}  // namespace detail

/// Ratio E(f,f) / Ent(f^2) for the chosen Dirichlet form; +inf when Ent(f^2) = 0.
inline double lsi_ratio(const ExactModel& m, DirichletForm form, std::span<const double> f) {
  const double ent = entropy_of_square(m, f);
  if (ent <= 0.0) return kInf;
  if (form == DirichletForm::e1) return dirichlet_e1(m, f) / ent;
  const ChainKernel kernel = build_kernel(m, kLsiFreeCap);
  return dirichlet_e2(m, kernel, f) / ent;
}

/// Multi-start projected gradient descent on E(f,f) / Ent(f^2) over f with
/// E f^2 = 1. The result is the lowest ratio found, so an upper bound on the
/// log-Sobolev constant of the chosen form.
inline LsiEstimate lsi_ratio_minimize(const ExactModel& m, DirichletForm form, int restarts,
                                      std::uint64_t seed, const LsiOptions& opts = {}) {
  if (m.free_count() > kLsiFreeCap) {
    throw CapExceeded("lsi_ratio_minimize: more than " + std::to_string(kLsiFreeCap) + " free spins");
  }
  if (restarts <= 0) throw InvalidInput("lsi_ratio_minimize: restarts must be positive");
  const detail::PairForm pair_form(m, form);
  const auto probs = m.probabilities();
  const std::size_t states = m.state_count();

  auto evaluate = [&](std::span<const double> f, double& ent) {
    ent = entropy_of_square(m, f);
    return ent > opts.degenerate_entropy ? pair_form.value(f) / ent : kInf;
  };

  LsiEstimate best;
  std::vector<double> grad_form(states), grad(states), trial(states);
  for (int r = 0; r < restarts; ++r) {
    CounterRng rng = CounterRng::stream({seed, static_cast<std::uint64_t>(r), 0x4C53u});
    std::vector<double> f(states);
    for (double& x : f) x = std::exp(rng.normal());
    detail::normalize_second_moment(m, f);
    double ent = 0.0;
    double ratio = evaluate(f, ent);
    double step = 1.0;
    for (int it = 0; it < opts.max_iterations && std::isfinite(ratio); ++it) {
      // d/df of Q/Ent at E f^2 = 1: (grad Q - ratio * grad Ent) / Ent, where
      // grad Ent(f^2) = 2 mu f log f^2 once the second moment is 1.
      pair_form.gradient(f, grad_form);
      double norm = 0.0;
      for (std::size_t s = 0; s < states; ++s) {
        const double sq = f[s] * f[s];
        const double grad_ent = sq > 0.0 ? 2.0 * probs[s] * f[s] * std::log(sq) : 0.0;
        grad[s] = (grad_form[s] - ratio * grad_ent) / ent;
        norm += grad[s] * grad[s];
      }
      if (norm == 0.0) break;
      bool improved = false;
      for (int tries = 0; tries < 60; ++tries) {
        for (std::size_t s = 0; s < states; ++s) trial[s] = f[s] - step * grad[s];
        detail::normalize_second_moment(m, trial);
        double trial_ent = 0.0;
        const double trial_ratio = evaluate(trial, trial_ent);
        if (trial_ratio < ratio - 1e-4 * step * norm) {
          const double gain = ratio - trial_ratio;
          f.swap(trial);
          ratio = trial_ratio;
          ent = trial_ent;
          step *= 2.0;
          improved = gain > 1e-15 * ratio;
          break;
        }
        step *= 0.5;
      }
      if (!improved) break;
    }
    best.restart_ratios.push_back(ratio);
    if (ratio < best.ratio) {
      best.ratio = ratio;
      best.minimizer = f;
    }
    best.running_best.push_back(best.ratio);
  }
  if (!std::isfinite(best.ratio)) {
    throw InvalidInput("lsi_ratio_minimize: every start was degenerate (Ent(f^2) = 0)");
  }
  return best;
}

}  // namespace isingsaw
