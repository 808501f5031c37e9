#pragma once

#include <cmath>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>

namespace isingsaw {

// Malformed or inconsistent input (bad edge list, bad spec string, bad pins).
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A configured size cap (enumeration, kernel, SAW node count) would be exceeded.
class CapExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Iterative method did not reach its tolerance inside the iteration budget.
class NotConverged : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Conditioning on an event of probability zero.
class ZeroProbability : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// A spin fixed to `sign` (+1 or -1) at a vertex or tree node.
struct Pin {
  int site = 0;
  int sign = 1;
  bool operator==(const Pin&) const = default;
};

inline double log_sum_exp(double a, double b) {
  if (a == -kInf) return b;
  if (b == -kInf) return a;
  const double m = a > b ? a : b;
  return m + std::log1p(std::exp(-std::abs(a - b)));
}

inline double log_sum_exp(std::span<const double> xs) {
  double m = -kInf;
  for (double x : xs) m = x > m ? x : m;
  if (m == -kInf) return -kInf;
  double acc = 0.0;
  for (double x : xs) acc += std::exp(x - m);
  return m + std::log(acc);
}

}  // namespace isingsaw
