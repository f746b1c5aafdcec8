#pragma once

// Exact and log-space combinatorial kernels shared by all probability code.

#include <boost/multiprecision/cpp_int.hpp>

#include <cmath>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

namespace dfsim {

using BigInt = boost::multiprecision::cpp_int;

/// Arbitrary-precision rational, always reduced, denominator > 0.
using Rational = boost::multiprecision::cpp_rational;

/// ln(n!) for 0 <= n <= n_max, built once per problem configuration.
/// Entries are accumulated in extended precision so that adjacent
/// differences reproduce ln(n) far below double rounding even for n in
/// the hundreds (plain double storage cannot: ulp(ln 400!) > 1e-14 * ln 400).
class LogFactorialTable {
 public:
  explicit LogFactorialTable(int n_max) {
    if (n_max < 0) throw std::domain_error("LogFactorialTable: negative size");
    values_.resize(static_cast<std::size_t>(n_max) + 1);
    long double acc = 0.0L;
    values_[0] = 0.0L;
    for (int n = 1; n <= n_max; ++n) {
      acc += std::log(static_cast<long double>(n));
      values_[static_cast<std::size_t>(n)] = acc;
    }
  }

  int n_max() const { return static_cast<int>(values_.size()) - 1; }

  double operator()(int n) const { return static_cast<double>(at(n)); }

  long double at(int n) const {
    if (n < 0 || n > n_max())
      throw std::domain_error("LogFactorialTable: index out of range");
    return values_[static_cast<std::size_t>(n)];
  }

  /// ln C(n, k); requires 0 <= k <= n <= n_max.
  double log_binomial(int n, int k) const {
    if (k < 0 || k > n)
      throw std::domain_error("log_binomial: need 0 <= k <= n");
    return static_cast<double>(at(n) - at(k) - at(n - k));
  }

 private:
  std::vector<long double> values_;
};

/// Exact C(n, k) by the multiplicative formula.  Each intermediate value is
/// itself a binomial coefficient, so every division is exact.
inline BigInt exact_binomial(int n, int k) {
  if (k < 0 || n < 0 || k > n)
    throw std::domain_error("exact_binomial: need 0 <= k <= n");
  if (k > n - k) k = n - k;
  BigInt result = 1;
  for (int i = 1; i <= k; ++i) {
    result *= n - k + i;
    result /= i;
  }
  return result;
}

inline BigInt exact_factorial(int n) {
  if (n < 0) throw std::domain_error("exact_factorial: negative n");
  BigInt result = 1;
  for (int i = 2; i <= n; ++i) result *= i;
  return result;
}

/// A signed magnitude kept in log space: sign * exp(log_mag).
/// sign == 0 encodes an exact zero (log_mag is then -inf).
struct SignedLog {
  int sign = 0;
  double log_mag = -std::numeric_limits<double>::infinity();

  static SignedLog zero() { return {}; }

  static SignedLog from_value(double x) {
    if (x == 0.0 || std::isnan(x)) return {};
    return {x > 0.0 ? +1 : -1, std::log(std::abs(x))};
  }

  double value() const {
    return sign == 0 ? 0.0 : static_cast<double>(sign) * std::exp(log_mag);
  }
};

/// Sum of sign_i * exp(log_i) under a max shift with Neumaier-compensated
/// accumulation.  The result is permutation-stable to machine level and an
/// exact cancellation comes back as sign 0.
inline SignedLog signed_log_sum(std::span<const SignedLog> terms) {
  double max_log = -std::numeric_limits<double>::infinity();
  for (const auto& t : terms)
    if (t.sign != 0 && t.log_mag > max_log) max_log = t.log_mag;
  if (!std::isfinite(max_log)) return SignedLog::zero();

  double sum = 0.0;
  double comp = 0.0;
  for (const auto& t : terms) {
    if (t.sign == 0) continue;
    const double x = static_cast<double>(t.sign) * std::exp(t.log_mag - max_log);
    const double s = sum + x;
    if (std::abs(sum) >= std::abs(x))
      comp += (sum - s) + x;
    else
      comp += (x - s) + sum;
    sum = s;
  }
  const double total = sum + comp;
  if (total == 0.0) return SignedLog::zero();
  return {total > 0.0 ? +1 : -1, max_log + std::log(std::abs(total))};
}

inline SignedLog signed_log_sum(const std::vector<SignedLog>& terms) {
  return signed_log_sum(std::span<const SignedLog>(terms));
}

/// Fixed-order compensated (Neumaier) accumulator for plain doubles.
class StableSum {
 public:
  void add(double x) {
    const double s = sum_ + x;
    if (std::abs(sum_) >= std::abs(x))
      comp_ += (sum_ - s) + x;
    else
      comp_ += (x - s) + sum_;
    sum_ = s;
  }

  double total() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

}  // namespace dfsim
