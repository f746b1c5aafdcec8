#pragma once

// Ground-truth transition amplitudes for a double Fock state sent through
// the four-detector interferometer, via two independent routes:
//
//   amplitude()             closed single-sum form of the vacuum matrix
//                           element, obtained by binomially expanding the
//                           interferometer-mode operator powers
//   brute_force_amplitude() dense multivariate-polynomial expansion of the
//                           full operator product
//
// plus an exact-rational tier at theta = pi/2, where each mode coefficient
// is a power of i times a half-integer power of 2.

#include <cmath>
#include <complex>
#include <cstdlib>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <vector>

#include "dfsim/combinatorics.hpp"
#include "dfsim/model.hpp"

namespace dfsim {

/// Exact amplitude at theta = pi/2:
///   value = (re + i*im) * 2^(half_pow2 / 2) * sqrt(radicand)
/// The phase of the matrix element is always a power of i, so one of
/// re/im is zero.  radicand carries the factorial ratio of the Fock
/// normalizations; perfect-square parts are folded into re/im.
struct ExactAmplitude {
  Rational re = 0;
  Rational im = 0;
  long half_pow2 = 0;
  Rational radicand = 1;

  /// |value|^2 as an exact rational.
  Rational probability() const {
    Rational p = (re * re + im * im) * radicand;
    if (half_pow2 >= 0) {
      p *= Rational(BigInt(1) << half_pow2, 1);
    } else {
      p /= Rational(BigInt(1) << (-half_pow2), 1);
    }
    return p;
  }

  std::complex<double> to_complex() const {
    const long double mag =
        std::exp2(0.5L * static_cast<long double>(half_pow2)) *
        std::sqrt(radicand.convert_to<long double>());
    return {static_cast<double>(re.convert_to<long double>() * mag),
            static_cast<double>(im.convert_to<long double>() * mag)};
  }
};

struct Amplitude {
  std::complex<double> value{0.0, 0.0};
  std::optional<ExactAmplitude> exact;
};

namespace detail {

inline bool is_half_pi(double theta) { return theta == std::numbers::pi / 2; }

/// Folds perfect-square parts of the radicand into the Gaussian coefficient.
inline void fold_square(ExactAmplitude& a) {
  if (a.radicand == 0 || a.radicand == 1) return;
  const BigInt num = numerator(a.radicand);
  const BigInt den = denominator(a.radicand);
  const BigInt rn = sqrt(num);
  const BigInt rd = sqrt(den);
  if (rn * rn == num && rd * rd == den) {
    const Rational root(rn, rd);
    a.re *= root;
    a.im *= root;
    a.radicand = 1;
  }
}

/// Multiplies a Gaussian-rational pair by i^power.
inline void rotate_by_i(Rational& re, Rational& im, int power) {
  switch (((power % 4) + 4) % 4) {
    case 0: break;
    case 1: std::swap(re, im); re = -re; break;
    case 2: re = -re; im = -im; break;
    case 3: std::swap(re, im); im = -im; break;
  }
}

}  // namespace detail

/// Transition amplitude for one outcome record.  Expanding the two
/// interferometer-mode powers and keeping the terms whose total source
/// annihilation counts match the occupations leaves a single alternating
/// sum over the split j of the alpha annihilations:
///
///   C = K * i^(m1 + d + m_alpha + m_beta) * e^(i theta d)
///         * 2^(-M - (m_alpha + m_beta)/2) * sqrt(Na! Nb! / prod m_i!)
///   K = sum_j (-1)^j C(m1, j) C(m2, d - j),    d = Na - m_alpha
///
/// Outcomes whose count constraint is unsatisfiable (d outside [0, M])
/// have amplitude zero; they are legitimate zero-probability records.
inline Amplitude amplitude(const InterferometerConfig& cfg,
                           const OutcomeRecord& out) {
  const int na = cfg.source.n_alpha;
  const int nb = cfg.source.n_beta;
  const int n = na + nb;
  if (out.total() != n)
    throw std::invalid_argument("amplitude: outcome does not sum to N");
  if (out.m1 < 0 || out.m2 < 0 || out.m_alpha < 0 || out.m_beta < 0)
    throw std::invalid_argument("amplitude: negative count");

  const int m_big = out.interferometer_count();
  const int d = na - out.m_alpha;
  const bool exact_eligible = detail::is_half_pi(cfg.theta);

  Amplitude result;
  if (d < 0 || d > m_big) {
    if (exact_eligible) result.exact = ExactAmplitude{};  // exact zero
    return result;
  }

  const LogFactorialTable table(std::max(1, 2 * n));

  // Alternating binomial sum in log space.
  const int jlo = std::max(0, d - out.m2);
  const int jhi = std::min(out.m1, d);
  std::vector<SignedLog> terms;
  terms.reserve(static_cast<std::size_t>(jhi - jlo + 1));
  for (int j = jlo; j <= jhi; ++j) {
    terms.push_back({(j % 2 == 0) ? +1 : -1,
                     table.log_binomial(out.m1, j) +
                         table.log_binomial(out.m2, d - j)});
  }
  const SignedLog k_sum = signed_log_sum(terms);

  const double log_norm =
      0.5 * (table(na) + table(nb) - table(out.m1) - table(out.m2) -
             table(out.m_alpha) - table(out.m_beta)) -
      (m_big + 0.5 * out.side_count()) * std::numbers::ln2;

  if (k_sum.sign != 0) {
    const double mag = std::exp(k_sum.log_mag + log_norm) * k_sum.sign;
    const int ipow = (out.m1 + d + out.side_count()) % 4;
    const std::complex<double> i_unit(0.0, 1.0);
    std::complex<double> phase(1.0, 0.0);
    switch (ipow) {
      case 1: phase = i_unit; break;
      case 2: phase = -1.0; break;
      case 3: phase = -i_unit; break;
    }
    result.value = mag * phase * std::exp(i_unit * (cfg.theta * d));
  }

  if (exact_eligible) {
    ExactAmplitude ex;
    BigInt k_exact = 0;
    for (int j = jlo; j <= jhi; ++j) {
      const BigInt t = exact_binomial(out.m1, j) * exact_binomial(out.m2, d - j);
      k_exact += (j % 2 == 0) ? t : -t;
    }
    ex.re = Rational(k_exact, 1);
    ex.im = 0;
    detail::rotate_by_i(ex.re, ex.im, out.m1 + 2 * d + out.side_count());
    ex.half_pow2 = -2L * m_big - out.side_count();
    ex.radicand =
        Rational(exact_factorial(na) * exact_factorial(nb),
                 exact_factorial(out.m1) * exact_factorial(out.m2) *
                     exact_factorial(out.m_alpha) * exact_factorial(out.m_beta));
    detail::fold_square(ex);
    result.exact = ex;
  }
  return result;
}

/// Reference implementation of the same matrix element by full expansion of
/// the operator product as a polynomial in the two annihilation symbols.
/// Monomials exceeding either source occupation can never reach the target
/// Fock component and are dropped as they appear.  Kept deliberately
/// independent of amplitude(); bounded to N <= 16.
inline Amplitude brute_force_amplitude(const InterferometerConfig& cfg,
                                       const OutcomeRecord& out) {
  const int na = cfg.source.n_alpha;
  const int nb = cfg.source.n_beta;
  const int n = na + nb;
  if (out.total() != n)
    throw std::invalid_argument("brute_force_amplitude: outcome does not sum to N");
  if (n > 16)
    throw std::length_error("brute_force_amplitude: N > 16 refused");

  const ModeExpansion modes = standard_mode_expansion(cfg);
  const std::size_t cols = static_cast<std::size_t>(nb) + 1;
  std::vector<std::complex<double>> coeff((na + 1) * cols, {0.0, 0.0});
  std::vector<std::complex<double>> next(coeff.size());
  coeff[0] = {1.0, 0.0};

  const int reps[4] = {out.m_alpha, out.m_beta, out.m1, out.m2};
  const int row_of[4] = {2, 3, 0, 1};
  for (int f = 0; f < 4; ++f) {
    const std::complex<double> va = modes.rows[row_of[f]][0];
    const std::complex<double> vb = modes.rows[row_of[f]][1];
    for (int rep = 0; rep < reps[f]; ++rep) {
      std::fill(next.begin(), next.end(), std::complex<double>(0.0, 0.0));
      for (int p = 0; p <= na; ++p)
        for (int q = 0; q <= nb; ++q) {
          const std::complex<double> c = coeff[p * cols + q];
          if (c == std::complex<double>(0.0, 0.0)) continue;
          if (p + 1 <= na) next[(p + 1) * cols + q] += va * c;
          if (q + 1 <= nb) next[p * cols + q + 1] += vb * c;
        }
      coeff.swap(next);
    }
  }

  const LogFactorialTable table(std::max(1, 2 * n));
  const double norm = std::exp(
      0.5 * (table(na) + table(nb) - table(out.m1) - table(out.m2) -
             table(out.m_alpha) - table(out.m_beta)));
  return {coeff[na * cols + nb] * norm, std::nullopt};
}

/// Exact |C|^2 as a rational; only available at theta = pi/2.
inline Rational exact_probability(const InterferometerConfig& cfg,
                                  const OutcomeRecord& out) {
  if (!detail::is_half_pi(cfg.theta))
    throw std::domain_error("exact_probability: requires theta = pi/2");
  return amplitude(cfg, out).exact->probability();
}

/// |C|^2; the exact-rational path is used when theta = pi/2 and N <= 30.
inline double probability_oracle(const InterferometerConfig& cfg,
                                 const OutcomeRecord& out) {
  if (detail::is_half_pi(cfg.theta) && cfg.source.total() <= 30)
    return exact_probability(cfg, out).convert_to<double>();
  return std::norm(amplitude(cfg, out).value);
}

}  // namespace dfsim
