#pragma once

// Integral representations of the joint detection statistics: the
// interferometer kernel R(phi) and its reduced form, the double-angle
// probability integral over the quantum angle Lambda and the classical
// phase angle lambda, the (m1, m2) marginal with its collapsed
// (cos Lambda)^(N-M) kernel, and the sharp-peak approximation of the
// population oscillations.
//
// All integrands are trigonometric polynomials of known degree (<= 2N),
// so the periodic trapezoid rule with 2N+3 equispaced nodes per axis is
// exact up to rounding.  Combinatorial prefactors and node sums are kept
// in (sign, log) form and recombined once at the end.

#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "dfsim/combinatorics.hpp"
#include "dfsim/model.hpp"

namespace dfsim {

/// z^n by binary powering (exact integer exponent, no log branch issues).
inline std::complex<double> cpow_int(std::complex<double> z, int n) {
  std::complex<double> result(1.0, 0.0);
  while (n > 0) {
    if (n & 1) result *= z;
    z *= z;
    n >>= 1;
  }
  return result;
}

inline double ipow(double x, int n) {
  double result = 1.0;
  while (n > 0) {
    if (n & 1) result *= x;
    x *= x;
    n >>= 1;
  }
  return result;
}

/// R(phi) = (e^{i theta} + i e^{i phi})^m1 (i e^{i theta} + e^{i phi})^m2.
inline std::complex<double> eval_R(int m1, int m2, double theta, double phi) {
  const std::complex<double> i(0.0, 1.0);
  const std::complex<double> et = std::exp(i * theta);
  const std::complex<double> ep = std::exp(i * phi);
  return cpow_int(et + i * ep, m1) * cpow_int(i * et + ep, m2);
}

/// Reduced kernel R(phi) * (2 i e^{i phi/2})^{-M}; real at theta = pi/2.
inline double r_reduced(int m1, int m2, double theta, double phi) {
  const std::complex<double> i(0.0, 1.0);
  const std::complex<double> unit = 2.0 * i * std::exp(i * (phi / 2.0));
  return (eval_R(m1, m2, theta, phi) / cpow_int(unit, m1 + m2)).real();
}

/// Closed form of the reduced kernel at theta = pi/2.
inline double r_reduced_closed(int m1, int m2, double phi) {
  return ipow(std::cos(phi / 2.0), m1) * ipow(std::sin(phi / 2.0), m2);
}

struct RCurvePoint {
  double phi = 0.0;
  std::complex<double> value{0.0, 0.0};
  double reduced = 0.0;
};

inline RCurvePoint r_curve_point(int m1, int m2, double theta, double phi) {
  return {phi, eval_R(m1, m2, theta, phi), r_reduced(m1, m2, theta, phi)};
}

/// Relative-phase magnitude the interferometer counts select; the two
/// branches of the post-measurement state sit at +/- phi0.
struct PeakLocation {
  double phi0 = 0.0;
  std::pair<double, double> pair() const { return {phi0, -phi0}; }
};

inline PeakLocation peak_location(int m1, int m2) {
  if (m1 < 0 || m2 < 0 || m1 + m2 == 0)
    throw std::domain_error("peak_location: need m1 + m2 > 0");
  if (m1 == 0) return {std::numbers::pi};
  return {2.0 * std::atan(std::sqrt(static_cast<double>(m2) /
                                    static_cast<double>(m1)))};
}

/// F(Lambda, lambda) = [cos L + cos l]^m1 [cos L - cos l]^m2.  Negative
/// values are meaningful: off-phase-diagonal weight enters as a
/// quasi-probability.
inline double eval_F(int m1, int m2, double lambda_q, double lambda_c) {
  const double cq = std::cos(lambda_q);
  const double cc = std::cos(lambda_c);
  return ipow(cq + cc, m1) * ipow(cq - cc, m2);
}

struct FLandscapePoint {
  double lambda_q = 0.0;
  double lambda_c = 0.0;
  double value = 0.0;
};

inline FLandscapePoint f_landscape_point(int m1, int m2, double lambda_q,
                                         double lambda_c) {
  return {lambda_q, lambda_c, eval_F(m1, m2, lambda_q, lambda_c)};
}

enum class ExtremumKind { peak, depression };

struct FExtremum {
  double lambda_q = 0.0;
  double lambda_c = 0.0;
  ExtremumKind kind = ExtremumKind::peak;
};

struct FExtremaResult {
  std::vector<FExtremum> extrema;
  bool degenerate = false;
};

/// The eight interior extrema of F.  With a = 2 arctan sqrt(m2/m1) and
/// b = pi - a they sit at (0, +/-a), (pi, +/-b), (+/-a, 0), (+/-b, pi).
/// Kind is classified from the sign of F at the point, which reproduces
/// the all-even and odd-m2 cases and settles mixed parity numerically.
/// m1 = 0 or m2 = 0 collapses the structure to ridges and is flagged.
inline FExtremaResult find_extrema(int m1, int m2) {
  if (m1 <= 0 || m2 <= 0) return {{}, true};
  const double a = peak_location(m1, m2).phi0;
  const double b = std::numbers::pi - a;
  const double pi = std::numbers::pi;
  FExtremaResult result;
  const double pts[8][2] = {{0.0, a},  {0.0, -a}, {pi, b},  {pi, -b},
                            {a, 0.0},  {-a, 0.0}, {b, pi},  {-b, pi}};
  for (const auto& p : pts) {
    const double f = eval_F(m1, m2, p[0], p[1]);
    result.extrema.push_back(
        {p[0], p[1], f >= 0.0 ? ExtremumKind::peak : ExtremumKind::depression});
  }
  return result;
}

namespace detail {

// The node pipeline runs in extended precision: the integrands cancel to
// zero for out-of-band cosine frequencies, and double rounding alone
// leaves ~1e-14 of noise there, right at the oracle-comparison floor.

struct SignedLogL {
  int sign = 0;
  long double log_mag = -std::numeric_limits<long double>::infinity();
};

/// (sign, log) of c1^m1 * c2^m2 with exact-zero handling.
inline SignedLogL bracket_power(long double c1, int m1, long double c2,
                                int m2) {
  int sign = 1;
  long double log_mag = 0.0L;
  if (m1 > 0) {
    if (c1 == 0.0L) return {};
    if (c1 < 0.0L && (m1 & 1)) sign = -sign;
    log_mag += m1 * std::log(std::abs(c1));
  }
  if (m2 > 0) {
    if (c2 == 0.0L) return {};
    if (c2 < 0.0L && (m2 & 1)) sign = -sign;
    log_mag += m2 * std::log(std::abs(c2));
  }
  return {sign, log_mag};
}

inline SignedLogL signed_log_sum_l(const std::vector<SignedLogL>& terms) {
  long double max_log = -std::numeric_limits<long double>::infinity();
  for (const auto& t : terms)
    if (t.sign != 0 && t.log_mag > max_log) max_log = t.log_mag;
  if (max_log == -std::numeric_limits<long double>::infinity()) return {};

  long double sum = 0.0L;
  long double comp = 0.0L;
  for (const auto& t : terms) {
    if (t.sign == 0) continue;
    const long double x = t.sign * std::exp(t.log_mag - max_log);
    const long double s = sum + x;
    if (std::abs(sum) >= std::abs(x))
      comp += (sum - s) + x;
    else
      comp += (x - s) + sum;
    sum = s;
  }
  const long double total = sum + comp;
  if (total == 0.0L) return {};
  return {total > 0.0L ? +1 : -1, max_log + std::log(std::abs(total))};
}

inline SignedLogL combine(const SignedLogL& a, long double factor) {
  if (a.sign == 0 || factor == 0.0L) return {};
  return {factor > 0.0L ? a.sign : -a.sign,
          a.log_mag + std::log(std::abs(factor))};
}

}  // namespace detail

/// Shared quadrature state for all outcomes with fixed (m1, m2): the
/// lambda average of the bracket kernel per Lambda node.  Each side-count
/// probability is then a single cosine transform over Lambda, so a full
/// population scan costs one grid pass plus O(nodes) per point.
///
/// The value is independent of theta: the path phase enters the
/// double-phase average only as a shift of a periodic integration
/// variable.  (The theta-dependent amplitude oracle pins this in tests.)
class ScanKernel {
 public:
  ScanKernel(const SourceConfig& src, int m1, int m2, int node_factor = 1)
      : src_(src),
        m1_(m1),
        m2_(m2),
        n_(src.total()),
        table_(std::max(1, 2 * src.total())) {
    if (m1 < 0 || m2 < 0 || m1 + m2 > n_)
      throw std::invalid_argument("ScanKernel: need 0 <= m1 + m2 <= N");
    if (node_factor < 1)
      throw std::invalid_argument("ScanKernel: node_factor >= 1");
    nodes_ = node_factor * (2 * n_ + 3);
    const long double pi_l = std::numbers::pi_v<long double>;
    const long double step = 2.0L * pi_l / nodes_;

    lambda_q_.resize(nodes_);
    cos_q_.resize(nodes_);
    for (int t = 0; t < nodes_; ++t) {
      const long double angle = -pi_l + step * t;
      lambda_q_[t] = angle;
      cos_q_[t] = std::cos(angle);
    }

    // Both axes share the node set; cos_q_ doubles as the lambda grid.
    rows_.resize(nodes_);
    std::vector<detail::SignedLogL> buf(nodes_);
    for (int t = 0; t < nodes_; ++t) {
      const long double cq = cos_q_[t];
      for (int s = 0; s < nodes_; ++s)
        buf[s] = detail::bracket_power(cq + cos_q_[s], m1_, cq - cos_q_[s], m2_);
      rows_[t] = detail::signed_log_sum_l(buf);
    }
  }

  const SourceConfig& source() const { return src_; }
  int m1() const { return m1_; }
  int m2() const { return m2_; }
  int side_total() const { return n_ - m1_ - m2_; }

  /// Joint probability P(m1, m2, m_alpha, N - M - m_alpha).
  double probability(int m_alpha) const {
    const int m_beta = side_total() - m_alpha;
    if (m_alpha < 0 || m_beta < 0)
      throw std::invalid_argument("ScanKernel: m_alpha out of range");
    const int k = (src_.n_alpha - m_alpha) - (src_.n_beta - m_beta);

    std::vector<detail::SignedLogL> terms(rows_.size());
    for (std::size_t t = 0; t < rows_.size(); ++t)
      terms[t] = detail::combine(rows_[t], std::cos(k * lambda_q_[t]));
    const detail::SignedLogL s = detail::signed_log_sum_l(terms);
    if (s.sign == 0) return 0.0;

    const long double log_pref =
        table_.at(src_.n_alpha) + table_.at(src_.n_beta) - table_.at(m1_) -
        table_.at(m2_) - table_.at(m_alpha) - table_.at(m_beta) -
        n_ * std::numbers::ln2_v<long double> -
        2.0L * std::log(static_cast<long double>(nodes_));
    return static_cast<double>(s.sign * std::exp(s.log_mag + log_pref));
  }

  /// Marginal P(m1, m2): summing the side counts collapses the cosine
  /// transform into a (cos Lambda)^(N-M) kernel.
  double marginal() const {
    const int rest = side_total();
    const int k = src_.n_alpha - src_.n_beta;

    std::vector<detail::SignedLogL> terms(rows_.size());
    for (std::size_t t = 0; t < rows_.size(); ++t) {
      const detail::SignedLogL wedge =
          detail::bracket_power(cos_q_[t], rest, 1.0L, 0);
      detail::SignedLogL r = rows_[t];
      if (r.sign != 0 && wedge.sign != 0) {
        r.sign *= wedge.sign;
        r.log_mag += wedge.log_mag;
      } else {
        r = {};
      }
      terms[t] = detail::combine(r, std::cos(k * lambda_q_[t]));
    }
    const detail::SignedLogL s = detail::signed_log_sum_l(terms);
    if (s.sign == 0) return 0.0;

    const long double log_pref =
        table_.at(src_.n_alpha) + table_.at(src_.n_beta) - table_.at(m1_) -
        table_.at(m2_) - table_.at(rest) -
        (m1_ + m2_) * std::numbers::ln2_v<long double> -
        2.0L * std::log(static_cast<long double>(nodes_));
    return static_cast<double>(s.sign * std::exp(s.log_mag + log_pref));
  }

  int nodes() const { return nodes_; }

 private:
  SourceConfig src_;
  int m1_;
  int m2_;
  int n_;
  int nodes_ = 0;
  LogFactorialTable table_;
  std::vector<long double> lambda_q_;
  std::vector<long double> cos_q_;
  std::vector<detail::SignedLogL> rows_;
};

/// Joint probability of one outcome record via the double-angle integral.
inline double probability_integral(const InterferometerConfig& cfg,
                                   const OutcomeRecord& out,
                                   int node_factor = 1) {
  if (out.total() != cfg.source.total())
    throw std::invalid_argument("probability_integral: outcome does not sum to N");
  const ScanKernel kernel(cfg.source, out.m1, out.m2, node_factor);
  return kernel.probability(out.m_alpha);
}

/// Marginal P(m1, m2) through the collapsed single-kernel form.
inline double marginal_p12(const InterferometerConfig& cfg, int m1, int m2,
                           int node_factor = 1) {
  if (m1 + m2 > cfg.source.total())
    throw std::invalid_argument("marginal_p12: M exceeds N");
  return ScanKernel(cfg.source, m1, m2, node_factor).marginal();
}

/// Marginal P(m1, m2) by direct summation over the side counts; the
/// independent route the collapsed form is checked against.
inline double marginal_p12_direct(const InterferometerConfig& cfg, int m1,
                                  int m2, int node_factor = 1) {
  if (m1 + m2 > cfg.source.total())
    throw std::invalid_argument("marginal_p12_direct: M exceeds N");
  const ScanKernel kernel(cfg.source, m1, m2, node_factor);
  StableSum sum;
  for (int ma = 0; ma <= kernel.side_total(); ++ma) sum.add(kernel.probability(ma));
  return sum.total();
}

/// Sharp-peak approximation of the population oscillations for balanced
/// sources (unnormalized): 1 + (-1)^m2 cos[(m_alpha - m_beta) phi0].
inline double qualitative_probability(const OutcomeRecord& out, double phi0) {
  const double parity = (out.m2 & 1) ? -1.0 : 1.0;
  return 1.0 + parity * std::cos((out.m_alpha - out.m_beta) * phi0);
}

}  // namespace dfsim
