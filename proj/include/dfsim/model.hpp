#pragma once

// Domain values shared by every computation: source occupations,
// interferometer geometry, detector count records.

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace dfsim {

/// Occupations of the two source condensates.
struct SourceConfig {
  int n_alpha = 0;
  int n_beta = 0;

  int total() const { return n_alpha + n_beta; }

  bool operator==(const SourceConfig&) const = default;
};

/// Reduce an angle to (-pi, pi].
inline double normalize_angle(double a) {
  a = std::remainder(a, 2.0 * std::numbers::pi);
  if (a <= -std::numbers::pi) a += 2.0 * std::numbers::pi;
  return a;
}

/// Sources plus the path-difference phase shift theta of the central
/// beam splitter.  All closed forms downstream assume theta = pi/2, but
/// theta stays a free parameter so the amplitude oracle can pin the
/// geometry dependence independently.
struct InterferometerConfig {
  double theta = std::numbers::pi / 2;
  SourceConfig source;
};

/// One complete measurement record: counts at the two interferometer
/// detectors (m1, m2) and the two side detectors (m_alpha, m_beta).
struct OutcomeRecord {
  int m1 = 0;
  int m2 = 0;
  int m_alpha = 0;
  int m_beta = 0;

  int total() const { return m1 + m2 + m_alpha + m_beta; }
  int interferometer_count() const { return m1 + m2; }  // M
  int side_count() const { return m_alpha + m_beta; }

  bool operator==(const OutcomeRecord&) const = default;
};

/// Output-mode decomposition: row i holds (v_i_alpha, v_i_beta) such that
/// output mode i = v_i_alpha * (source alpha) + v_i_beta * (source beta).
struct ModeExpansion {
  std::array<std::array<std::complex<double>, 2>, 4> rows{};
};

/// Coefficient rows traced from each detector back to the sources, with a
/// 1/sqrt(2) factor per beam splitter and a pi/2 phase per reflection.
/// Rows 1-2 are the interferometer outputs, rows 3-4 the side taps.
inline ModeExpansion standard_mode_expansion(const InterferometerConfig& cfg) {
  const std::complex<double> i(0.0, 1.0);
  const std::complex<double> et = std::exp(i * cfg.theta);
  const double r = 1.0 / std::sqrt(2.0);
  ModeExpansion m;
  m.rows[0] = {0.5 * et, 0.5 * i};
  m.rows[1] = {0.5 * i * et, std::complex<double>(0.5, 0.0)};
  m.rows[2] = {i * r, std::complex<double>(0.0, 0.0)};
  m.rows[3] = {std::complex<double>(0.0, 0.0), i * r};
  return m;
}

/// All lossless outcomes for N particles: 4-part compositions of N in
/// lexicographic (m1, m2, m_alpha) order, C(N+3, 3) records in total.
/// The cap bounds the O(N^3) enumeration; exceeding it is refused.
inline std::vector<OutcomeRecord> enumerate_outcomes(const SourceConfig& src,
                                                     int cap = 40) {
  const int n = src.total();
  if (n < 0) throw std::domain_error("enumerate_outcomes: negative N");
  if (n > cap)
    throw std::length_error("enumerate_outcomes: N = " + std::to_string(n) +
                            " exceeds enumeration cap " + std::to_string(cap));
  std::vector<OutcomeRecord> out;
  out.reserve(static_cast<std::size_t>(n + 3) * (n + 2) * (n + 1) / 6);
  for (int m1 = 0; m1 <= n; ++m1)
    for (int m2 = 0; m2 <= n - m1; ++m2)
      for (int ma = 0; ma <= n - m1 - m2; ++ma)
        out.push_back({m1, m2, ma, n - m1 - m2 - ma});
  return out;
}

}  // namespace dfsim
