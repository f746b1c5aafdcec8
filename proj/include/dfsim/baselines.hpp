#pragma once

// The symmetry-broken baseline and the sequential phase-emergence
// sampler: everything a classical-phase description of the two sources
// predicts.
//
// A phase state with broken-symmetry angle chi sends each particle
// independently through the optics, so the four counts are multinomial:
// the interferometer pair follows |R(chi)|^2 and the side pair is a plain
// binomial that never depends on chi.  Averaging chi over the circle is
// the statistical mixture the quantum double-Fock computation is
// contrasted against.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <utility>
#include <vector>

#include "dfsim/combinatorics.hpp"
#include "dfsim/model.hpp"
#include "dfsim/rng.hpp"

namespace dfsim {

struct SsbConfig {
  double chi = 0.0;  // broken-symmetry relative phase, (-pi, pi]
  SourceConfig source;
  double theta = std::numbers::pi / 2;
};

/// Fully normalized outcome probability for a phase state of phase chi:
/// multinomial over the four detectors with
///   p1 = (1 + sin(theta - chi)) / 4,  p2 = (1 - sin(theta - chi)) / 4,
///   p3 = p4 = 1/4.
inline double ssb_probability(const SsbConfig& cfg, const OutcomeRecord& out) {
  const int n = cfg.source.total();
  if (out.total() != n)
    throw std::invalid_argument("ssb_probability: outcome does not sum to N");
  const double p1 = (1.0 + std::sin(cfg.theta - cfg.chi)) / 4.0;
  const double p2 = (1.0 - std::sin(cfg.theta - cfg.chi)) / 4.0;
  if ((p1 <= 0.0 && out.m1 > 0) || (p2 <= 0.0 && out.m2 > 0)) return 0.0;

  const LogFactorialTable table(std::max(1, 2 * n));
  double log_p = table(n) - table(out.m1) - table(out.m2) -
                 table(out.m_alpha) - table(out.m_beta) -
                 out.side_count() * 2.0 * std::numbers::ln2;
  if (out.m1 > 0) log_p += out.m1 * std::log(p1);
  if (out.m2 > 0) log_p += out.m2 * std::log(p2);
  return std::exp(log_p);
}

/// Uniform average of ssb_probability over chi on a trig-exact grid
/// (the integrand has trigonometric degree m1 + m2).
inline double ssb_phase_averaged(const SourceConfig& src, double theta,
                                 const OutcomeRecord& out) {
  const int n = src.total();
  const int nodes = 2 * std::max(1, n) + 3;
  StableSum sum;
  SsbConfig cfg{0.0, src, theta};
  for (int t = 0; t < nodes; ++t) {
    cfg.chi = -std::numbers::pi + 2.0 * std::numbers::pi * t / nodes;
    sum.add(ssb_probability(cfg, out));
  }
  return sum.total() / nodes;
}

// ---------------------------------------------------------------------------
// Sequential phase emergence
// ---------------------------------------------------------------------------

/// Posterior over the latent phase lambda on a uniform circular grid,
/// together with the sampled dimensionless positions x = k.r.
struct EmergencePosteriorState {
  std::vector<double> grid;
  std::vector<double> weights;
  std::vector<double> history;
};

inline EmergencePosteriorState make_emergence_state(int grid_size) {
  if (grid_size < 2)
    throw std::domain_error("make_emergence_state: grid too small");
  EmergencePosteriorState st;
  st.grid.resize(grid_size);
  st.weights.assign(grid_size, 1.0 / grid_size);
  for (int g = 0; g < grid_size; ++g)
    st.grid[g] =
        -std::numbers::pi + 2.0 * std::numbers::pi * (g + 0.5) / grid_size;
  return st;
}

/// Mean resultant length and circular mean of the posterior.
inline std::pair<double, double> circular_resultant(
    const EmergencePosteriorState& st) {
  StableSum c, s;
  for (std::size_t g = 0; g < st.grid.size(); ++g) {
    c.add(st.weights[g] * std::cos(st.grid[g]));
    s.add(st.weights[g] * std::sin(st.grid[g]));
  }
  return {std::hypot(c.total(), s.total()), std::atan2(s.total(), c.total())};
}

/// Circular standard deviation sqrt(-2 ln R); infinite for R = 0.
inline double circular_std(double resultant_length) {
  if (resultant_length <= 0.0) return std::numeric_limits<double>::infinity();
  if (resultant_length >= 1.0) return 0.0;
  return std::sqrt(-2.0 * std::log(resultant_length));
}

/// Bayes update after observing position x: each grid weight picks up the
/// single-particle fringe factor 1 + cos(x + lambda_g).
inline void posterior_update(EmergencePosteriorState& st, double x) {
  StableSum norm;
  for (std::size_t g = 0; g < st.grid.size(); ++g) {
    st.weights[g] *= 1.0 + std::cos(x + st.grid[g]);
    norm.add(st.weights[g]);
  }
  const double total = norm.total();
  if (total <= 0.0)
    throw std::runtime_error("posterior_update: posterior collapsed to zero");
  for (auto& w : st.weights) w /= total;
  st.history.push_back(x);
}

/// Draws the next position from the predictive density
///   f(x) = (1 + c cos x - s sin x) / (2 pi),
///   c = sum_g w_g cos lambda_g,  s = sum_g w_g sin lambda_g,
/// by monotone CDF inversion (bisection-safeguarded Newton), then applies
/// the posterior update.  Deterministic for a given generator state.
inline double emergence_step(EmergencePosteriorState& st, SplitMix64& rng) {
  StableSum cs, ss;
  for (std::size_t g = 0; g < st.grid.size(); ++g) {
    cs.add(st.weights[g] * std::cos(st.grid[g]));
    ss.add(st.weights[g] * std::sin(st.grid[g]));
  }
  const double c = cs.total();
  const double s = ss.total();

  const double u = rng.uniform();
  const double target = 2.0 * std::numbers::pi * u;
  // cdf(x) = (x + pi) + c sin x + s (cos x + 1), increasing on [-pi, pi].
  const auto cdf = [&](double x) {
    return (x + std::numbers::pi) + c * std::sin(x) + s * (std::cos(x) + 1.0);
  };
  const auto pdf = [&](double x) {
    return 1.0 + c * std::cos(x) - s * std::sin(x);
  };

  double lo = -std::numbers::pi;
  double hi = std::numbers::pi;
  double x = -std::numbers::pi + target;  // exact for a flat predictive
  for (int iter = 0; iter < 200; ++iter) {
    const double f = cdf(x) - target;
    if (f > 0.0)
      hi = x;
    else
      lo = x;
    const double d = pdf(x);
    double step = d > 1e-12 ? f / d : 0.0;
    double next = x - step;
    if (step == 0.0 || next <= lo || next >= hi) next = 0.5 * (lo + hi);
    if (std::abs(next - x) < 1e-14) {
      x = next;
      break;
    }
    x = next;
  }

  posterior_update(st, x);
  return x;
}

struct EmergenceRun {
  EmergencePosteriorState state;
  std::vector<double> positions;
  std::vector<double> width_trace;  // circular std, prior first
  std::uint64_t seed = 0;
};

/// Deterministic sequential run: M draws on a G-point grid.
inline EmergenceRun emergence_run(int steps, int grid_size,
                                  std::uint64_t seed) {
  if (steps < 0) throw std::domain_error("emergence_run: negative step count");
  if (grid_size < 64) throw std::domain_error("emergence_run: grid size < 64");
  EmergenceRun run;
  run.seed = seed;
  run.state = make_emergence_state(grid_size);
  SplitMix64 rng(seed);
  run.width_trace.push_back(circular_std(circular_resultant(run.state).first));
  for (int m = 0; m < steps; ++m) {
    run.positions.push_back(emergence_step(run.state, rng));
    run.width_trace.push_back(
        circular_std(circular_resultant(run.state).first));
  }
  return run;
}

/// Rayleigh test p-value for uniformity of n angles with mean resultant
/// length rbar (standard series approximation).
inline double rayleigh_p_value(int n, double rbar) {
  const double z = n * rbar * rbar;
  const double p =
      std::exp(-z) *
      (1.0 + (2.0 * z - z * z) / (4.0 * n) -
       (24.0 * z - 132.0 * z * z + 76.0 * z * z * z - 9.0 * z * z * z * z) /
           (288.0 * n * n));
  return std::clamp(p, 0.0, 1.0);
}

}  // namespace dfsim
