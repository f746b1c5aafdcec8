#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "dfsim/amplitude.hpp"
#include "dfsim/quadrature.hpp"
#include "dfsim/rng.hpp"

using namespace dfsim;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kHalfPi = kPi / 2;

}  // namespace

TEST_CASE("reduced kernel: general form reduces to the closed form at pi/2") {
  SplitMix64 rng(0xabcdu);
  for (int trial = 0; trial < 200; ++trial) {
    const int m1 = static_cast<int>(rng.next() % 40);
    const int m2 = 1 + static_cast<int>(rng.next() % 40);
    const double phi = -kPi + 2.0 * kPi * rng.uniform();
    const double general = r_reduced(m1, m2, kHalfPi, phi);
    const double closed = r_reduced_closed(m1, m2, phi);
    REQUIRE_THAT(general, WithinAbs(closed, 1e-12));
  }
}

TEST_CASE("reduced kernel: anchor values") {
  REQUIRE_THAT(r_reduced(7, 0, kHalfPi, 0.0), WithinAbs(1.0, 1e-14));
  REQUIRE_THAT(r_reduced(1, 1, kHalfPi, kHalfPi), WithinAbs(0.5, 1e-14));
  // phi = 0 is the global maximum of |reduced| when m2 = 0
  for (double phi = -3.1; phi < 3.2; phi += 0.1)
    REQUIRE(std::abs(r_reduced(7, 0, kHalfPi, phi)) <= 1.0 + 1e-14);
}

TEST_CASE("reduced-kernel maxima sit at +/- 0.73 pi for counts (17, 83)") {
  const int grid = 400001;
  double best_pos = 0.0, best_neg = 0.0, best_pos_phi = 0.0, best_neg_phi = 0.0;
  for (int i = 0; i < grid; ++i) {
    const double phi = -kPi + 2.0 * kPi * i / (grid - 1);
    const double v = std::abs(r_reduced_closed(17, 83, phi));
    if (phi > 0.0 && v > best_pos) best_pos = v, best_pos_phi = phi;
    if (phi < 0.0 && v > best_neg) best_neg = v, best_neg_phi = phi;
  }
  REQUIRE_THAT(best_pos_phi / kPi, WithinAbs(0.73, 0.005));
  REQUIRE_THAT(best_neg_phi / kPi, WithinAbs(-0.73, 0.005));
  // the numeric argmax matches the analytic peak location
  REQUIRE_THAT(best_pos_phi, WithinAbs(peak_location(17, 83).phi0, 1e-4));
}

TEST_CASE("peak_location: anchors and complements") {
  REQUIRE_THAT(peak_location(5, 5).phi0, WithinAbs(kHalfPi, 1e-15));
  REQUIRE_THAT(peak_location(17, 83).phi0, WithinAbs(2.292, 1.5e-3));
  REQUIRE_THAT(peak_location(83, 17).phi0, WithinAbs(0.84997, 1e-4));
  REQUIRE_THAT(peak_location(83, 17).phi0,
               WithinAbs(kPi - peak_location(17, 83).phi0, 1e-12));
  REQUIRE_THAT(peak_location(0, 4).phi0, WithinAbs(kPi, 0.0));
  REQUIRE(peak_location(4, 0).phi0 == 0.0);
  REQUIRE(peak_location(3, 2).pair().second == -peak_location(3, 2).phi0);
  REQUIRE_THROWS_AS(peak_location(0, 0), std::domain_error);
}

TEST_CASE("landscape F: zeros and symmetry") {
  REQUIRE(eval_F(3, 5, 0.0, 0.0) == 0.0);          // second bracket vanishes
  REQUIRE(eval_F(1, 1, kHalfPi, kHalfPi) == 0.0);  // both brackets vanish
  REQUIRE(eval_F(2, 0, 0.0, 0.0) == 4.0);

  SplitMix64 rng(0xf00du);
  for (int trial = 0; trial < 200; ++trial) {
    const int m1 = static_cast<int>(rng.next() % 20);
    const int m2 = static_cast<int>(rng.next() % 20);
    const double lq = -kPi + 2.0 * kPi * rng.uniform();
    const double lc = -kPi + 2.0 * kPi * rng.uniform();
    const double f = eval_F(m1, m2, lq, lc);
    REQUIRE_THAT(eval_F(m1, m2, -lq, lc), WithinAbs(f, 1e-12 * (1.0 + std::abs(f))));
    REQUIRE_THAT(eval_F(m1, m2, lq, -lc), WithinAbs(f, 1e-12 * (1.0 + std::abs(f))));
  }
}

namespace {

struct GridExtremum {
  double lq, lc, value;
};

// Offset-grid local extrema of F; the quarter-step offset keeps the
// mirror-symmetric axes from producing bit-equal neighbor ties.
std::vector<GridExtremum> grid_extrema(int m1, int m2, int g) {
  const double step = 2.0 * kPi / g;
  std::vector<double> F(static_cast<std::size_t>(g) * g);
  auto node = [&](int i) { return -kPi + (i + 0.25) * step; };
  for (int i = 0; i < g; ++i)
    for (int j = 0; j < g; ++j)
      F[static_cast<std::size_t>(i) * g + j] = eval_F(m1, m2, node(i), node(j));
  double fmax = 0.0;
  for (double f : F) fmax = std::max(fmax, std::abs(f));
  auto at = [&](int i, int j) {
    return F[static_cast<std::size_t>((i + g) % g) * g + ((j + g) % g)];
  };
  std::vector<GridExtremum> found;
  for (int i = 0; i < g; ++i)
    for (int j = 0; j < g; ++j) {
      const double f = at(i, j);
      if (std::abs(f) < 1e-6 * fmax) continue;
      bool is_max = true, is_min = true;
      for (int di = -1; di <= 1; ++di)
        for (int dj = -1; dj <= 1; ++dj) {
          if (di == 0 && dj == 0) continue;
          const double fn = at(i + di, j + dj);
          if (fn >= f) is_max = false;
          if (fn <= f) is_min = false;
        }
      if (is_max || is_min) found.push_back({node(i), node(j), f});
    }
  return found;
}

double wrap_dist(double a, double b) {
  return std::abs(std::remainder(a - b, 2.0 * kPi));
}

}  // namespace

TEST_CASE("find_extrema matches a dense-grid search") {
  const auto analytic = find_extrema(17, 83);
  REQUIRE_FALSE(analytic.degenerate);
  REQUIRE(analytic.extrema.size() == 8);

  const auto grid = grid_extrema(17, 83, 1001);
  REQUIRE(grid.size() == 8);
  for (const auto& e : analytic.extrema) {
    double best = 1e9;
    double value = 0.0;
    for (const auto& gext : grid) {
      const double d = std::max(wrap_dist(gext.lq, e.lambda_q),
                                wrap_dist(gext.lc, e.lambda_c));
      if (d < best) best = d, value = gext.value;
    }
    REQUIRE(best < 0.01);
    REQUIRE(((e.kind == ExtremumKind::peak) == (value > 0.0)));
  }
}

TEST_CASE("find_extrema: locations and kinds for (17, 83)") {
  const auto res = find_extrema(17, 83);
  const double a = peak_location(17, 83).phi0;
  int depressions_on_axis = 0;
  for (const auto& e : res.extrema) {
    if (e.lambda_c == 0.0) {
      REQUIRE_THAT(std::abs(e.lambda_q), WithinAbs(2.29, 0.01));
      REQUIRE(e.kind == ExtremumKind::depression);  // m2 odd
      ++depressions_on_axis;
    }
    if (e.lambda_q == 0.0) {
      REQUIRE_THAT(std::abs(e.lambda_c), WithinAbs(a, 1e-12));
      REQUIRE(e.kind == ExtremumKind::peak);
    }
  }
  REQUIRE(depressions_on_axis == 2);

  // balanced counts put the extrema at +/- pi/2
  const auto sym = find_extrema(6, 6);
  for (const auto& e : sym.extrema)
    if (e.lambda_c == 0.0)
      REQUIRE_THAT(std::abs(e.lambda_q), WithinAbs(kHalfPi, 1e-12));
}

TEST_CASE("find_extrema flags degenerate splits") {
  REQUIRE(find_extrema(0, 5).degenerate);
  REQUIRE(find_extrema(5, 0).degenerate);
  REQUIRE(find_extrema(0, 5).extrema.empty());
}

TEST_CASE("probability integral: anchor values") {
  SECTION("all-side outcome gives 2^-N") {
    const InterferometerConfig cfg{kHalfPi, {2, 1}};
    REQUIRE_THAT(probability_integral(cfg, {0, 0, 2, 1}),
                 WithinRel(0.125, 1e-12));
  }
  SECTION("coincidence cancellation") {
    const InterferometerConfig cfg{kHalfPi, {1, 1}};
    REQUIRE_THAT(probability_integral(cfg, {1, 1, 0, 0}),
                 WithinAbs(0.0, 1e-14));
  }
  SECTION("total mismatch is rejected") {
    const InterferometerConfig cfg{kHalfPi, {1, 1}};
    REQUIRE_THROWS_AS(probability_integral(cfg, {1, 1, 1, 0}),
                      std::invalid_argument);
  }
}

TEST_CASE("probability integral agrees with the exact oracle on all outcomes") {
  const InterferometerConfig cfg{kHalfPi, {6, 6}};
  const auto outcomes = enumerate_outcomes(cfg.source);
  REQUIRE(outcomes.size() == 455);
  for (const auto& out : outcomes) {
    const double oracle = probability_oracle(cfg, out);
    const double integral = probability_integral(cfg, out);
    const double err = std::abs(oracle - integral);
    REQUIRE((err <= 1e-14 || err <= 1e-10 * std::max(oracle, integral)));
  }
}

TEST_CASE("quadrature node doubling only moves rounding noise") {
  const InterferometerConfig cfg{kHalfPi, {7, 5}};
  for (const OutcomeRecord out :
       {OutcomeRecord{3, 2, 4, 3}, OutcomeRecord{0, 5, 3, 4},
        OutcomeRecord{6, 2, 2, 2}}) {
    const double p1 = probability_integral(cfg, out, 1);
    const double p2 = probability_integral(cfg, out, 2);
    REQUIRE_THAT(p2, WithinAbs(p1, 1e-12 * std::max(1.0, std::abs(p1))));
  }
}

TEST_CASE("probability integral stays nonnegative despite the signed integrand") {
  const InterferometerConfig cfg{kHalfPi, {4, 4}};
  for (const auto& out : enumerate_outcomes(cfg.source))
    REQUIRE(probability_integral(cfg, out) >= -1e-12);
}

TEST_CASE("probability integral: side-swap symmetry") {
  const InterferometerConfig cfg{kHalfPi, {5, 3}};
  const InterferometerConfig swapped{kHalfPi, {3, 5}};
  for (const auto& out : enumerate_outcomes(cfg.source)) {
    const OutcomeRecord mirror{out.m1, out.m2, out.m_beta, out.m_alpha};
    const double p = probability_integral(cfg, out);
    const double q = probability_integral(swapped, mirror);
    REQUIRE_THAT(q, WithinAbs(p, 1e-13 + 1e-12 * std::abs(p)));
  }
}

TEST_CASE("marginal: collapsed kernel equals direct summation") {
  const InterferometerConfig cfg{kHalfPi, {7, 5}};
  for (int m1 = 0; m1 <= 6; ++m1)
    for (int m2 = 0; m1 + m2 <= 8; m2 += 2) {
      const double collapsed = marginal_p12(cfg, m1, m2);
      const double direct = marginal_p12_direct(cfg, m1, m2);
      REQUIRE_THAT(direct,
                   WithinAbs(collapsed, 1e-14 + 1e-10 * std::abs(collapsed)));
    }
}

TEST_CASE("marginal: coincidence counts vanish for one pair each") {
  const InterferometerConfig cfg{kHalfPi, {1, 1}};
  REQUIRE_THAT(marginal_p12(cfg, 1, 1), WithinAbs(0.0, 1e-14));
  REQUIRE_THAT(marginal_p12_direct(cfg, 1, 1), WithinAbs(0.0, 1e-14));
}

TEST_CASE("marginal table is normalized") {
  const InterferometerConfig cfg{kHalfPi, {10, 10}};
  StableSum sum;
  for (int m = 0; m <= 20; ++m)
    for (int m1 = 0; m1 <= m; ++m1) sum.add(marginal_p12(cfg, m1, m - m1));
  REQUIRE_THAT(sum.total(), WithinAbs(1.0, 1e-9));
}

TEST_CASE("extreme split maximizes the marginal integral at fixed M") {
  const InterferometerConfig cfg{kHalfPi, {6, 6}};
  const LogFactorialTable t(24);
  const int m_total = 5;
  const auto integral_part = [&](int m1) {
    const int m2 = m_total - m1;
    return marginal_p12(cfg, m1, m2) *
           std::exp(t(m1) + t(m2) + t(12 - m_total) - t(6) - t(6) +
                    m_total * std::numbers::ln2);
  };
  const double at_extreme = integral_part(m_total);
  for (int m1 = 0; m1 <= m_total; ++m1)
    REQUIRE(integral_part(m1) <= at_extreme * (1.0 + 1e-12));
}

TEST_CASE("sharp-peak approximation: central value and parity") {
  const double phi0 = peak_location(17, 83).phi0;
  REQUIRE_THAT(qualitative_probability({17, 83, 50, 50}, phi0),
               WithinAbs(0.0, 1e-14));  // odd m2: central dip
  REQUIRE_THAT(qualitative_probability({18, 82, 50, 50},
                                       peak_location(18, 82).phi0),
               WithinAbs(2.0, 1e-14));  // even m2: central peak

  // balanced counts: a side imbalance of round(pi / phi0) = 2 sits at the
  // cosine minimum
  const double phi_b = peak_location(4, 4).phi0;  // pi/2
  REQUIRE_THAT(qualitative_probability({4, 4, 6, 4}, phi_b),
               WithinAbs(0.0, 1e-14));
}
