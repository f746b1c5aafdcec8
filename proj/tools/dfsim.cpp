// dfsim: detection statistics for double-Fock-state interferometry.
//
// Subcommands cover the exact joint probability (amplitude oracle and
// double-angle integral), population-oscillation scans with optional
// particle loss and the symmetry-broken baseline, the reduced
// interferometer kernel, the quasi-probability landscape, the (m1, m2)
// marginal and the sequential phase-emergence sampler.
//
// Exit codes: 0 ok, 2 invalid input, 3 size-cap violation, 4 I/O failure.

#include <CLI11.hpp>

#include <cmath>
#include <fstream>
#include <iostream>
#include <numbers>
#include <string>
#include <vector>

#include "dfsim/analysis.hpp"
#include "dfsim/amplitude.hpp"
#include "dfsim/baselines.hpp"
#include "dfsim/csv.hpp"
#include "dfsim/model.hpp"
#include "dfsim/parallel.hpp"
#include "dfsim/quadrature.hpp"
#include "dfsim/version.hpp"

namespace {

constexpr int kExitBadInput = 2;
constexpr int kExitCap = 3;
constexpr int kExitIo = 4;

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void emit(const std::string& path, const dfsim::CsvDocument& doc) {
  if (path.empty() || path == "-") {
    dfsim::write_csv(std::cout, doc);
    if (!std::cout) throw IoError("failed to write to stdout");
    return;
  }
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open output path: " + path);
  dfsim::write_csv(os, doc);
  os.flush();
  if (!os) throw IoError("failed while writing: " + path);
}

std::string fmt(double x) { return dfsim::format_double(x); }

struct ProbArgs {
  int n_alpha = 0, n_beta = 0;
  int m1 = 0, m2 = 0, m_alpha = 0, m_beta = 0;
  double theta = std::numbers::pi / 2;
  std::string method = "both";
};

int run_prob(const ProbArgs& a) {
  const dfsim::InterferometerConfig cfg{a.theta, {a.n_alpha, a.n_beta}};
  const dfsim::OutcomeRecord out{a.m1, a.m2, a.m_alpha, a.m_beta};
  if (out.total() != cfg.source.total()) {
    std::cerr << "error: counts do not sum to N = " << cfg.source.total()
              << "\n";
    return kExitBadInput;
  }
  const bool want_oracle = a.method == "oracle" || a.method == "both";
  const bool want_integral = a.method == "integral" || a.method == "both";
  if (want_oracle && cfg.source.total() > 30) {
    std::cerr << "error: method=oracle requires N <= 30\n";
    return kExitCap;
  }

  std::cout << "n_alpha=" << a.n_alpha << " n_beta=" << a.n_beta
            << " theta=" << fmt(a.theta) << " m1=" << a.m1 << " m2=" << a.m2
            << " m_alpha=" << a.m_alpha << " m_beta=" << a.m_beta << "\n";
  double p_oracle = 0.0, p_integral = 0.0;
  if (want_oracle) {
    p_oracle = dfsim::probability_oracle(cfg, out);
    std::cout << "oracle=" << fmt(p_oracle) << "\n";
  }
  if (want_integral) {
    p_integral = dfsim::probability_integral(cfg, out);
    std::cout << "integral=" << fmt(p_integral) << "\n";
  }
  if (want_oracle && want_integral) {
    const double scale = std::max(std::abs(p_oracle), std::abs(p_integral));
    if (scale < 1e-14)
      std::cout << "deviation=n/a\n";
    else
      std::cout << "deviation=" << fmt(std::abs(p_oracle - p_integral) / scale)
                << "\n";
  }
  return 0;
}

struct ScanArgs {
  int n_alpha = 0, n_beta = 0, m1 = 0, m2 = 0;
  int loss = 0;
  bool ssb = false;
  int window = 5;
  unsigned threads = 0;
  std::string out_path = "-";
};

int run_scan(const ScanArgs& a) {
  const dfsim::InterferometerConfig cfg{std::numbers::pi / 2,
                                        {a.n_alpha, a.n_beta}};
  const int n = cfg.source.total();
  if (a.m1 < 0 || a.m2 < 0 || a.m1 + a.m2 > n) {
    std::cerr << "error: need 0 <= m1 + m2 <= N\n";
    return kExitBadInput;
  }
  if (a.loss < 0 || a.loss > n - a.m1 - a.m2) {
    std::cerr << "error: need 0 <= loss <= N - M\n";
    return kExitBadInput;
  }

  const dfsim::ScanResult scan =
      a.loss > 0 ? dfsim::loss_scan(cfg, a.m1, a.m2, {a.loss}, false, a.window,
                                    a.threads)
                 : dfsim::population_scan(cfg, a.m1, a.m2, false, a.window,
                                          a.threads);
  dfsim::ScanResult baseline;
  if (a.ssb) {
    baseline = a.loss > 0
                   ? dfsim::ScanResult{}  // filled below
                   : dfsim::ssb_scan(cfg.source, cfg.theta, a.m1, a.m2, false,
                                     a.window);
    if (a.loss > 0) {
      // The baseline side counts are binomial; losing an exact-L uniform
      // subset keeps them binomial on the shorter support, but emit the
      // marginalized form for symmetry with the quantum column.
      const dfsim::ScanResult full =
          dfsim::ssb_scan(cfg.source, cfg.theta, a.m1, a.m2, false, a.window);
      const int rest = n - a.m1 - a.m2;
      const dfsim::LogFactorialTable table(std::max(1, rest));
      std::vector<double> values(full.probabilities.size() - a.loss);
      for (int ma = 0; ma < static_cast<int>(values.size()); ++ma) {
        const int mb = rest - a.loss - ma;
        dfsim::StableSum sum;
        for (int l = 0; l <= a.loss; ++l)
          sum.add(std::exp(table.log_binomial(ma + l, l) +
                           table.log_binomial(mb + a.loss - l, a.loss - l) -
                           table.log_binomial(rest, a.loss)) *
                  full.probabilities[ma + l]);
        values[ma] = sum.total();
      }
      baseline.m1 = a.m1;
      baseline.m2 = a.m2;
      baseline.contrast = dfsim::fringe_contrast(values, a.window);
      baseline.central_feature =
          dfsim::classify_central_feature(values, a.window);
      baseline.probabilities = std::move(values);
    }
  }

  dfsim::CsvDocument doc;
  doc.command = "scan";
  doc.params = {{"n_alpha", std::to_string(a.n_alpha)},
                {"n_beta", std::to_string(a.n_beta)},
                {"m1", std::to_string(a.m1)},
                {"m2", std::to_string(a.m2)},
                {"loss", std::to_string(a.loss)},
                {"ssb", a.ssb ? "1" : "0"},
                {"window", std::to_string(a.window)}};
  doc.header = a.ssb ? "m_alpha,probability,ssb_probability"
                     : "m_alpha,probability";
  for (std::size_t ma = 0; ma < scan.probabilities.size(); ++ma) {
    std::string row = std::to_string(ma) + "," + fmt(scan.probabilities[ma]);
    if (a.ssb) row += "," + fmt(baseline.probabilities[ma]);
    doc.data_rows.push_back(std::move(row));
  }
  doc.footer.push_back(std::string("central_feature: ") +
                       dfsim::to_string(scan.central_feature));
  doc.footer.push_back("contrast: " + fmt(scan.contrast));
  if (a.ssb) {
    doc.footer.push_back(std::string("ssb_central_feature: ") +
                         dfsim::to_string(baseline.central_feature));
    doc.footer.push_back("ssb_contrast: " + fmt(baseline.contrast));
  }
  emit(a.out_path, doc);
  return 0;
}

struct SurfaceArgs {
  int m1 = 0, m2 = 0;
  int grid_size = 201;
  std::string out_path = "-";
};

int run_surface(const SurfaceArgs& a) {
  if (a.m1 < 0 || a.m2 < 0 || a.m1 + a.m2 == 0) {
    std::cerr << "error: need m1, m2 >= 0 and m1 + m2 > 0\n";
    return kExitBadInput;
  }
  if (a.grid_size < 2 || a.grid_size > 20001) {
    std::cerr << "error: grid-size out of range [2, 20001]\n";
    return kExitCap;
  }
  dfsim::CsvDocument doc;
  doc.command = "surface";
  doc.params = {{"m1", std::to_string(a.m1)},
                {"m2", std::to_string(a.m2)},
                {"grid_size", std::to_string(a.grid_size)}};
  doc.header = "lambda_q,lambda_c,F";
  const double pi = std::numbers::pi;
  for (int i = 0; i < a.grid_size; ++i) {
    const double lq = -pi + 2.0 * pi * i / (a.grid_size - 1);
    for (int j = 0; j < a.grid_size; ++j) {
      const double lc = -pi + 2.0 * pi * j / (a.grid_size - 1);
      doc.data_rows.push_back(fmt(lq) + "," + fmt(lc) + "," +
                              fmt(dfsim::eval_F(a.m1, a.m2, lq, lc)));
    }
  }
  const auto extrema = dfsim::find_extrema(a.m1, a.m2);
  if (extrema.degenerate) {
    doc.footer.push_back("extrema: degenerate (m1 or m2 is zero)");
  } else {
    for (const auto& e : extrema.extrema)
      doc.footer.push_back(
          "extremum: lambda_q=" + fmt(e.lambda_q) + " lambda_c=" +
          fmt(e.lambda_c) + " kind=" +
          (e.kind == dfsim::ExtremumKind::peak ? "peak" : "depression"));
  }
  emit(a.out_path, doc);
  return 0;
}

struct RphiArgs {
  int m1 = 0, m2 = 0;
  int points = 2001;
  double theta = std::numbers::pi / 2;
  std::string out_path = "-";
};

int run_rphi(const RphiArgs& a) {
  if (a.m1 < 0 || a.m2 < 0 || a.m1 + a.m2 == 0) {
    std::cerr << "error: need m1, m2 >= 0 and m1 + m2 > 0\n";
    return kExitBadInput;
  }
  if (a.points < 2 || a.points > 2000001) {
    std::cerr << "error: points out of range\n";
    return kExitCap;
  }
  dfsim::CsvDocument doc;
  doc.command = "rphi";
  doc.params = {{"m1", std::to_string(a.m1)},
                {"m2", std::to_string(a.m2)},
                {"points", std::to_string(a.points)},
                {"theta", fmt(a.theta)}};
  doc.header = "phi,r_reduced";
  const double pi = std::numbers::pi;
  for (int i = 0; i < a.points; ++i) {
    const double phi = -pi + 2.0 * pi * i / (a.points - 1);
    doc.data_rows.push_back(
        fmt(phi) + "," + fmt(dfsim::r_reduced(a.m1, a.m2, a.theta, phi)));
  }
  const auto peak = dfsim::peak_location(a.m1, a.m2);
  doc.footer.push_back("peak_phi0: " + fmt(peak.phi0));
  emit(a.out_path, doc);
  return 0;
}

struct MarginalArgs {
  int n_alpha = 0, n_beta = 0;
  unsigned threads = 0;
  std::string out_path = "-";
};

int run_marginal(const MarginalArgs& a) {
  const dfsim::InterferometerConfig cfg{std::numbers::pi / 2,
                                        {a.n_alpha, a.n_beta}};
  const int n = cfg.source.total();
  if (a.n_alpha < 0 || a.n_beta < 0) {
    std::cerr << "error: negative occupation\n";
    return kExitBadInput;
  }

  std::vector<std::pair<int, int>> pairs;
  for (int m = 0; m <= n; ++m)
    for (int m1 = 0; m1 <= m; ++m1) pairs.emplace_back(m1, m - m1);
  std::vector<double> values(pairs.size());
  dfsim::parallel_for(
      pairs.size(),
      [&](std::size_t i) {
        values[i] = dfsim::marginal_p12(cfg, pairs[i].first, pairs[i].second);
      },
      a.threads);

  dfsim::CsvDocument doc;
  doc.command = "marginal";
  doc.params = {{"n_alpha", std::to_string(a.n_alpha)},
                {"n_beta", std::to_string(a.n_beta)}};
  doc.header = "m1,m2,probability";
  for (std::size_t i = 0; i < pairs.size(); ++i)
    doc.data_rows.push_back(std::to_string(pairs[i].first) + "," +
                            std::to_string(pairs[i].second) + "," +
                            fmt(values[i]));
  emit(a.out_path, doc);
  return 0;
}

struct EmergenceArgs {
  int steps = 50;
  int grid = 512;
  std::uint64_t seed = 0;
  std::string out_path = "-";
};

int run_emergence(const EmergenceArgs& a) {
  if (a.steps < 0) {
    std::cerr << "error: steps must be >= 0\n";
    return kExitBadInput;
  }
  if (a.grid < 64 || a.grid > (1 << 22)) {
    std::cerr << "error: grid out of range [64, 4194304]\n";
    return kExitCap;
  }
  const dfsim::EmergenceRun run = dfsim::emergence_run(a.steps, a.grid, a.seed);

  dfsim::CsvDocument doc;
  doc.command = "emergence";
  doc.params = {{"steps", std::to_string(a.steps)},
                {"grid", std::to_string(a.grid)}};
  doc.seed = a.seed;
  doc.header = "step,position,circular_std";
  for (std::size_t i = 0; i < run.width_trace.size(); ++i) {
    const std::string pos =
        i == 0 ? "nan" : fmt(run.positions[i - 1]);
    doc.data_rows.push_back(std::to_string(i) + "," + pos + "," +
                            fmt(run.width_trace[i]));
  }
  const auto [rbar, mean] = dfsim::circular_resultant(run.state);
  doc.footer.push_back("posterior_mean: " + fmt(mean));
  doc.footer.push_back("posterior_resultant: " + fmt(rbar));
  emit(a.out_path, doc);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Detection statistics for double-Fock-state interferometry"};
  app.set_version_flag("--version", DFSIM_VERSION);
  app.require_subcommand(1);

  ProbArgs prob;
  auto* cmd_prob = app.add_subcommand(
      "prob", "Joint probability of one outcome (oracle and/or integral)");
  cmd_prob->add_option("--n-alpha", prob.n_alpha)->required();
  cmd_prob->add_option("--n-beta", prob.n_beta)->required();
  cmd_prob->add_option("--theta", prob.theta);
  cmd_prob->add_option("--m1", prob.m1)->required();
  cmd_prob->add_option("--m2", prob.m2)->required();
  cmd_prob->add_option("--m-alpha", prob.m_alpha)->required();
  cmd_prob->add_option("--m-beta", prob.m_beta)->required();
  cmd_prob->add_option("--method", prob.method)
      ->check(CLI::IsMember({"oracle", "integral", "both"}));

  ScanArgs scan;
  auto* cmd_scan = app.add_subcommand(
      "scan", "Population-oscillation scan over the side counts");
  cmd_scan->add_option("--n-alpha", scan.n_alpha)->required();
  cmd_scan->add_option("--n-beta", scan.n_beta)->required();
  cmd_scan->add_option("--m1", scan.m1)->required();
  cmd_scan->add_option("--m2", scan.m2)->required();
  cmd_scan->add_option("--loss", scan.loss);
  cmd_scan->add_flag("--ssb", scan.ssb);
  cmd_scan->add_option("--window", scan.window);
  cmd_scan->add_option("--threads", scan.threads);
  cmd_scan->add_option("--out", scan.out_path);

  SurfaceArgs surface;
  auto* cmd_surface =
      app.add_subcommand("surface", "Quasi-probability landscape F");
  cmd_surface->add_option("--m1", surface.m1)->required();
  cmd_surface->add_option("--m2", surface.m2)->required();
  cmd_surface->add_option("--grid-size", surface.grid_size);
  cmd_surface->add_option("--out", surface.out_path);

  RphiArgs rphi;
  auto* cmd_rphi =
      app.add_subcommand("rphi", "Reduced interferometer kernel over phi");
  cmd_rphi->add_option("--m1", rphi.m1)->required();
  cmd_rphi->add_option("--m2", rphi.m2)->required();
  cmd_rphi->add_option("--points", rphi.points);
  cmd_rphi->add_option("--theta", rphi.theta);
  cmd_rphi->add_option("--out", rphi.out_path);

  MarginalArgs marginal;
  auto* cmd_marginal =
      app.add_subcommand("marginal", "Interferometer-count marginal table");
  cmd_marginal->add_option("--n-alpha", marginal.n_alpha)->required();
  cmd_marginal->add_option("--n-beta", marginal.n_beta)->required();
  cmd_marginal->add_option("--threads", marginal.threads);
  cmd_marginal->add_option("--out", marginal.out_path);

  EmergenceArgs emergence;
  auto* cmd_emergence = app.add_subcommand(
      "emergence", "Sequential phase emergence from repeated detections");
  cmd_emergence->add_option("--steps", emergence.steps);
  cmd_emergence->add_option("--grid", emergence.grid);
  cmd_emergence->add_option("--seed", emergence.seed);
  cmd_emergence->add_option("--out", emergence.out_path);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitBadInput;
  }

  try {
    if (cmd_prob->parsed()) return run_prob(prob);
    if (cmd_scan->parsed()) return run_scan(scan);
    if (cmd_surface->parsed()) return run_surface(surface);
    if (cmd_rphi->parsed()) return run_rphi(rphi);
    if (cmd_marginal->parsed()) return run_marginal(marginal);
    if (cmd_emergence->parsed()) return run_emergence(emergence);
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::length_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitCap;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitBadInput;
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitBadInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
