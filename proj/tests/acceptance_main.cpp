// Acceptance suite: one pass/fail line per criterion, nonzero exit when any
// criterion fails. argv[1] must point at the hdmds CLI binary (used by the
// determinism criterion).

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <unistd.h>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "hdmds/baselines.hpp"
#include "hdmds/bootstrap.hpp"
#include "hdmds/dgp.hpp"
#include "hdmds/experiment.hpp"
#include "hdmds/kernels.hpp"
#include "hdmds/statistic.hpp"
#include "oracles.hpp"

namespace {

int failures = 0;

class Criterion {
 public:
  explicit Criterion(std::string label)
      : label_(std::move(label)), start_(std::chrono::steady_clock::now()) {}

  void check(bool ok, const std::string& detail) {
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start_)
            .count();
    std::printf("[%s] %s: %s (%.1f s)\n", ok ? "PASS" : "FAIL", label_.c_str(),
                detail.c_str(), secs);
    std::fflush(stdout);
    if (!ok) ++failures;
  }

 private:
  std::string label_;
  std::chrono::steady_clock::time_point start_;
};

hdmds::Panel make_panel(const oracle::Table& rows) {
  hdmds::Panel panel;
  panel.data.resize(static_cast<Eigen::Index>(rows.size()),
                    static_cast<Eigen::Index>(rows[0].size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < rows[0].size(); ++c) {
      panel.data(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          rows[r][c];
    }
  }
  return panel;
}

double rel_err(double got, double want) {
  const double denom = std::max(std::abs(want), 1e-30);
  return std::abs(got - want) / denom;
}

int threads() {
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 2 : static_cast<int>(hw);
}

// 1. statistic agrees with the independent double-loop oracle
void criterion_oracle_equivalence() {
  Criterion crit("1. oracle equivalence");
  std::mt19937 rng(20240601);
  double worst = 0.0;
  for (int rep = 0; rep < 100; ++rep) {
    const std::size_t n = 5 + rep % 26;       // n <= 30
    const std::size_t p = 1 + rep % 3;        // p <= 3
    const int lags = 1 + rep % 3;             // K <= 3
    const oracle::Table rows = oracle::random_table(rng, n, p);
    const hdmds::Panel panel = make_panel(rows);
    for (const auto& [mk, ok] :
         {std::pair{hdmds::MapKind::Linear, oracle::Map::Linear},
          std::pair{hdmds::MapKind::LinearQuadratic, oracle::Map::LinQuad},
          std::pair{hdmds::MapKind::Cosine, oracle::Map::Cos}}) {
      worst = std::max(worst,
                       rel_err(hdmds::test_statistic(panel, mk, lags).statistic,
                               oracle::statistic(rows, ok, lags, false)));
      worst = std::max(
          worst, rel_err(hdmds::test_statistic_centered(panel, mk, lags).statistic,
                         oracle::statistic(rows, ok, lags, true)));
    }
  }
  char detail[128];
  std::snprintf(detail, sizeof(detail),
                "max relative error %.3g over 100 panels x 3 maps x 2 variants",
                worst);
  crit.check(worst <= 1e-10, detail);
}

// 2. direct kernel covariance equals the quadratic-form identity
void criterion_covariance_identity() {
  Criterion crit("2. covariance identity");
  std::mt19937 rng(20240602);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> bw(0.7, 6.0);
  double worst = 0.0;
  for (int rep = 0; rep < 50; ++rep) {
    const Eigen::Index nt = 4 + rep % 9;
    const Eigen::Index pd = 1 + rep % 3;
    hdmds::EtaMatrix eta;
    eta.n_tilde = nt;
    eta.lags = 2;
    eta.p = pd;
    eta.d = 1;
    eta.data.resize(nt, 2 * pd);
    for (Eigen::Index i = 0; i < eta.data.size(); ++i) {
      eta.data.data()[i] = normal(rng);
    }
    for (const auto family :
         {hdmds::KernelFamily::QuadraticSpectral, hdmds::KernelFamily::Parzen,
          hdmds::KernelFamily::Bartlett}) {
      const hdmds::KernelSpec spec{family, bw(rng), hdmds::BandwidthMode::Explicit};
      const Eigen::MatrixXd direct = hdmds::longrun_cov_direct(eta, spec);
      const Eigen::MatrixXd theta = hdmds::theta_matrix(nt, spec);
      const Eigen::MatrixXd centered =
          eta.data.rowwise() - eta.data.colwise().mean();
      const Eigen::MatrixXd quad =
          centered.transpose() * theta * centered / static_cast<double>(nt);
      worst = std::max(worst, (direct - quad).cwiseAbs().maxCoeff());
    }
  }
  char detail[128];
  std::snprintf(detail, sizeof(detail),
                "max entrywise gap %.3g over 50 cases x 3 kernels", worst);
  crit.check(worst <= 1e-8, detail);
}

// 3. empirical covariance of multiplier draws matches the direct estimate
void criterion_draw_law() {
  Criterion crit("3. multiplier-draw law");
  const Eigen::Index nt = 20, m = 4;
  hdmds::EtaMatrix eta;
  eta.n_tilde = nt;
  eta.lags = 2;
  eta.p = 2;
  eta.d = 1;
  eta.data.resize(nt, m);
  std::mt19937 rng(20240603);
  std::normal_distribution<double> normal;
  // persistent correlated columns so the covariance entries are sizeable
  Eigen::VectorXd state = Eigen::VectorXd::Zero(m);
  for (Eigen::Index t = 0; t < nt; ++t) {
    const double common = normal(rng);
    for (Eigen::Index c = 0; c < m; ++c) {
      state[c] = 0.4 * state[c] + common + 0.6 * normal(rng);
      eta.data(t, c) = state[c];
    }
  }
  const hdmds::KernelSpec spec{hdmds::KernelFamily::Bartlett, 3.0,
                               hdmds::BandwidthMode::Explicit};
  const Eigen::MatrixXd sigma = hdmds::longrun_cov_direct(eta, spec);

  const hdmds::PsdFactor factor = hdmds::psd_factor(hdmds::theta_matrix(nt, spec));
  const Eigen::MatrixXd centered = eta.data.rowwise() - eta.data.colwise().mean();
  const double root_nt = std::sqrt(static_cast<double>(nt));
  const int draws = 50000;
  const Eigen::Index block = 500;
  Eigen::MatrixXd second_moment = Eigen::MatrixXd::Zero(m, m);
  Eigen::MatrixXd noise(nt, block);
  for (int b0 = 0; b0 < draws; b0 += block) {
    for (Eigen::Index c = 0; c < block; ++c) {
      hdmds::NormalStream stream(hdmds::substream(909, b0 + c));
      noise.col(c) = stream.vector(nt);
    }
    const Eigen::MatrixXd g =
        centered.transpose() * (factor.factor * noise) / root_nt;
    second_moment += g * g.transpose();
  }
  second_moment /= static_cast<double>(draws);

  const double cutoff = 0.1 * sigma.cwiseAbs().maxCoeff();
  double worst = 0.0;
  int tested = 0;
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j < m; ++j) {
      if (std::abs(sigma(i, j)) >= cutoff) {
        worst = std::max(worst, rel_err(second_moment(i, j), sigma(i, j)));
        ++tested;
      }
    }
  }
  char detail[160];
  std::snprintf(detail, sizeof(detail),
                "max relative error %.3g on %d entries over 50000 draws", worst,
                tested);
  crit.check(worst <= 0.05 && tested > 0, detail);
}

hdmds::ExperimentConfig table_cell(hdmds::DgpModel model, hdmds::MapKind map,
                                   int reps, std::uint64_t seed) {
  hdmds::ExperimentConfig config;
  config.dgp.model = model;
  config.dgp.n = 100;
  config.dgp.p = 4;
  hdmds::CellSpec cell;
  cell.map = map;
  cell.lags = 2;
  cell.kernel = hdmds::KernelFamily::Bartlett;
  config.cells.push_back(cell);
  config.replications = reps;
  config.draws = 500;
  config.alpha = 0.05;
  config.seed = seed;
  config.threads = threads();
  return config;
}

// 4. size of the bartlett/linear cell on the iid null model
void criterion_size() {
  Criterion crit("4. size reproduction");
  const auto report = hdmds::run_experiment(
      table_cell(hdmds::DgpModel::M1, hdmds::MapKind::Linear, 1000, 41));
  const double rate = report.cells[0].rejection_rate;
  char detail[128];
  std::snprintf(detail, sizeof(detail),
                "M1 n=100 p=4 K=2 BT/linear: %.1f%% in [2.5%%, 6.5%%]",
                100.0 * rate);
  crit.check(rate >= 0.025 && rate <= 0.065, detail);
}

// 5. power of the same cell on the exponential-AR and threshold models
void criterion_power() {
  Criterion crit("5. power reproduction");
  const auto m4 = hdmds::run_experiment(
      table_cell(hdmds::DgpModel::M4, hdmds::MapKind::Linear, 500, 42));
  const double rate4 = m4.cells[0].rejection_rate;
  const auto m6 = hdmds::run_experiment(table_cell(
      hdmds::DgpModel::M6, hdmds::MapKind::LinearQuadratic, 500, 43));
  const double rate6 = m6.cells[0].rejection_rate;
  char detail[160];
  std::snprintf(detail, sizeof(detail),
                "M4 BT/linear: %.1f%% in [75%%, 87%%]; M6 BT/linquad: %.1f%% "
                "in [79%%, 91%%]",
                100.0 * rate4, 100.0 * rate6);
  crit.check(rate4 >= 0.75 && rate4 <= 0.87 && rate6 >= 0.79 && rate6 <= 0.91,
             detail);
}

// 6. null p-values are close to uniform
void criterion_pvalue_calibration() {
  Criterion crit("6. null p-value calibration");
  const int reps = 500;
  std::vector<double> pvals(reps);
  const std::uint64_t master = 44;
  hdmds::detail::parallel_chunks(reps, threads(), [&](Eigen::Index lo, Eigen::Index hi) {
    for (Eigen::Index r = lo; r < hi; ++r) {
      hdmds::DgpSpec dgp;
      dgp.model = hdmds::DgpModel::M1;
      dgp.n = 100;
      dgp.p = 4;
      dgp.seed = hdmds::substream(master, static_cast<std::uint64_t>(r));
      const hdmds::Panel panel = hdmds::simulate(dgp);
      hdmds::TestConfig config;
      config.lags = 2;
      config.draws = 500;
      config.seed = hdmds::substream(dgp.seed, 1);
      pvals[r] = hdmds::run_mds_test(panel, config).p_value;
    }
  });
  std::sort(pvals.begin(), pvals.end());
  double ks = 0.0;
  for (int i = 0; i < reps; ++i) {
    const double hi = static_cast<double>(i + 1) / reps - pvals[i];
    const double lo = pvals[i] - static_cast<double>(i) / reps;
    ks = std::max({ks, std::abs(hi), std::abs(lo)});
  }
  char detail[128];
  std::snprintf(detail, sizeof(detail),
                "Kolmogorov distance %.4f < 0.08 over %d replications", ks, reps);
  crit.check(ks < 0.08, detail);
}

// 7. size of the Box-Pierce baseline on the iid null model
void criterion_baseline_size() {
  Criterion crit("7. baseline size");
  const int reps = 1000;
  std::vector<std::uint8_t> reject(reps, 0);
  const std::uint64_t master = 45;
  hdmds::detail::parallel_chunks(reps, threads(), [&](Eigen::Index lo, Eigen::Index hi) {
    for (Eigen::Index r = lo; r < hi; ++r) {
      hdmds::DgpSpec dgp;
      dgp.model = hdmds::DgpModel::M1;
      dgp.n = 300;
      dgp.p = 12;
      dgp.seed = hdmds::substream(master, static_cast<std::uint64_t>(r));
      const hdmds::Panel panel = hdmds::simulate(dgp);
      const auto result =
          hdmds::portmanteau(panel, 2, hdmds::PortmanteauVariant::BoxPierce);
      reject[r] = result.p_value < 0.05 ? 1 : 0;
    }
  });
  int count = 0;
  for (const auto r : reject) count += r;
  const double rate = static_cast<double>(count) / reps;
  char detail[128];
  std::snprintf(detail, sizeof(detail),
                "Q_BP on M1 n=300 p=12 K=2: %.1f%% in [2.2%%, 6.2%%]",
                100.0 * rate);
  crit.check(rate >= 0.022 && rate <= 0.062, detail);
}

// 8. CLI experiment reports are byte-identical across worker counts
void criterion_cli_determinism(const std::string& cli) {
  Criterion crit("8. determinism");
  namespace fs = std::filesystem;
  const fs::path dir =
      fs::temp_directory_path() / ("hdmds_accept_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  const fs::path config_path = dir / "exp.json";
  {
    std::ofstream config(config_path);
    config << R"({
      "dgp": {"model": "m1", "n": 60, "p": 3, "burn_in": 50},
      "cells": [{"map": "linear", "lags": 2, "kernel": "bartlett"},
                {"map": "linquad", "lags": 2, "kernel": "qs"}],
      "replications": 48,
      "draws": 100,
      "alpha": 0.05,
      "seed": 777
    })";
  }
  std::vector<std::string> outputs;
  bool ran = true;
  for (const int workers : {1, 4, 16}) {
    const fs::path out = dir / ("report_" + std::to_string(workers) + ".json");
    const std::string cmd = "'" + cli + "' experiment --config '" +
                            config_path.string() + "' --output '" +
                            out.string() + "' --threads " +
                            std::to_string(workers) + " > /dev/null 2>&1";
    if (std::system(cmd.c_str()) != 0) {
      ran = false;
      break;
    }
    std::ifstream in(out, std::ios::binary);
    std::stringstream buffer;
    buffer << in.rdbuf();
    outputs.push_back(buffer.str());
  }
  const bool identical = ran && outputs.size() == 3 &&
                         outputs[0] == outputs[1] && outputs[1] == outputs[2] &&
                         !outputs[0].empty();
  fs::remove_all(dir);
  crit.check(identical,
             ran ? "reports at 1/4/16 worker threads are byte-identical"
                 : "CLI invocation failed");
}

// 9. kernel, AR(1) and bandwidth formulas hit their stated values
void criterion_kernel_units() {
  Criterion crit("9. kernel/bandwidth units");
  using hdmds::KernelFamily;
  bool ok = true;
  std::string why = "all unit identities hold";
  auto expect = [&](bool cond, const char* what) {
    if (ok && !cond) {
      ok = false;
      why = std::string("failed: ") + what;
    }
  };

  expect(hdmds::kernel_eval(KernelFamily::Bartlett, 0.5) == 0.5, "BT(0.5)");
  expect(hdmds::kernel_eval(KernelFamily::Bartlett, 1.5) == 0.0, "BT(1.5)");
  expect(rel_err(hdmds::kernel_eval(KernelFamily::Parzen, 0.25), 0.71875) < 1e-15,
         "PR(0.25)");
  expect(hdmds::kernel_eval(KernelFamily::QuadraticSpectral, 0.0) == 1.0, "QS(0)");
  expect(rel_err(hdmds::kernel_eval(KernelFamily::QuadraticSpectral, 1.0),
                 0.1378605816745936) < 1e-12,
         "QS(1)");
  {
    const double z = 6.0 * std::numbers::pi * 1e-3 / 5.0;
    const double exact =
        25.0 / (12.0 * std::numbers::pi * std::numbers::pi * 1e-6) *
        (std::sin(z) / z - std::cos(z));
    expect(std::abs(hdmds::kernel_eval(KernelFamily::QuadraticSpectral, 1e-3) -
                    exact) < 1e-9,
           "QS branch boundary");
  }

  Eigen::VectorXd geometric(4);
  geometric << 1, 0.5, 0.25, 0.125;
  const hdmds::Ar1Fit g = hdmds::ar1_fit(geometric);
  expect(rel_err(g.rho, 0.5) < 1e-14 && g.sigma2 < 1e-30, "ar1 geometric");
  Eigen::VectorXd constant(3);
  constant << 3, 3, 3;
  const hdmds::Ar1Fit c = hdmds::ar1_fit(constant);
  expect(c.degenerate && c.rho == 0.0 && c.sigma2 == 0.0, "ar1 constant");
  Eigen::VectorXd ramp(4);
  ramp << 1, 2, 3, 4;
  expect(hdmds::ar1_fit(ramp).rho == 0.97, "ar1 clamp");

  // single-column plug-in with fit (rho, sigma2) = (0.5, 1) at n_tilde = 32
  const double a2 = 16.0, a1 = 16.0 / 9.0;
  expect(rel_err(1.3221 * std::pow(a2 * 32.0, 0.2), 4.60381959894) < 1e-10,
         "b_QS closed form");
  expect(rel_err(1.1447 * std::cbrt(a1 * 32.0), 4.40251488835) < 1e-10,
         "b_BT closed form");

  // white-noise columns floor the bandwidth
  hdmds::EtaMatrix zig;
  zig.data.resize(5, 1);
  zig.data << 1, 0, -1, 0, 1;
  zig.n_tilde = 5;
  zig.lags = 1;
  zig.p = 1;
  zig.d = 1;
  expect(hdmds::andrews_bandwidth(zig, KernelFamily::Bartlett).value ==
             hdmds::kBandwidthFloor,
         "bandwidth floor");

  crit.check(ok, why);
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::fprintf(stderr, "usage: acceptance <path-to-hdmds-cli>\n");
    return 2;
  }
  criterion_oracle_equivalence();
  criterion_covariance_identity();
  criterion_draw_law();
  criterion_size();
  criterion_power();
  criterion_pvalue_calibration();
  criterion_baseline_size();
  criterion_cli_determinism(argv[1]);
  criterion_kernel_units();
  if (failures > 0) {
    std::printf("%d criterion(s) failed\n", failures);
    return 1;
  }
  std::printf("all acceptance criteria passed\n");
  return 0;
}
