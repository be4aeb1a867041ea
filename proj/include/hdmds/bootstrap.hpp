#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "hdmds/errors.hpp"
#include "hdmds/kernels.hpp"
#include "hdmds/linalg.hpp"
#include "hdmds/panel.hpp"
#include "hdmds/rng.hpp"
#include "hdmds/statistic.hpp"
#include "hdmds/transform.hpp"

namespace hdmds {

// Multiplier weight matrix: Theta(i, j) = kernel((i - j) / bandwidth).
// Symmetric with unit diagonal; PSD up to roundoff for the supported kernels.
inline Eigen::MatrixXd theta_matrix(Eigen::Index n_tilde,
                                    const KernelSpec& kernel) {
  if (n_tilde < 2) throw config_error("theta_matrix: need n_tilde >= 2");
  Eigen::MatrixXd theta(n_tilde, n_tilde);
  // One kernel evaluation per distinct offset.
  Eigen::VectorXd weights(n_tilde);
  for (Eigen::Index k = 0; k < n_tilde; ++k) {
    weights[k] = kernel_eval(kernel.family, static_cast<double>(k) / kernel.bandwidth);
  }
  for (Eigen::Index i = 0; i < n_tilde; ++i) {
    for (Eigen::Index j = 0; j <= i; ++j) {
      theta(i, j) = weights[i - j];
      theta(j, i) = weights[i - j];
    }
  }
  return theta;
}

// One multiplier draw: with xi = L * noise, returns
//   g_hat = n_tilde^{-1/2} sum_t xi_t (eta_t - eta_bar).
// Conditional on the data, g_hat is Gaussian with covariance equal to the
// kernel long-run covariance estimate, without ever materializing it.
inline Eigen::VectorXd draw_ghat(const EtaMatrix& eta, const PsdFactor& factor,
                                 const Eigen::Ref<const Eigen::VectorXd>& noise) {
  if (factor.dim() != eta.n_tilde || noise.size() != eta.n_tilde) {
    throw config_error("draw_ghat: factor/noise dimension mismatch with eta");
  }
  const Eigen::VectorXd xi = factor.factor * noise;
  const Eigen::RowVectorXd eta_bar = eta.data.colwise().mean();
  Eigen::VectorXd g = eta.data.transpose() * xi - eta_bar.transpose() * xi.sum();
  g /= std::sqrt(static_cast<double>(eta.n_tilde));
  return g;
}

// Kernel-weighted long-run covariance of the eta rows, materialized directly:
//   sum over offsets j of kernel(j / b) * H_j,
// with H_j the lag-j autocovariance of the centered rows (divisor n_tilde).
// Intended as a cross-check and for small problems; the bootstrap path never
// forms this matrix.
inline Eigen::MatrixXd longrun_cov_direct(const EtaMatrix& eta,
                                          const KernelSpec& kernel) {
  const Eigen::Index m = eta.width();
  if (m > 2000) {
    throw config_error(
        "longrun_cov_direct: K*p*d = " + std::to_string(m) +
        " exceeds the 2000-column guard; use the multiplier bootstrap path");
  }
  const Eigen::Index nt = eta.n_tilde;
  const Eigen::MatrixXd centered = eta.data.rowwise() - eta.data.colwise().mean();

  Eigen::MatrixXd sigma = Eigen::MatrixXd::Zero(m, m);
  for (Eigen::Index j = -(nt - 1); j <= nt - 1; ++j) {
    const double w = kernel_eval(kernel.family, static_cast<double>(j) / kernel.bandwidth);
    if (w == 0.0) continue;
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(m, m);
    if (j >= 0) {
      for (Eigen::Index t = j; t < nt; ++t) {
        h += centered.row(t).transpose() * centered.row(t - j);
      }
    } else {
      for (Eigen::Index t = -j; t < nt; ++t) {
        h += centered.row(t + j).transpose() * centered.row(t);
      }
    }
    sigma += (w / static_cast<double>(nt)) * h;
  }
  return sigma;
}

// Reduces one g_hat draw to its aggregate: the sum over lag blocks of the
// squared largest entry.
inline double block_max_square_sum(const Eigen::Ref<const Eigen::VectorXd>& g,
                                   Eigen::Index lags, Eigen::Index pd) {
  double total = 0.0;
  for (Eigen::Index j = 0; j < lags; ++j) {
    const double m = g.segment(j * pd, pd).cwiseAbs().maxCoeff();
    total += m * m;
  }
  return total;
}

struct BootstrapDraws {
  double critical_value = 0.0;
  Eigen::VectorXd draws;  // sorted descending
};

namespace detail {

// Static partition of [0, count) into near-equal chunks; deterministic under
// any thread count because work item b always lands at index b.
template <typename Fn>
void parallel_chunks(Eigen::Index count, int threads, Fn&& body) {
  threads = std::max(1, threads);
  if (threads == 1 || count < 2) {
    body(Eigen::Index{0}, count);
    return;
  }
  const int workers = static_cast<int>(
      std::min<Eigen::Index>(threads, count));
  std::vector<std::thread> pool;
  pool.reserve(workers);
  const Eigen::Index chunk = (count + workers - 1) / workers;
  for (int w = 0; w < workers; ++w) {
    const Eigen::Index lo = w * chunk;
    const Eigen::Index hi = std::min(count, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([lo, hi, &body] { body(lo, hi); });
  }
  for (auto& t : pool) t.join();
}

inline int floor_index(int draws, double alpha) {
  return static_cast<int>(std::floor(static_cast<double>(draws) * alpha + 1e-9));
}

}  // namespace detail

// Generates B multiplier draws and the level-alpha critical value (the
// floor(B * alpha)-th largest aggregate). Noise for draw b comes from its own
// stream derived from (seed, b), so results are bit-identical for any thread
// count. Draws are processed in column blocks to keep the working set small
// when K*p*d is large.
inline BootstrapDraws bootstrap_critical_value(const EtaMatrix& eta,
                                               const KernelSpec& kernel,
                                               int draws, double alpha,
                                               std::uint64_t seed,
                                               int threads = 1) {
  if (draws < 20) throw config_error("bootstrap needs at least 20 draws");
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw config_error("alpha must lie in (0, 1)");
  }
  const int rank = detail::floor_index(draws, alpha);
  if (rank < 1) {
    throw config_error("B too small for alpha: floor(B*alpha) = 0");
  }

  const Eigen::Index nt = eta.n_tilde;
  const Eigen::Index m = eta.width();
  const Eigen::Index pd = eta.p * eta.d;
  const PsdFactor factor = psd_factor(theta_matrix(nt, kernel));
  const Eigen::MatrixXd centered =
      eta.data.rowwise() - eta.data.colwise().mean();
  const double root_nt = std::sqrt(static_cast<double>(nt));

  Eigen::VectorXd aggregates(draws);
  const Eigen::Index block = std::clamp<Eigen::Index>(4'000'000 / std::max<Eigen::Index>(m, 1), 8, 256);

  detail::parallel_chunks(draws, threads, [&](Eigen::Index lo, Eigen::Index hi) {
    Eigen::MatrixXd noise(nt, block);
    for (Eigen::Index b0 = lo; b0 < hi; b0 += block) {
      const Eigen::Index nb = std::min(block, hi - b0);
      for (Eigen::Index c = 0; c < nb; ++c) {
        NormalStream stream(substream(seed, static_cast<std::uint64_t>(b0 + c)));
        noise.col(c) = stream.vector(nt);
      }
      const Eigen::MatrixXd xi = factor.factor * noise.leftCols(nb);
      const Eigen::MatrixXd g = centered.transpose() * xi / root_nt;
      for (Eigen::Index c = 0; c < nb; ++c) {
        aggregates[b0 + c] = block_max_square_sum(g.col(c), eta.lags, pd);
      }
    }
  });

  BootstrapDraws out;
  out.draws = aggregates;
  std::sort(out.draws.begin(), out.draws.end(), std::greater<double>());
  out.critical_value = out.draws[rank - 1];
  return out;
}

struct TestConfig {
  MapKind map = MapKind::Linear;
  int lags = 1;
  KernelFamily kernel = KernelFamily::Bartlett;
  std::optional<double> bandwidth;  // empty -> Andrews selection
  int draws = 2000;
  double alpha = 0.05;
  std::uint64_t seed = 0;
  StatVariant variant = StatVariant::Plain;
  bool keep_draws = false;
  int threads = 1;
};

struct TestResult {
  double statistic = 0.0;
  double critical_value = 0.0;
  double p_value = 1.0;
  bool reject = false;
  Eigen::VectorXd per_lag;
  std::vector<LagArgmax> argmax_per_lag;
  double bandwidth = 0.0;
  bool bandwidth_degenerate = false;
  Eigen::Index n = 0;
  Eigen::Index p = 0;
  TestConfig config;
  Eigen::VectorXd draws;  // sorted descending; empty unless keep_draws
};

namespace detail {

inline std::string test_context(const TestConfig& config) {
  return "mds test (lags=" + std::to_string(config.lags) +
         ", draws=" + std::to_string(config.draws) + "): ";
}

}  // namespace detail

// End-to-end test: builds eta for the chosen variant, selects the bandwidth
// (Andrews on that eta unless explicit), computes the matching statistic,
// runs the multiplier bootstrap, and assembles the decision. The Monte Carlo
// p-value is (1 + #{draws >= statistic}) / (B + 1). Errors from the
// sub-operations are rethrown with the configuration attached.
inline TestResult run_mds_test(const Panel& panel, const TestConfig& config);

namespace detail {

inline TestResult run_mds_test_impl(const Panel& panel,
                                    const TestConfig& config) {
  const EtaMatrix eta = config.variant == StatVariant::Plain
                            ? build_eta(panel, config.map, config.lags)
                            : build_eta_centered(panel, config.map, config.lags);

  KernelSpec spec;
  spec.family = config.kernel;
  bool degenerate = false;
  if (config.bandwidth) {
    if (!(*config.bandwidth > 0.0)) {
      throw config_error("explicit bandwidth must be positive");
    }
    spec.bandwidth = std::max(*config.bandwidth, kBandwidthFloor);
    spec.selection = BandwidthMode::Explicit;
  } else {
    const BandwidthSelection sel = andrews_bandwidth(eta, config.kernel);
    spec.bandwidth = sel.value;
    spec.selection = BandwidthMode::Andrews;
    degenerate = sel.all_degenerate;
  }

  const StatisticReport report =
      config.variant == StatVariant::Plain
          ? test_statistic(panel, config.map, config.lags)
          : test_statistic_centered(panel, config.map, config.lags);

  const BootstrapDraws boot = bootstrap_critical_value(
      eta, spec, config.draws, config.alpha, config.seed, config.threads);

  TestResult result;
  result.statistic = report.statistic;
  result.critical_value = boot.critical_value;
  const Eigen::Index exceed =
      (boot.draws.array() >= report.statistic).count();
  result.p_value = (1.0 + static_cast<double>(exceed)) /
                   (static_cast<double>(config.draws) + 1.0);
  result.reject = report.statistic > boot.critical_value;
  result.per_lag = report.per_lag;
  result.argmax_per_lag = report.argmax_per_lag;
  result.bandwidth = spec.bandwidth;
  result.bandwidth_degenerate = degenerate;
  result.n = panel.n();
  result.p = panel.p();
  result.config = config;
  if (config.keep_draws) result.draws = boot.draws;
  return result;
}

}  // namespace detail

inline TestResult run_mds_test(const Panel& panel, const TestConfig& config) {
  try {
    return detail::run_mds_test_impl(panel, config);
  } catch (const config_error& e) {
    throw config_error(detail::test_context(config) + e.what());
  } catch (const data_error& e) {
    throw data_error(detail::test_context(config) + e.what());
  } catch (const numerical_error& e) {
    throw numerical_error(detail::test_context(config) + e.what());
  }
}

}  // namespace hdmds
