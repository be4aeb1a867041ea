#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "hdmds/errors.hpp"
#include "hdmds/panel.hpp"
#include "hdmds/transform.hpp"

namespace hdmds {

enum class StatVariant { Plain, Centered };

// (l1, l2) pair naming the entry that attains the per-lag max: phi component
// l1 against series component l2, both 1-based.
struct LagArgmax {
  int phi_index = 0;
  int series_index = 0;
};

struct StatisticReport {
  double statistic = 0.0;
  Eigen::VectorXd per_lag;                // n * |gamma_hat_j|_inf^2 per lag
  std::vector<LagArgmax> argmax_per_lag;  // smallest flat index on exact ties
  StatVariant variant = StatVariant::Plain;
};

namespace detail {

// One-pass Kahan-compensated accumulation of the vec'd outer products. The
// summands nearly cancel under the null, so plain accumulation loses digits
// when the term count is large.
template <typename TermFn>
Eigen::VectorXd kahan_mean(Eigen::Index pd, Eigen::Index count, TermFn&& term) {
  Eigen::ArrayXd acc = Eigen::ArrayXd::Zero(pd);
  Eigen::ArrayXd comp = Eigen::ArrayXd::Zero(pd);
  Eigen::ArrayXd y(pd), tmp(pd);
  for (Eigen::Index t = 0; t < count; ++t) {
    y = term(t) - comp;
    tmp = acc + y;
    comp = (tmp - acc) - y;
    acc = tmp;
  }
  return acc.matrix() / static_cast<double>(count);
}

inline void check_single_lag(Eigen::Index n, int j) {
  if (j < 1 || j > n - 1) {
    throw config_error("lag j must satisfy 1 <= j <= n-1; got j=" +
                       std::to_string(j) + " with n=" + std::to_string(n));
  }
}

}  // namespace detail

// Sample dependence measure at lag j: the averaged vec(phi(x_t) x_{t+j}^T)
// over t = 1..n-j, same vec convention as EtaMatrix.
inline Eigen::VectorXd gamma_hat(const Panel& panel, MapKind map, int j) {
  const Eigen::Index n = panel.n();
  detail::check_single_lag(n, j);
  const Eigen::Index d = map_output_dim(map, panel.p());
  const Eigen::Index pd = panel.p() * d;
  return detail::kahan_mean(pd, n - j, [&](Eigen::Index t) {
    const Eigen::VectorXd phi = apply_map(map, panel.data.row(t).transpose());
    return (phi * panel.data.row(t + j)).reshaped().array().eval();
  });
}

// Centered variant: x_{t+j} replaced by its deviation from the full-sample
// mean.
inline Eigen::VectorXd gamma_hat_centered(const Panel& panel, MapKind map,
                                          int j) {
  const Eigen::Index n = panel.n();
  detail::check_single_lag(n, j);
  const Eigen::Index d = map_output_dim(map, panel.p());
  const Eigen::Index pd = panel.p() * d;
  const Eigen::RowVectorXd xbar = column_means(panel).transpose();
  return detail::kahan_mean(pd, n - j, [&](Eigen::Index t) {
    const Eigen::VectorXd phi = apply_map(map, panel.data.row(t).transpose());
    return (phi * (panel.data.row(t + j) - xbar)).reshaped().array().eval();
  });
}

namespace detail {

inline StatisticReport assemble_report(const Panel& panel, MapKind map,
                                       int lags, StatVariant variant) {
  const Eigen::Index n = panel.n();
  // The statistic itself only needs every lag to exist (K <= n-1); the
  // tighter K <= n-2 bound belongs to the eta construction.
  if (lags < 1 || lags > n - 1) {
    throw config_error("lag count K must satisfy 1 <= K <= n-1; got K=" +
                       std::to_string(lags) + " with n=" + std::to_string(n));
  }
  const Eigen::Index d = map_output_dim(map, panel.p());

  StatisticReport report;
  report.variant = variant;
  report.per_lag.resize(lags);
  report.argmax_per_lag.resize(lags);
  for (int j = 1; j <= lags; ++j) {
    const Eigen::VectorXd g = variant == StatVariant::Plain
                                  ? gamma_hat(panel, map, j)
                                  : gamma_hat_centered(panel, map, j);
    Eigen::Index best = 0;
    double best_abs = std::abs(g[0]);
    for (Eigen::Index i = 1; i < g.size(); ++i) {
      const double a = std::abs(g[i]);
      if (a > best_abs) {
        best_abs = a;
        best = i;
      }
    }
    report.per_lag[j - 1] = static_cast<double>(n) * best_abs * best_abs;
    report.argmax_per_lag[j - 1] = {static_cast<int>(best % d) + 1,
                                    static_cast<int>(best / d) + 1};
  }
  report.statistic = report.per_lag.sum();
  return report;
}

}  // namespace detail

// Max-norm test statistic: n * sum over lags of the squared largest
// |gamma_hat_j| entry, with per-lag contributions and argmax diagnostics.
inline StatisticReport test_statistic(const Panel& panel, MapKind map,
                                      int lags) {
  return detail::assemble_report(panel, map, lags, StatVariant::Plain);
}

inline StatisticReport test_statistic_centered(const Panel& panel, MapKind map,
                                               int lags) {
  return detail::assemble_report(panel, map, lags, StatVariant::Centered);
}

}  // namespace hdmds
