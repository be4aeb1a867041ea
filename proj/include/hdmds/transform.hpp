#pragma once

#include <Eigen/Dense>
#include <string>

#include "hdmds/errors.hpp"
#include "hdmds/panel.hpp"

namespace hdmds {

// User-chosen component map applied to x_t before forming lagged products.
//   Linear:          phi(x) = x                      (d = p)
//   LinearQuadratic: phi(x) = (x, x^2)               (d = 2p)
//   Cosine:          phi(x) = cos(x) elementwise     (d = p)
enum class MapKind { Linear, LinearQuadratic, Cosine };

inline Eigen::Index map_output_dim(MapKind kind, Eigen::Index p) {
  return kind == MapKind::LinearQuadratic ? 2 * p : p;
}

inline Eigen::VectorXd apply_map(MapKind kind,
                                 const Eigen::Ref<const Eigen::VectorXd>& x) {
  switch (kind) {
    case MapKind::Linear:
      return x;
    case MapKind::LinearQuadratic: {
      Eigen::VectorXd out(2 * x.size());
      out.head(x.size()) = x;
      out.tail(x.size()) = x.array().square();
      return out;
    }
    case MapKind::Cosine:
      return x.array().cos();
  }
  throw config_error("apply_map: unknown map kind");
}

// Stacked lagged-product series. Row t (0-based) holds the concatenation over
// lags j = 1..K of vec(phi(x_t) x_{t+j}^T), with vec stacking the d x p outer
// product column-major: entry (l2 - 1) d + l1 pairs phi component l1 with
// series component l2 (1-based). Block j occupies columns [(j-1) p d, j p d).
struct EtaMatrix {
  Eigen::MatrixXd data;  // n_tilde x (K p d)
  Eigen::Index n_tilde = 0;
  Eigen::Index lags = 0;
  Eigen::Index p = 0;
  Eigen::Index d = 0;
  bool centered = false;

  Eigen::Index width() const { return lags * p * d; }
};

namespace detail {

inline void check_lag_range(Eigen::Index n, int lags) {
  if (lags < 1 || lags > n - 2) {
    throw config_error("lag count K must satisfy 1 <= K <= n-2; got K=" +
                       std::to_string(lags) + " with n=" + std::to_string(n));
  }
}

}  // namespace detail

inline EtaMatrix build_eta(const Panel& panel, MapKind map, int lags) {
  const Eigen::Index n = panel.n();
  const Eigen::Index p = panel.p();
  detail::check_lag_range(n, lags);
  const Eigen::Index d = map_output_dim(map, p);
  const Eigen::Index pd = p * d;
  const Eigen::Index nt = n - lags;

  EtaMatrix eta;
  eta.n_tilde = nt;
  eta.lags = lags;
  eta.p = p;
  eta.d = d;
  eta.centered = false;
  eta.data.resize(nt, lags * pd);
  for (Eigen::Index t = 0; t < nt; ++t) {
    const Eigen::VectorXd phi = apply_map(map, panel.data.row(t).transpose());
    for (Eigen::Index j = 1; j <= lags; ++j) {
      const Eigen::MatrixXd outer = phi * panel.data.row(t + j);
      eta.data.row(t).segment((j - 1) * pd, pd) = outer.reshaped().transpose();
    }
  }
  return eta;
}

// Mean-centered variant used by the test for an unknown common mean: block j
// of row t is vec( phi(x_t)(x_{t+j} - xbar)^T - phibar_j (x_t - xbar)^T ),
// where xbar is the full-sample mean and phibar_j averages phi(x_s) over
// s = 1..n-j.
inline EtaMatrix build_eta_centered(const Panel& panel, MapKind map, int lags) {
  const Eigen::Index n = panel.n();
  const Eigen::Index p = panel.p();
  detail::check_lag_range(n, lags);
  const Eigen::Index d = map_output_dim(map, p);
  const Eigen::Index pd = p * d;
  const Eigen::Index nt = n - lags;

  const Eigen::VectorXd xbar = column_means(panel);

  // phi rows for s = 0..n-2 are enough: phibar_j needs sums up to n-j-1.
  Eigen::MatrixXd phi_rows(n, d);
  for (Eigen::Index t = 0; t < n; ++t) {
    phi_rows.row(t) = apply_map(map, panel.data.row(t).transpose()).transpose();
  }
  Eigen::MatrixXd phibar(lags, d);
  Eigen::VectorXd running = Eigen::VectorXd::Zero(d);
  for (Eigen::Index s = 0; s < n - 1; ++s) running += phi_rows.row(s).transpose();
  for (Eigen::Index j = 1; j <= lags; ++j) {
    // running currently holds the sum over s = 0..n-j-1
    phibar.row(j - 1) = running.transpose() / static_cast<double>(n - j);
    if (j < lags) running -= phi_rows.row(n - j - 1).transpose();
  }

  EtaMatrix eta;
  eta.n_tilde = nt;
  eta.lags = lags;
  eta.p = p;
  eta.d = d;
  eta.centered = true;
  eta.data.resize(nt, lags * pd);
  for (Eigen::Index t = 0; t < nt; ++t) {
    const Eigen::VectorXd phi = phi_rows.row(t).transpose();
    const Eigen::RowVectorXd x_dev = panel.data.row(t) - xbar.transpose();
    for (Eigen::Index j = 1; j <= lags; ++j) {
      const Eigen::RowVectorXd lead_dev = panel.data.row(t + j) - xbar.transpose();
      const Eigen::MatrixXd outer =
          phi * lead_dev - phibar.row(j - 1).transpose() * x_dev;
      eta.data.row(t).segment((j - 1) * pd, pd) = outer.reshaped().transpose();
    }
  }
  return eta;
}

}  // namespace hdmds
