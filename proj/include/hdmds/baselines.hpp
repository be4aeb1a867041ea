#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <string>

#include "hdmds/errors.hpp"
#include "hdmds/panel.hpp"

namespace hdmds {

namespace detail {

// Regularized incomplete gamma, series branch: P(a, x) for x < a + 1.
inline double gamma_p_series(double a, double x) {
  double ap = a;
  double sum = 1.0 / a;
  double del = sum;
  for (int i = 0; i < 500; ++i) {
    ap += 1.0;
    del *= x / ap;
    sum += del;
    if (std::abs(del) < std::abs(sum) * 1e-15) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Continued-fraction branch (modified Lentz): Q(a, x) for x >= a + 1.
inline double gamma_q_cf(double a, double x) {
  const double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= 500; ++i) {
    const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < 1e-15) break;
  }
  return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

}  // namespace detail

// Upper-tail probability of a chi-squared variable with df degrees of
// freedom.
inline double chi_squared_upper_tail(double df, double x) {
  if (df <= 0.0) throw config_error("chi_squared_upper_tail: df must be > 0");
  if (x <= 0.0) return 1.0;
  const double a = df / 2.0;
  const double xx = x / 2.0;
  if (xx < a + 1.0) return 1.0 - detail::gamma_p_series(a, xx);
  return detail::gamma_q_cf(a, xx);
}

// Raw (non-demeaned) sample autocovariance at lag k:
//   C_k = n^{-1} sum_{t=k+1}^{n} x_t x_{t-k}^T.
inline Eigen::MatrixXd autocov(const Panel& panel, int k) {
  const Eigen::Index n = panel.n();
  if (k < 0 || k > n - 1) {
    throw config_error("autocov: lag k must satisfy 0 <= k <= n-1; got k=" +
                       std::to_string(k));
  }
  const Eigen::Index p = panel.p();
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(p, p);
  for (Eigen::Index t = k; t < n; ++t) {
    c += panel.data.row(t).transpose() * panel.data.row(t - k);
  }
  return c / static_cast<double>(n);
}

enum class PortmanteauVariant { BoxPierce, Hosking, LiMcLeod };

struct PortmanteauResult {
  PortmanteauVariant variant = PortmanteauVariant::BoxPierce;
  double statistic = 0.0;
  int df = 0;
  double p_value = 1.0;
};

// Multivariate portmanteau white-noise tests over lags 1..K, referenced to a
// chi-squared distribution with p^2 K degrees of freedom:
//   BoxPierce: n sum_k tr(C_k^T C_0^{-1} C_k C_0^{-1})
//   Hosking:   the finite-sample modification weighting lag k by n^2/(n-k)
//   LiMcLeod:  BoxPierce plus the offset p^2 K (K+1) / (2n)
inline PortmanteauResult portmanteau(const Panel& panel, int lags,
                                     PortmanteauVariant variant) {
  const Eigen::Index n = panel.n();
  const Eigen::Index p = panel.p();
  if (lags < 1 || lags > n - 1) {
    throw config_error("portmanteau: lags must satisfy 1 <= K <= n-1");
  }

  const Eigen::MatrixXd c0 = autocov(panel, 0);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(c0);
  if (eig.info() != Eigen::Success) {
    throw numerical_error("portmanteau: eigendecomposition of C_0 failed");
  }
  const double lmin = eig.eigenvalues().minCoeff();
  const double lmax = eig.eigenvalues().maxCoeff();
  if (!(lmin > 0.0) || lmax / lmin > 1e12) {
    throw numerical_error(
        "portmanteau: C_0 is singular or ill-conditioned "
        "(condition number guard 1e12)");
  }
  const Eigen::MatrixXd c0_inv = eig.eigenvectors() *
                                 eig.eigenvalues().cwiseInverse().asDiagonal() *
                                 eig.eigenvectors().transpose();

  double stat = 0.0;
  const double nd = static_cast<double>(n);
  for (int k = 1; k <= lags; ++k) {
    const Eigen::MatrixXd ck = autocov(panel, k);
    const double term =
        (ck.transpose() * c0_inv * ck * c0_inv).trace();
    if (variant == PortmanteauVariant::Hosking) {
      stat += nd * nd / (nd - static_cast<double>(k)) * term;
    } else {
      stat += nd * term;
    }
  }
  if (variant == PortmanteauVariant::LiMcLeod) {
    stat += static_cast<double>(p * p) * lags * (lags + 1) / (2.0 * nd);
  }

  PortmanteauResult result;
  result.variant = variant;
  result.statistic = stat;
  result.df = static_cast<int>(p * p) * lags;
  result.p_value = chi_squared_upper_tail(result.df, stat);
  return result;
}

inline std::string portmanteau_name(PortmanteauVariant v) {
  switch (v) {
    case PortmanteauVariant::BoxPierce:
      return "bp";
    case PortmanteauVariant::Hosking:
      return "hs";
    case PortmanteauVariant::LiMcLeod:
      return "lm";
  }
  return "?";
}

}  // namespace hdmds
