#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <string>

#include "hdmds/errors.hpp"
#include "hdmds/linalg.hpp"
#include "hdmds/panel.hpp"
#include "hdmds/rng.hpp"

namespace hdmds {

// Built-in simulation models. M1-M3 satisfy the martingale difference null;
// M4-M6 violate it through nonlinear serial dependence. M1p-M3p add a
// perturbation of size `a` to the corresponding null model:
//   M1:  x_t iid N(0, A), A Toeplitz with ratio 0.995
//   M2:  stochastic volatility, x_t = eps_t .* exp(s_t),
//        s_t = 0.25 s_{t-1} + 0.05 u_t
//   M3:  constant-conditional-correlation GARCH(1,1),
//        x_t = sqrt(b_t) .* eps_t, b_t = a0 + 0.9 b_{t-1} + a2 .* x_{t-1}^2
//   M4:  exponential AR, x_t = 0.15 x_{t-1} + exp(-2 x_{t-1}^2) + eps_t
//   M5:  white noise plus cosine of an AR first difference,
//        x_t = eps_t + 0.8 cos(z_t - z_{t-1}), z_t = 0.85 z_{t-1} + u_t
//   M6:  threshold AR, per coordinate
//        x_t = -0.45 x_{t-1} 1{x_{t-1} >= 1} + 0.6 x_{t-1} 1{x_{t-1} < 1} + e_t
//   M1p: y_t = x_t + a exp(-2 x_{t-1}^2)           (x from M1)
//   M2p: y_t = x_t + a cos(eps_{t-1} .* s_{t-1})   (x from M2)
//   M3p: y_t = x_t + a log(x_{t-2}^2)              (x from M3)
// All nonlinear functions act elementwise.
enum class DgpModel { M1, M2, M3, M4, M5, M6, M1p, M2p, M3p };

struct DgpSpec {
  DgpModel model = DgpModel::M1;
  Eigen::Index n = 100;
  Eigen::Index p = 2;
  double a = 0.0;       // perturbation distance, M1p-M3p only
  int burn_in = 500;
  std::uint64_t seed = 0;
};

inline Eigen::MatrixXd toeplitz_cov(Eigen::Index p, double rho) {
  if (p < 1) throw config_error("toeplitz_cov: p must be >= 1");
  if (!(std::abs(rho) < 1.0)) {
    throw config_error("toeplitz_cov: need |rho| < 1");
  }
  Eigen::MatrixXd cov(p, p);
  for (Eigen::Index i = 0; i < p; ++i) {
    for (Eigen::Index j = 0; j < p; ++j) {
      cov(i, j) = std::pow(rho, std::abs(static_cast<double>(i - j)));
    }
  }
  return cov;
}

inline Eigen::MatrixXd equicorr_cov(Eigen::Index p, double offdiag) {
  if (p < 1) throw config_error("equicorr_cov: p must be >= 1");
  if (p > 1 &&
      !(offdiag > -1.0 / static_cast<double>(p - 1) && offdiag < 1.0)) {
    throw config_error("equicorr_cov: offdiag outside (-1/(p-1), 1)");
  }
  Eigen::MatrixXd cov = Eigen::MatrixXd::Constant(p, p, offdiag);
  cov.diagonal().setOnes();
  return cov;
}

inline Eigen::VectorXd mvn_sample(const PsdFactor& factor, NormalStream& rng) {
  return factor.factor * rng.vector(factor.dim());
}

namespace detail {

inline bool is_perturbed(DgpModel m) {
  return m == DgpModel::M1p || m == DgpModel::M2p || m == DgpModel::M3p;
}

inline DgpModel base_model(DgpModel m) {
  switch (m) {
    case DgpModel::M1p:
      return DgpModel::M1;
    case DgpModel::M2p:
      return DgpModel::M2;
    case DgpModel::M3p:
      return DgpModel::M3;
    default:
      return m;
  }
}

inline void validate_dgp(const DgpSpec& spec) {
  if (spec.n < 2) throw config_error("dgp: n must be >= 2");
  if (spec.p < 1) throw config_error("dgp: p must be >= 1");
  if (spec.burn_in < 0) throw config_error("dgp: burn_in must be >= 0");
  if (spec.a < 0.0) throw config_error("dgp: perturbation distance a must be >= 0");
  if (spec.a != 0.0 && !is_perturbed(spec.model)) {
    throw config_error("dgp: a is only meaningful for models m1p/m2p/m3p");
  }
  const DgpModel base = base_model(spec.model);
  if (base == DgpModel::M3 && spec.p < 2) {
    throw config_error("dgp: model m3/m3p needs p >= 2");
  }
}

}  // namespace detail

// Simulates one path. Recursions start from zero states (the GARCH
// volatility starts at its intercept a0) and run burn_in warm-up steps before
// recording; warm-up draws are consumed by every model, so a perturbed model
// at a = 0 reproduces its base model exactly for the same seed.
//
// Draw order per step, for reproducibility: the main innovation eps_t first,
// then the secondary innovation u_t where the model has one. M6 draws one
// standard normal per coordinate.
inline Panel simulate(const DgpSpec& spec) {
  detail::validate_dgp(spec);
  const DgpModel base = detail::base_model(spec.model);
  const Eigen::Index p = spec.p;
  NormalStream rng(spec.seed);

  PsdFactor eps_factor;
  PsdFactor u_factor;
  switch (base) {
    case DgpModel::M1:
      eps_factor = psd_factor(toeplitz_cov(p, 0.995));
      break;
    case DgpModel::M2:
      eps_factor = psd_factor(equicorr_cov(p, 0.4));
      u_factor = psd_factor(toeplitz_cov(p, 0.9));
      break;
    case DgpModel::M3:
      eps_factor = psd_factor(equicorr_cov(p, 0.5));
      break;
    case DgpModel::M4:
      eps_factor = psd_factor(equicorr_cov(p, 0.25));
      break;
    case DgpModel::M5:
      eps_factor = psd_factor(equicorr_cov(p, 0.3));
      u_factor = psd_factor(toeplitz_cov(p, 0.7));
      break;
    default:
      break;  // M6 uses unit-variance independent innovations
  }

  Eigen::VectorXd a0(p), a2(p);
  if (base == DgpModel::M3) {
    a0.setConstant(0.1);
    a0[0] = 0.2;
    a2.setConstant(0.03);
    a2[0] = 0.05;
    a2[1] = 0.08;
  }

  Eigen::VectorXd x_lag1 = Eigen::VectorXd::Zero(p);
  Eigen::VectorXd x_lag2 = Eigen::VectorXd::Zero(p);
  Eigen::VectorXd eps_lag = Eigen::VectorXd::Zero(p);
  Eigen::VectorXd sigma_lag = Eigen::VectorXd::Zero(p);
  Eigen::VectorXd sigma = Eigen::VectorXd::Zero(p);
  Eigen::VectorXd z_state = Eigen::VectorXd::Zero(p);
  Eigen::VectorXd vol = base == DgpModel::M3 ? a0 : Eigen::VectorXd::Zero(p);

  Panel panel;
  panel.data.resize(spec.n, p);
  const Eigen::Index total = spec.n + spec.burn_in;

  for (Eigen::Index step = 0; step < total; ++step) {
    Eigen::VectorXd x(p);
    Eigen::VectorXd eps;
    switch (base) {
      case DgpModel::M1:
        x = mvn_sample(eps_factor, rng);
        eps = x;
        break;
      case DgpModel::M2:
        eps = mvn_sample(eps_factor, rng);
        sigma = 0.25 * sigma + 0.05 * mvn_sample(u_factor, rng);
        x = (eps.array() * sigma.array().exp()).matrix();
        break;
      case DgpModel::M3:
        eps = mvn_sample(eps_factor, rng);
        vol = (a0.array() + 0.9 * vol.array() +
               a2.array() * x_lag1.array().square()).matrix();
        x = (vol.array().sqrt() * eps.array()).matrix();
        break;
      case DgpModel::M4:
        eps = mvn_sample(eps_factor, rng);
        x = (0.15 * x_lag1.array() +
             (-2.0 * x_lag1.array().square()).exp() + eps.array()).matrix();
        break;
      case DgpModel::M5: {
        eps = mvn_sample(eps_factor, rng);
        const Eigen::VectorXd z_next = 0.85 * z_state + mvn_sample(u_factor, rng);
        x = (eps.array() + 0.8 * (z_next - z_state).array().cos()).matrix();
        z_state = z_next;
        break;
      }
      case DgpModel::M6: {
        eps = rng.vector(p);
        for (Eigen::Index i = 0; i < p; ++i) {
          const double coeff = x_lag1[i] >= 1.0 ? -0.45 : 0.6;
          x[i] = coeff * x_lag1[i] + eps[i];
        }
        break;
      }
      default:
        throw config_error("dgp: unreachable model");
    }

    Eigen::VectorXd y = x;
    switch (spec.model) {
      case DgpModel::M1p:
        y = (x.array() + spec.a * (-2.0 * x_lag1.array().square()).exp()).matrix();
        break;
      case DgpModel::M2p:
        y = (x.array() + spec.a * (eps_lag.array() * sigma_lag.array()).cos()).matrix();
        break;
      case DgpModel::M3p:
        // x^2 floored at 1e-300 so log stays finite on the measure-zero event.
        y = (x.array() +
             spec.a * x_lag2.array().square().max(1e-300).log()).matrix();
        break;
      default:
        break;
    }

    x_lag2 = x_lag1;
    x_lag1 = x;
    eps_lag = eps;
    sigma_lag = sigma;

    if (step >= spec.burn_in) {
      panel.data.row(step - spec.burn_in) = y.transpose();
    }
  }
  return panel;
}

}  // namespace hdmds
