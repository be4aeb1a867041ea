#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "hdmds/errors.hpp"
#include "hdmds/transform.hpp"

namespace hdmds {

enum class KernelFamily { QuadraticSpectral, Parzen, Bartlett };

constexpr double kBandwidthFloor = 1e-6;

// Lag-window kernels used to weight sample autocovariances. All three are
// even, equal 1 at the origin, and have nonnegative Fourier transforms, so
// the induced weight matrices are positive semi-definite.
inline double kernel_eval(KernelFamily family, double x) {
  const double ax = std::abs(x);
  switch (family) {
    case KernelFamily::Bartlett:
      return ax <= 1.0 ? 1.0 - ax : 0.0;
    case KernelFamily::Parzen:
      if (ax <= 0.5) return 1.0 - 6.0 * ax * ax + 6.0 * ax * ax * ax;
      if (ax <= 1.0) {
        const double u = 1.0 - ax;
        return 2.0 * u * u * u;
      }
      return 0.0;
    case KernelFamily::QuadraticSpectral: {
      const double z = 6.0 * std::numbers::pi * x / 5.0;
      // The closed form is 0/0 at the origin; switch to the even Taylor
      // branch 1 - z^2/10 for |x| < 1e-3 (agrees to ~1e-11 at the boundary).
      if (ax < 1e-3) return 1.0 - z * z / 10.0;
      return 3.0 / (z * z) * (std::sin(z) / z - std::cos(z));
    }
  }
  throw config_error("kernel_eval: unknown kernel family");
}

inline std::string kernel_name(KernelFamily family) {
  switch (family) {
    case KernelFamily::QuadraticSpectral:
      return "qs";
    case KernelFamily::Parzen:
      return "parzen";
    case KernelFamily::Bartlett:
      return "bartlett";
  }
  return "?";
}

// AR(1) fit of a single series by no-intercept least squares, with the
// autoregressive coefficient clamped to [-0.97, 0.97] so the bandwidth
// plug-in terms (1 - rho)^{-8} stay bounded. sigma2 is the innovation
// variance under the clamped coefficient, divisor n-1.
struct Ar1Fit {
  double rho = 0.0;
  double sigma2 = 0.0;
  bool degenerate = false;  // zero-variance series
};

inline Ar1Fit ar1_fit(const Eigen::Ref<const Eigen::VectorXd>& series) {
  const Eigen::Index n = series.size();
  if (n < 2) throw config_error("ar1_fit: series needs at least 2 points");
  if (series.maxCoeff() == series.minCoeff()) {
    return {0.0, 0.0, true};  // zero-variance column
  }

  const Eigen::Index m = n - 1;
  const auto lagged = series.head(m);
  const auto lead = series.tail(m);

  const double denom = lagged.squaredNorm();
  double rho = denom > 0.0 ? lead.dot(lagged) / denom : 0.0;
  rho = std::clamp(rho, -0.97, 0.97);
  const double sigma2 = (lead - rho * lagged).squaredNorm() / static_cast<double>(m);
  return {rho, sigma2, false};
}

enum class BandwidthMode { Explicit, Andrews };

struct KernelSpec {
  KernelFamily family = KernelFamily::Bartlett;
  double bandwidth = 1.0;
  BandwidthMode selection = BandwidthMode::Andrews;
};

struct BandwidthSelection {
  double value = kBandwidthFloor;
  bool all_degenerate = false;
};

// Data-driven bandwidth via the AR(1) plug-in: fit each eta column, form
//   a(2) = sum 4 rho^2 sigma^4 (1-rho)^{-8}  /  sum sigma^4 (1-rho)^{-4}
//   a(1) = sum 4 rho^2 sigma^4 (1-rho)^{-6} (1+rho)^{-2} / same denominator
// and scale by the kernel-specific constant:
//   QS:       1.3221 (a(2) n)^{1/5}
//   Parzen:   2.6614 (a(2) n)^{1/5}
//   Bartlett: 1.1447 (a(1) n)^{1/3}
// Zero-variance columns are excluded (they contribute 0/0); the result is
// clipped to [1e-6, n_tilde].
inline BandwidthSelection andrews_bandwidth(const EtaMatrix& eta,
                                            KernelFamily family) {
  const Eigen::Index nt = eta.n_tilde;
  if (nt < 2) throw config_error("andrews_bandwidth: need n_tilde >= 2");

  double num2 = 0.0, num1 = 0.0, denom = 0.0;
  bool any = false;
  for (Eigen::Index col = 0; col < eta.data.cols(); ++col) {
    const Ar1Fit fit = ar1_fit(eta.data.col(col));
    if (fit.degenerate) continue;
    any = true;
    const double s4 = fit.sigma2 * fit.sigma2;
    const double om = 1.0 - fit.rho;
    const double op = 1.0 + fit.rho;
    const double om4 = om * om * om * om;
    num2 += 4.0 * fit.rho * fit.rho * s4 / (om4 * om4);
    num1 += 4.0 * fit.rho * fit.rho * s4 / (om4 * om * om * op * op);
    denom += s4 / om4;
  }

  BandwidthSelection sel;
  if (!any || denom == 0.0) {
    sel.all_degenerate = !any;
    sel.value = kBandwidthFloor;
    return sel;
  }

  double bw = 0.0;
  const double ntd = static_cast<double>(nt);
  switch (family) {
    case KernelFamily::QuadraticSpectral:
      bw = 1.3221 * std::pow((num2 / denom) * ntd, 0.2);
      break;
    case KernelFamily::Parzen:
      bw = 2.6614 * std::pow((num2 / denom) * ntd, 0.2);
      break;
    case KernelFamily::Bartlett:
      bw = 1.1447 * std::cbrt((num1 / denom) * ntd);
      break;
  }
  sel.value = std::clamp(bw, kBandwidthFloor, ntd);
  return sel;
}

}  // namespace hdmds
