#pragma once

#include <functional>
#include <limits>
#include <stdexcept>

namespace trialmsm {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Standard normal CDF, accurate to full double precision in both tails.
double normal_cdf(double x);

/// Upper tail 1 - Phi(x) without cancellation.
double normal_sf(double x);

/// Standard normal quantile. Acklam's rational approximation followed by
/// one Halley step against erfc; absolute error below 1e-14 on (0, 1).
double normal_quantile(double p);

/// P(X > h, Y > k) for a standard bivariate normal with correlation rho.
///
/// Genz's BVND algorithm (Drezner-Wesolowsky transform with Gauss-Legendre
/// nodes); absolute accuracy ~1e-15.
double bvn_upper(double h, double k, double rho);

/// P(X < h, Y < k) for a standard bivariate normal with correlation rho.
double bvn_cdf(double h, double k, double rho);

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;
  int evaluations = 0;
};

/// Adaptive Gauss-Kronrod (7/15) integration on [a, b], b may be +inf.
///
/// Subdivides until the summed error estimate is below
/// max(abs_tol, rel_tol * |value|).
QuadratureResult integrate(const std::function<double(double)>& f, double a, double b,
                           double rel_tol = 1e-10, double abs_tol = 1e-14,
                           int max_intervals = 2000);

class RootNotBracketed : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Brent's method on [lo, hi]; f(lo) and f(hi) must differ in sign.
double find_root(const std::function<double(double)>& f, double lo, double hi,
                 double x_tol = 1e-12, int max_iter = 200);

}  // namespace trialmsm
