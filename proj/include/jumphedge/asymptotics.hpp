#pragma once

// Limit objects of the enlarged-volatility hedge as n -> infinity.

#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "jumphedge/models.hpp"

namespace jumphedge {

/// G(a) = E|Z + a| = 2 phi(a) + a (2 Phi(a) - 1)
double g_fn(double a);
/// Lambda(a) = Var|Z + a| = 1 + a^2 - G(a)^2
double lambda_fn(double a);

/// E|cZ + q| for c >= 0, via c G(q/c).
double abs_normal_moment(double c, double q);

struct LimitContext {
  double strike = 1.0;
  double kappa = 0.0;
  double rho = 1.0;
  VolFunction sigma = ConstantVol{};

  void validate() const;
};

struct QuadratureReport {
  double value = 0.0;
  double error_estimate = 0.0;
  double upper_limit = 0.0;  // truncation point in u = sqrt(lambda)
  std::size_t evaluations = 0;
};

/// Limit trading volume
///   Gamma(x, sigma, rho) = x int_0^inf lambda^{-1/2} phi_tilde(lambda, x) E|sigma/rho Z + q(lambda, x)| dlambda
/// integrated in u = sqrt(lambda) with adaptive Gauss-Kronrod. Throws
/// std::runtime_error when the error estimate misses the tolerance.
QuadratureReport gamma_limit_report(double x, double sigma_y, double K, double rho);
double gamma_limit(double x, double sigma_y, double K, double rho);
double gamma_limit(double x, double y, const LimitContext& ctx);

/// min(x, K) - kappa Gamma(x, y, rho)
double corrector(double x, double y, const LimitContext& ctx);

/// 1 - kappa sigma(y) / rho sqrt(8/pi)
double eta(double y, const LimitContext& ctx);

/// (rho / sigma(y)) (ln(x/K) / (2 lambda) - 1/4)
double p_fn(double lambda, double x, double y, const LimitContext& ctx);

struct GammaTableRow {
  double x = 0.0;
  double gamma = 0.0;
  double corrector = 0.0;
};

/// Gamma and corrector on `points` equally spaced spots in [x_min, x_max].
std::vector<GammaTableRow> gamma_table(const LimitContext& ctx, double y, double x_min, double x_max, int points);

/// Quantile price delta_eps = inf{a > 0 : P((1 - kappa) min(S1, K) > (1 - a) S0) >= 1 - eps}
/// for the empirical law of `terminal`. Returns 0 when every a > 0 works.
/// Throws std::invalid_argument when eps < 1/N.
double quantile_price(std::span<const double> terminal, double s0, double kappa, double K, double eps);

struct SuperhedgeSearch {
  double lo_factor = 1e-4;  // search over [lo, hi] * sqrt(8/pi)
  double hi_factor = 100.0;
  int grid_points = 64;
  double rel_tol = 1e-3;
};

struct SuperhedgeResult {
  bool found = false;
  double rho_star = 0.0;
  std::size_t grid_index = 0;
  bool feasibility_monotone = true;
  // worst sample at rho_star, or at the largest grid rho when nothing is feasible
  double worst_x = 0.0;
  double worst_y = 0.0;
  double worst_corrector = 0.0;
};

/// Smallest rho on the search grid (then bisection-refined) such that the
/// corrector min(x, K) - kappa Gamma(x, y, rho) is >= 0 on every (S1, y1)
/// sample. ctx.rho is ignored.
SuperhedgeResult superhedge_rho(std::span<const std::pair<double, double>> states, const LimitContext& ctx,
                                const SuperhedgeSearch& search = {});

struct GridDiagnostics {
  int n = 0;
  double mu = 1.0;
  double rho = 1.0;
  double lambda0 = 0.0;
  std::vector<double> t;             // t_0..t_n
  std::vector<double> lambda;        // lambda_0..lambda_n
  std::vector<double> delta_lambda;  // index j = 1..n stored at j-1
  double l_lower = 0.0;              // ln^-3 n
  double l_upper = 0.0;              // ln^3 n
  int m1 = 1;
  int m2 = 1;
  /// The truncation window only means something once ln^3 n < lambda0.
  bool asymptotic_only = false;

  /// max over interior j of |delta_lambda_j / sqrt(delta_t_j) - rho| / rho
  double max_ratio_deviation() const;
};

GridDiagnostics grid_diagnostics(int n, double mu, double rho);

}  // namespace jumphedge
