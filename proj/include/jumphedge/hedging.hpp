#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "jumphedge/models.hpp"
#include "jumphedge/pricing.hpp"

namespace jumphedge {

/// t_i = 1 - (1 - i/n)^mu, i = 0..n.
struct RevisionGrid {
  int n = 0;
  double mu = 1.0;
  std::vector<double> dates;
};

RevisionGrid make_revision_grid(int n, double mu);

enum class Strategy {
  Leland,
  Lepinette,
  /// Not an enlarged-volatility strategy: Black-Scholes delta with the
  /// model's current sigma(y), for baseline comparisons.
  PlainDelta,
};

std::string to_string(Strategy s);

struct HedgeConfig {
  Strategy strategy = Strategy::Leland;
  VolSchedule schedule = VolSchedule::simple(2, 1.0, 1.0);
  double kappa = 0.0;
  double strike = 1.0;
  /// Charge kappa * S0 * |gamma_0| for the initial purchase. Off by default:
  /// Gamma_n only sums the revisions t_1..t_n.
  bool charge_initial_trade = false;
  /// Volatility function used by PlainDelta.
  std::optional<VolFunction> true_vol;

  void validate() const;
};

struct HedgeOutcome {
  double v0 = 0.0;
  double v1 = 0.0;
  double payoff = 0.0;
  double gamma_n = 0.0;  // sum_i S_{t_i} |gamma_i - gamma_{i-1}|
  double total_cost = 0.0;
  std::size_t n_trades = 0;
  double raw_error = 0.0;  // v1 - payoff
  std::vector<double> positions;  // gamma_0 .. gamma_n (gamma_n: terminal position)
};

/// C_x(t_prev, S_{t_prev-}).
double leland_position(const VolSchedule& schedule, double t_prev, double s_left, double K);

/// Leland position minus the running integral of C_xt along the path.
double lepinette_position(const VolSchedule& schedule, double t_prev, double s_left, double K,
                          double accumulated_correction);

/// Running integrals int_0^{t_i} C_xt(u, S_{u-}) du at every revision date
/// t_0..t_{n-1}, midpoint rule on the simulation substeps with S frozen at
/// the left end of each substep. The last interval [t_{n-2}, t_{n-1}] is
/// refined 4x. Entry n repeats entry n-1: the integrand is not defined past
/// the last interior date.
std::vector<double> lepinette_corrections(const SimulatedPath& path, const VolSchedule& schedule, double K);

/// Self-financing discrete hedge:
///   v1 = v0 + sum_i gamma_{i-1} (S_{t_i} - S_{t_{i-1}}) - kappa sum_i S_{t_i} |gamma_i - gamma_{i-1}|
/// with positions set from left limits S_{t_{i-1}-} and gamma_n the
/// payoff hedge at maturity.
HedgeOutcome run_hedge(const SimulatedPath& path, const HedgeConfig& config);

/// v1 rebuilt from an explicit ledger of holdings and cash.
double replay_ledger(const SimulatedPath& path, const HedgeConfig& config, const HedgeOutcome& outcome);

enum class Theorem {
  SVJP,       // Leland: D = V1 - h - min(S1, K) + kappa Gamma(S1, y1, rho)
  Lepinette,  // Lepinette: D = V1 - h - eta min(S1, K)
  ConstVol,   // constant-sigma variants of the two
  Raw,        // no corrector: D = V1 - h
};

std::string to_string(Theorem t);

/// Corrected replication error for the given limit theorem. `sigma` is the
/// model volatility function (ConstVol requires a constant one).
double corrected_error(const HedgeOutcome& outcome, double s1, double y1, const HedgeConfig& config, Theorem theorem,
                       const VolFunction& sigma);

/// Terms of V1 - h(S1) = 1/2 I1 + I2 - I3 - kappa Gamma_n on the path grid.
struct ErrorDecomposition {
  double i1 = 0.0;
  double i2 = 0.0;
  double i3 = 0.0;
  double gamma_n = 0.0;
  double raw_error = 0.0;
  double residual = 0.0;  // raw_error - (i1/2 + i2 - i3 - kappa gamma_n)
};

/// Discretizes the decomposition on the simulation substeps. I1 uses the
/// realized quadratic variation of the diffusive increments for the
/// sigma^2(y) S^2 dt part and the exact lambda decrement for the
/// sigma_hat^2 part; I2 integrates the left-limit integrand against the
/// diffusive increments and the jumps separately; I3 sums B(t, S_{t-}, xi)
/// over price jumps. Requires at least `min_substeps` substeps per revision
/// interval.
ErrorDecomposition error_decomposition(const SimulatedPath& path, const HedgeConfig& config, int min_substeps = 4);

/// B(t, x, z) = C(t, x(1+z)) - C(t, x) - z x C_x(t, x), evaluated at lambda.
double jump_term(double lambda, double x, double z, double K);

}  // namespace jumphedge
