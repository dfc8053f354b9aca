#pragma once

// Call prices under the enlarged-volatility Black-Scholes equation
//
//   C_t + 1/2 sigma_hat^2(t) x^2 C_xx = 0,   C(1, x) = (x - K)+
//
// In the clock lambda_t = int_t^1 sigma_hat^2(u) du this is plain
// Black-Scholes with total variance lambda, so every Greek below is a
// function of lambda rather than t.

namespace jumphedge {

enum class ScheduleForm { Simple, Classical };

/// Enlarged variance rate for a revision grid t_i = 1 - (1 - i/n)^mu.
///
/// Simple:    sigma_hat^2(t) = rho sqrt(n f'(t)),  f(t) = 1 - (1 - t)^{1/mu}
/// Classical: sigma_hat^2(t) = base_sigma^2 + rho sqrt(n f'(t))
class VolSchedule {
 public:
  static VolSchedule simple(int n, double mu, double rho);
  static VolSchedule classical(int n, double mu, double rho, double base_sigma);

  ScheduleForm form() const noexcept { return form_; }
  int n() const noexcept { return n_; }
  double mu() const noexcept { return mu_; }
  double rho() const noexcept { return rho_; }
  double base_sigma() const noexcept { return base_sigma_; }

  /// Rate exponent mu / (2 (mu + 1)), in [1/4, 1/3).
  double beta() const noexcept { return mu_ / (2.0 * (mu_ + 1.0)); }

  /// 2 rho sqrt(n mu) / (mu + 1), the enlarged part of lambda at t = 0.
  double lambda0() const noexcept;

  /// Last revision date strictly before maturity, 1 - n^{-mu}.
  double last_interior_date() const noexcept;

  double sigma_hat_sq(double t) const;
  double lambda_at(double t) const;

 private:
  VolSchedule(ScheduleForm form, int n, double mu, double rho, double base_sigma);

  ScheduleForm form_;
  int n_;
  double mu_;
  double rho_;
  double base_sigma_;
};

/// Leland's classical enlargement constant kappa * sigma * sqrt(8/pi).
double classical_rho(double sigma, double kappa);

/// v(lambda, x) = ln(x/K)/sqrt(lambda) + sqrt(lambda)/2
double v_fn(double lambda, double x, double K);
/// q(lambda, x) = ln(x/K)/(2 lambda) - 1/4
double q_fn(double lambda, double x, double K);
/// phi(v(lambda, x))
double phi_tilde(double lambda, double x, double K);

/// x Phi(v) - K Phi(v - sqrt(lambda)); (x - K)+ at lambda = 0.
double call_price(double lambda, double x, double K);
/// Phi(v); the step 1{x > K} at lambda = 0.
double call_delta(double lambda, double x, double K);
/// phi_tilde / (x sqrt(lambda)). Throws std::domain_error for lambda <= 0.
double call_gamma(double lambda, double x, double K);
/// C_xxx = -(phi_tilde / (x^2 lambda)) (3 sqrt(lambda)/2 + ln(x/K)/sqrt(lambda)).
/// Throws std::domain_error for lambda <= 0.
double call_speed(double lambda, double x, double K);

/// C_xt(t, x) = -1/2 sigma_hat^2(t) (2 x C_xx + x^2 C_xxx). Rejects t past
/// the last interior revision date, where the enlarged rate blows up.
double theta_cross(const VolSchedule& schedule, double t, double x, double K);

}  // namespace jumphedge
