#include "jumphedge/pricing.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "jumphedge/normal.hpp"

namespace jumphedge {

VolSchedule::VolSchedule(ScheduleForm form, int n, double mu, double rho, double base_sigma)
    : form_(form), n_(n), mu_(mu), rho_(rho), base_sigma_(base_sigma) {
  if (n < 1) throw std::invalid_argument("VolSchedule: n must be >= 1");
  if (!(mu >= 1.0 && mu < 2.0)) throw std::invalid_argument("VolSchedule: mu must lie in [1, 2)");
  if (!(rho > 0.0) || !std::isfinite(rho)) throw std::invalid_argument("VolSchedule: rho must be positive");
  if (!(base_sigma >= 0.0)) throw std::invalid_argument("VolSchedule: base_sigma must be >= 0");
}

VolSchedule VolSchedule::simple(int n, double mu, double rho) {
  return VolSchedule(ScheduleForm::Simple, n, mu, rho, 0.0);
}

VolSchedule VolSchedule::classical(int n, double mu, double rho, double base_sigma) {
  return VolSchedule(ScheduleForm::Classical, n, mu, rho, base_sigma);
}

double VolSchedule::lambda0() const noexcept {
  return 2.0 * rho_ * std::sqrt(static_cast<double>(n_) * mu_) / (mu_ + 1.0);
}

double VolSchedule::last_interior_date() const noexcept {
  return 1.0 - std::pow(static_cast<double>(n_), -mu_);
}

double VolSchedule::sigma_hat_sq(double t) const {
  if (!(t >= 0.0 && t < 1.0)) throw std::domain_error("sigma_hat_sq: t must lie in [0, 1)");
  const double enlarged =
      rho_ * std::sqrt(static_cast<double>(n_) / mu_) * std::pow(1.0 - t, (1.0 - mu_) / (2.0 * mu_));
  return form_ == ScheduleForm::Classical ? base_sigma_ * base_sigma_ + enlarged : enlarged;
}

double VolSchedule::lambda_at(double t) const {
  if (!(t >= 0.0 && t <= 1.0)) throw std::domain_error("lambda_at: t must lie in [0, 1]");
  const double rest = 1.0 - t;
  const double enlarged = lambda0() * std::pow(rest, (mu_ + 1.0) / (2.0 * mu_));
  return form_ == ScheduleForm::Classical ? base_sigma_ * base_sigma_ * rest + enlarged : enlarged;
}

double classical_rho(double sigma, double kappa) {
  return kappa * sigma * std::sqrt(8.0 / std::numbers::pi);
}

double v_fn(double lambda, double x, double K) {
  const double sl = std::sqrt(lambda);
  return std::log(x / K) / sl + 0.5 * sl;
}

double q_fn(double lambda, double x, double K) { return std::log(x / K) / (2.0 * lambda) - 0.25; }

double phi_tilde(double lambda, double x, double K) { return norm_pdf(v_fn(lambda, x, K)); }

double call_price(double lambda, double x, double K) {
  if (lambda <= 0.0) return std::max(x - K, 0.0);
  const double v = v_fn(lambda, x, K);
  return x * norm_cdf(v) - K * norm_cdf(v - std::sqrt(lambda));
}

double call_delta(double lambda, double x, double K) {
  if (lambda <= 0.0) return x > K ? 1.0 : 0.0;
  return norm_cdf(v_fn(lambda, x, K));
}

double call_gamma(double lambda, double x, double K) {
  if (!(lambda > 0.0)) throw std::domain_error("call_gamma: lambda must be positive");
  return phi_tilde(lambda, x, K) / (x * std::sqrt(lambda));
}

double call_speed(double lambda, double x, double K) {
  if (!(lambda > 0.0)) throw std::domain_error("call_speed: lambda must be positive");
  const double sl = std::sqrt(lambda);
  return -(phi_tilde(lambda, x, K) / (x * x * lambda)) * (1.5 * sl + std::log(x / K) / sl);
}

double theta_cross(const VolSchedule& schedule, double t, double x, double K) {
  if (!(t >= 0.0) || t > schedule.last_interior_date())
    throw std::domain_error("theta_cross: t must lie in [0, last interior revision date]");
  const double lambda = schedule.lambda_at(t);
  return -0.5 * schedule.sigma_hat_sq(t) * (2.0 * x * call_gamma(lambda, x, K) + x * x * call_speed(lambda, x, K));
}

}  // namespace jumphedge
