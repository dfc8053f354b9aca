#include "jumphedge/asymptotics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>
#include <numbers>
#include <stdexcept>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "jumphedge/normal.hpp"
#include "jumphedge/pricing.hpp"

namespace jumphedge {

namespace {

const double kSqrt8OverPi = std::sqrt(8.0 / std::numbers::pi);

// Relative tolerance handed to the adaptive rule, and the acceptance bound on
// its error estimate.
constexpr double kQuadRelTol = 1e-10;
constexpr double kQuadAbsTol = 1e-12;
constexpr double kQuadAcceptRel = 1e-9;

}  // namespace

namespace {

// G(a) - |a| = 2 (phi(a) - |a| Phi(-|a|)), kept separate so Lambda does not cancel
double g_excess(double a) {
  const double b = std::abs(a);
  return 2.0 * (norm_pdf(b) - b * norm_cdf(-b));
}

}  // namespace

double g_fn(double a) { return std::abs(a) + g_excess(a); }

double lambda_fn(double a) {
  const double r = g_excess(a);
  return 1.0 - r * (2.0 * std::abs(a) + r);
}

double abs_normal_moment(double c, double q) {
  if (c < 0.0) throw std::invalid_argument("abs_normal_moment: c must be >= 0");
  if (c == 0.0) return std::abs(q);
  return c * g_fn(q / c);
}

void LimitContext::validate() const {
  if (!(strike > 0.0)) throw std::invalid_argument("limit context: strike must be positive");
  if (!(kappa >= 0.0 && kappa < 1.0)) throw std::invalid_argument("limit context: kappa must lie in [0, 1)");
  if (!(rho > 0.0)) throw std::invalid_argument("limit context: rho must be positive");
}

QuadratureReport gamma_limit_report(double x, double sigma_y, double K, double rho) {
  if (!(x > 0.0)) throw std::invalid_argument("gamma_limit: x must be positive");
  if (!(rho > 0.0) || !(sigma_y >= 0.0)) throw std::invalid_argument("gamma_limit: need rho > 0, sigma >= 0");
  const double a = std::log(x / K);
  const double c = sigma_y / rho;

  QuadratureReport rep;
  // lambda = u^2 turns lambda^{-1/2} dlambda into 2 du.
  auto integrand = [&](double u) {
    ++rep.evaluations;
    if (u <= 0.0) return a == 0.0 ? 2.0 * x * kInvSqrt2Pi * abs_normal_moment(c, -0.25) : 0.0;
    const double lambda = u * u;
    const double ph = norm_pdf(a / u + 0.5 * u);
    if (ph == 0.0) return 0.0;
    return 2.0 * x * ph * abs_normal_moment(c, a / (2.0 * lambda) - 0.25);
  };

  // phi_tilde peaks at u = sqrt(2|a|); past the upper limit v(u) >= 40.
  const double peak = std::max(std::sqrt(2.0 * std::abs(a)), 1.0);
  const double upper = 40.0 + std::sqrt(1600.0 + 2.0 * std::abs(a));
  rep.upper_limit = upper;

  using boost::math::quadrature::gauss_kronrod;
  auto add = [&](auto&& f, double lo, double hi) {
    double err = 0.0;
    rep.value += gauss_kronrod<double, 31>::integrate(f, lo, hi, 20, kQuadRelTol, &err);
    rep.error_estimate += err;
  };

  // Near the strike q ~ a/(2u^2) against phi(a/u) leaves a spike of mass ~x/2
  // on u ~ |a|. Below the peak integrate in s = ln u there, where it is O(1) wide.
  const double aa = std::abs(a);
  double lo = 0.0;
  if (aa > 0.0 && aa < 0.25 * peak) {
    lo = aa / 64.0;  // phi(a/u) < phi(64) below
    add(integrand, 0.0, lo);
    auto in_log = [&](double s) {
      const double u = std::exp(s);
      return integrand(u) * u;
    };
    const double s_hi = std::log(peak);
    for (double s = std::log(lo); s < s_hi; s += 3.0) add(in_log, s, std::min(s + 3.0, s_hi));
  } else {
    add(integrand, 0.0, peak);
  }
  add(integrand, peak, peak + 10.0);
  add(integrand, peak + 10.0, upper);
  if (!(rep.error_estimate <= std::max(kQuadAbsTol, kQuadAcceptRel * std::abs(rep.value))) ||
      !std::isfinite(rep.value))
    throw std::runtime_error("gamma_limit: quadrature did not converge (x=" + std::to_string(x) +
                             ", sigma=" + std::to_string(sigma_y) + ", rho=" + std::to_string(rho) +
                             ", value=" + std::to_string(rep.value) + ", error=" + std::to_string(rep.error_estimate) +
                             ", evaluations=" + std::to_string(rep.evaluations) + ")");
  return rep;
}

double gamma_limit(double x, double sigma_y, double K, double rho) {
  return gamma_limit_report(x, sigma_y, K, rho).value;
}

double gamma_limit(double x, double y, const LimitContext& ctx) {
  return gamma_limit(x, vol_at(ctx.sigma, y), ctx.strike, ctx.rho);
}

double corrector(double x, double y, const LimitContext& ctx) {
  const double m = std::min(x, ctx.strike);
  if (ctx.kappa == 0.0) return m;
  return m - ctx.kappa * gamma_limit(x, y, ctx);
}

double eta(double y, const LimitContext& ctx) {
  return 1.0 - ctx.kappa * vol_at(ctx.sigma, y) / ctx.rho * kSqrt8OverPi;
}

double p_fn(double lambda, double x, double y, const LimitContext& ctx) {
  if (!(lambda > 0.0)) throw std::invalid_argument("p_fn: lambda must be positive");
  return ctx.rho / vol_at(ctx.sigma, y) * (std::log(x / ctx.strike) / (2.0 * lambda) - 0.25);
}

std::vector<GammaTableRow> gamma_table(const LimitContext& ctx, double y, double x_min, double x_max, int points) {
  ctx.validate();
  if (points < 2 || !(x_min > 0.0) || !(x_max > x_min))
    throw std::invalid_argument("gamma_table: need points >= 2 and 0 < x_min < x_max");
  std::vector<GammaTableRow> rows;
  rows.reserve(static_cast<std::size_t>(points));
  for (int i = 0; i < points; ++i) {
    const double x = x_min + (x_max - x_min) * i / (points - 1);
    const double g = gamma_limit(x, y, ctx);
    rows.push_back({x, g, std::min(x, ctx.strike) - ctx.kappa * g});
  }
  return rows;
}

double quantile_price(std::span<const double> terminal, double s0, double kappa, double K, double eps) {
  if (!(eps > 0.0 && eps < 1.0)) throw std::invalid_argument("quantile_price: eps must lie in (0, 1)");
  const std::size_t n = terminal.size();
  if (n == 0 || eps < 1.0 / static_cast<double>(n))
    throw std::invalid_argument("quantile_price: eps is below the sample resolution 1/N");
  std::vector<double> w(terminal.begin(), terminal.end());
  for (double& v : w) v = (1.0 - kappa) * std::min(v, K);
  // Upsilon(a) >= 1 - eps needs at least `need` samples strictly above (1 - a) S0.
  const auto need = static_cast<std::size_t>(std::ceil((1.0 - eps) * static_cast<double>(n) - 1e-9));
  if (need == 0) return 0.0;
  std::nth_element(w.begin(), w.begin() + static_cast<std::ptrdiff_t>(n - need), w.end());
  const double wk = w[n - need];  // need-th largest
  return std::clamp(1.0 - wk / s0, 0.0, 1.0);
}

SuperhedgeResult superhedge_rho(std::span<const std::pair<double, double>> states, const LimitContext& ctx,
                                const SuperhedgeSearch& search) {
  if (states.empty()) throw std::invalid_argument("superhedge_rho: no state samples");
  if (search.grid_points < 2 || !(search.lo_factor > 0.0) || !(search.hi_factor > search.lo_factor))
    throw std::invalid_argument("superhedge_rho: bad search grid");

  std::vector<double> grid(static_cast<std::size_t>(search.grid_points));
  const double lo = search.lo_factor * kSqrt8OverPi;
  const double ratio = search.hi_factor / search.lo_factor;
  for (std::size_t k = 0; k < grid.size(); ++k)
    grid[k] = lo * std::pow(ratio, static_cast<double>(k) / static_cast<double>(grid.size() - 1));

  SuperhedgeResult res;
  if (ctx.kappa == 0.0) {
    res.found = true;
    res.rho_star = grid.front();
    return res;
  }

  auto worst = [&](double rho, double* wx = nullptr, double* wy = nullptr) {
    LimitContext c = ctx;
    c.rho = rho;
    double m = std::numeric_limits<double>::infinity();
    for (const auto& [x, y] : states) {
      const double v = corrector(x, y, c);
      if (v < m) {
        m = v;
        if (wx) *wx = x;
        if (wy) *wy = y;
      }
    }
    return m;
  };

  std::vector<bool> feasible(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) feasible[k] = worst(grid[k]) >= 0.0;
  for (std::size_t k = 1; k < grid.size(); ++k)
    if (feasible[k - 1] && !feasible[k]) res.feasibility_monotone = false;

  const auto first = std::find(feasible.begin(), feasible.end(), true);
  if (first == feasible.end()) {
    res.worst_corrector = worst(grid.back(), &res.worst_x, &res.worst_y);
    return res;
  }
  res.found = true;
  res.grid_index = static_cast<std::size_t>(first - feasible.begin());
  res.rho_star = grid[res.grid_index];
  if (res.grid_index > 0) {
    double a = grid[res.grid_index - 1];  // infeasible
    double b = res.rho_star;              // feasible
    while ((b - a) > search.rel_tol * b) {
      const double mid = 0.5 * (a + b);
      (worst(mid) >= 0.0 ? b : a) = mid;
    }
    res.rho_star = b;
  }
  res.worst_corrector = worst(res.rho_star, &res.worst_x, &res.worst_y);
  return res;
}

double GridDiagnostics::max_ratio_deviation() const {
  double dev = 0.0;
  for (int j = std::max(m1, 1); j <= m2; ++j) {
    const auto ju = static_cast<std::size_t>(j);
    const double dt = t[ju] - t[ju - 1];
    dev = std::max(dev, std::abs(delta_lambda[ju - 1] / std::sqrt(dt) - rho) / rho);
  }
  return dev;
}

GridDiagnostics grid_diagnostics(int n, double mu, double rho) {
  if (n < 16) throw std::invalid_argument("grid_diagnostics: n must be >= 16");
  const VolSchedule sch = VolSchedule::simple(n, mu, rho);
  GridDiagnostics d;
  d.n = n;
  d.mu = mu;
  d.rho = rho;
  d.lambda0 = sch.lambda0();
  const auto nn = static_cast<std::size_t>(n);
  d.t.resize(nn + 1);
  d.lambda.resize(nn + 1);
  d.delta_lambda.resize(nn);
  for (std::size_t j = 0; j <= nn; ++j) {
    d.t[j] = (j == nn) ? 1.0 : 1.0 - std::pow(1.0 - double(j) / n, mu);
    d.lambda[j] = (j == nn) ? 0.0 : d.lambda0 * std::pow(1.0 - d.t[j], (mu + 1.0) / (2.0 * mu));
  }
  for (std::size_t j = 1; j <= nn; ++j) d.delta_lambda[j - 1] = d.lambda[j - 1] - d.lambda[j];

  const double ln = std::log(static_cast<double>(n));
  d.l_lower = 1.0 / (ln * ln * ln);
  d.l_upper = ln * ln * ln;
  const double ex = 2.0 / (mu + 1.0);
  auto index = [&](double l) {
    const double m = n - std::floor(n * std::pow(l / d.lambda0, ex));
    return static_cast<int>(std::clamp(m, 1.0, double(n)));
  };
  d.m1 = index(d.l_upper);
  d.m2 = index(d.l_lower);
  d.asymptotic_only = d.l_upper >= d.lambda0;
  return d;
}

}  // namespace jumphedge
