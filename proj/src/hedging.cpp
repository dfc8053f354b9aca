#include "jumphedge/hedging.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "jumphedge/asymptotics.hpp"

namespace jumphedge {

namespace {

constexpr double kDateTol = 1e-12;

void check_grid(const SimulatedPath& path, const VolSchedule& schedule) {
  const std::size_t n = static_cast<std::size_t>(schedule.n());
  if (path.revision_index.size() != n + 1)
    throw std::invalid_argument("run_hedge: path has " + std::to_string(path.revision_index.size()) +
                                " revision dates, schedule expects " + std::to_string(n + 1));
  const RevisionGrid grid = make_revision_grid(schedule.n(), schedule.mu());
  for (std::size_t i = 0; i <= n; ++i)
    if (std::abs(path.times[path.revision_index[i]] - grid.dates[i]) > kDateTol)
      throw std::invalid_argument("run_hedge: path revision dates do not match the schedule grid");
}

}  // namespace

RevisionGrid make_revision_grid(int n, double mu) {
  if (n < 1) throw std::invalid_argument("make_revision_grid: n must be >= 1");
  if (!(mu >= 1.0 && mu <= 2.0)) throw std::invalid_argument("make_revision_grid: mu must lie in [1, 2]");
  RevisionGrid g{n, mu, {}};
  g.dates.resize(static_cast<std::size_t>(n) + 1);
  g.dates.front() = 0.0;
  g.dates.back() = 1.0;
  for (int i = 1; i < n; ++i) g.dates[static_cast<std::size_t>(i)] = 1.0 - std::pow(1.0 - double(i) / n, mu);
  return g;
}

std::string to_string(Strategy s) {
  switch (s) {
    case Strategy::Leland: return "leland";
    case Strategy::Lepinette: return "lepinette";
    case Strategy::PlainDelta: return "plain_delta";
  }
  return "?";
}

std::string to_string(Theorem t) {
  switch (t) {
    case Theorem::SVJP: return "svjp";
    case Theorem::Lepinette: return "lepinette";
    case Theorem::ConstVol: return "constvol";
    case Theorem::Raw: return "raw";
  }
  return "?";
}

void HedgeConfig::validate() const {
  if (!(kappa >= 0.0 && kappa < 1.0)) throw std::invalid_argument("hedge: kappa must lie in [0, 1)");
  if (!(strike > 0.0)) throw std::invalid_argument("hedge: strike must be positive");
  if (strategy == Strategy::PlainDelta && !true_vol)
    throw std::invalid_argument("hedge: plain delta needs the model volatility function");
}

double leland_position(const VolSchedule& schedule, double t_prev, double s_left, double K) {
  return call_delta(schedule.lambda_at(t_prev), s_left, K);
}

double lepinette_position(const VolSchedule& schedule, double t_prev, double s_left, double K,
                          double accumulated_correction) {
  return leland_position(schedule, t_prev, s_left, K) - accumulated_correction;
}

std::vector<double> lepinette_corrections(const SimulatedPath& path, const VolSchedule& schedule, double K) {
  const std::size_t n = static_cast<std::size_t>(schedule.n());
  std::vector<double> corr(n + 1, 0.0);
  double acc = 0.0;
  for (std::size_t i = 1; i < n; ++i) {
    const int refine = (i == n - 1) ? 4 : 1;
    for (std::size_t k = path.revision_index[i - 1]; k < path.revision_index[i]; ++k) {
      const double t = path.times[k];
      const double h = (path.times[k + 1] - t) / refine;
      const double s = path.s_post[k];
      for (int m = 0; m < refine; ++m) acc += theta_cross(schedule, t + (m + 0.5) * h, s, K) * h;
    }
    corr[i] = acc;
  }
  if (n >= 1) corr[n] = corr[n - 1];
  return corr;
}

HedgeOutcome run_hedge(const SimulatedPath& path, const HedgeConfig& config) {
  config.validate();
  const VolSchedule& sch = config.schedule;
  check_grid(path, sch);
  const std::size_t n = static_cast<std::size_t>(sch.n());
  const double K = config.strike;

  std::vector<double> corr;
  if (config.strategy == Strategy::Lepinette) corr = lepinette_corrections(path, sch, K);

  HedgeOutcome out;
  out.positions.resize(n + 1);
  for (std::size_t i = 0; i <= n; ++i) {
    const std::size_t r = path.revision_index[i];
    const double t = path.times[r];
    const double s_left = path.s_pre[r];
    double g = 0.0;
    switch (config.strategy) {
      case Strategy::Leland:
        g = i < n ? leland_position(sch, t, s_left, K) : call_delta(0.0, s_left, K);
        break;
      case Strategy::Lepinette:
        g = i < n ? lepinette_position(sch, t, s_left, K, corr[i]) : call_delta(0.0, s_left, K) - corr[i];
        break;
      case Strategy::PlainDelta: {
        const double sig = vol_at(*config.true_vol, path.y_pre[r]);
        g = call_delta(sig * sig * (1.0 - t), s_left, K);
        break;
      }
    }
    out.positions[i] = g;
  }

  const double s0 = path.s_post[path.revision_index[0]];
  if (config.strategy == Strategy::PlainDelta) {
    const double sig0 = vol_at(*config.true_vol, path.y_post[path.revision_index[0]]);
    out.v0 = call_price(sig0 * sig0, s0, K);
  } else {
    out.v0 = call_price(sch.lambda_at(0.0), s0, K);
  }

  double gains = 0.0;
  double volume = 0.0;
  for (std::size_t i = 1; i <= n; ++i) {
    const double s_now = path.s_post[path.revision_index[i]];
    const double s_prev = path.s_post[path.revision_index[i - 1]];
    gains += out.positions[i - 1] * (s_now - s_prev);
    const double trade = std::abs(out.positions[i] - out.positions[i - 1]);
    volume += s_now * trade;
    if (trade > 0.0) ++out.n_trades;
  }
  out.gamma_n = volume;
  out.total_cost = config.kappa * volume;
  if (config.charge_initial_trade) {
    out.total_cost += config.kappa * s0 * std::abs(out.positions[0]);
    if (out.positions[0] != 0.0) ++out.n_trades;
  }

  const double s1 = path.s_terminal();
  out.payoff = std::max(s1 - K, 0.0);
  out.v1 = out.v0 + gains - out.total_cost;
  out.raw_error = out.v1 - out.payoff;
  return out;
}

double replay_ledger(const SimulatedPath& path, const HedgeConfig& config, const HedgeOutcome& outcome) {
  const std::size_t n = outcome.positions.size() - 1;
  double cash = outcome.v0;
  double held = 0.0;
  auto trade_to = [&](double target, double price, bool charged) {
    const double qty = target - held;
    cash -= qty * price;
    if (charged) cash -= config.kappa * price * std::abs(qty);
    held = target;
  };
  trade_to(outcome.positions[0], path.s_post[path.revision_index[0]], config.charge_initial_trade);
  for (std::size_t i = 1; i <= n; ++i) trade_to(outcome.positions[i], path.s_post[path.revision_index[i]], true);
  return cash + held * path.s_terminal();
}

double corrected_error(const HedgeOutcome& outcome, double s1, double y1, const HedgeConfig& config, Theorem theorem,
                       const VolFunction& sigma) {
  const double K = config.strike;
  const double rho = config.schedule.rho();
  const double sig1 = vol_at(sigma, y1);
  const bool leland = config.strategy == Strategy::Leland;
  const bool lepinette = config.strategy == Strategy::Lepinette;

  auto leland_form = [&] { return outcome.raw_error - std::min(s1, K) + config.kappa * gamma_limit(s1, sig1, K, rho); };
  auto lepinette_form = [&] {
    const double eta = 1.0 - config.kappa * sig1 / rho * std::sqrt(8.0 / std::numbers::pi);
    return outcome.raw_error - eta * std::min(s1, K);
  };

  switch (theorem) {
    case Theorem::SVJP:
      if (!leland) throw std::invalid_argument("corrected_error: the SVJP corrector applies to the Leland strategy");
      return leland_form();
    case Theorem::Lepinette:
      if (!lepinette)
        throw std::invalid_argument("corrected_error: the Lepinette corrector applies to the Lepinette strategy");
      return lepinette_form();
    case Theorem::ConstVol:
      if (!is_constant(sigma)) throw std::invalid_argument("corrected_error: ConstVol needs a constant volatility");
      if (leland) return leland_form();
      if (lepinette) return lepinette_form();
      throw std::invalid_argument("corrected_error: ConstVol applies to Leland or Lepinette");
    case Theorem::Raw:
      return outcome.raw_error;
  }
  throw std::invalid_argument("corrected_error: unknown theorem");
}

double jump_term(double lambda, double x, double z, double K) {
  const double up = x * (1.0 + z);
  return call_price(lambda, up, K) - call_price(lambda, x, K) - z * x * call_delta(lambda, x, K);
}

ErrorDecomposition error_decomposition(const SimulatedPath& path, const HedgeConfig& config, int min_substeps) {
  if (config.strategy == Strategy::PlainDelta)
    throw std::invalid_argument("error_decomposition: needs an enlarged-volatility strategy");
  const HedgeOutcome outcome = run_hedge(path, config);
  const VolSchedule& sch = config.schedule;
  const double K = config.strike;
  const std::size_t n = static_cast<std::size_t>(sch.n());
  for (std::size_t i = 1; i <= n; ++i)
    if (path.revision_index[i] - path.revision_index[i - 1] < static_cast<std::size_t>(min_substeps))
      throw std::invalid_argument("error_decomposition: fewer than " + std::to_string(min_substeps) +
                                  " substeps in a revision interval");

  ErrorDecomposition d;
  d.gamma_n = outcome.gamma_n;
  d.raw_error = outcome.raw_error;

  std::size_t interval = 0;  // position held on (t_k, t_{k+1}] was set at revision `interval`
  const std::size_t last = path.times.size() - 1;
  double lam = sch.lambda_at(path.times[0]);
  for (std::size_t k = 0; k < last; ++k) {
    while (interval + 1 < n && path.revision_index[interval + 1] <= k) ++interval;
    const double held = outcome.positions[interval];
    const double lam_next = sch.lambda_at(path.times[k + 1]);
    const double s = path.s_post[k];
    const double ds = path.s_pre[k + 1] - s;
    const double gam = call_gamma(lam, s, K);
    d.i1 += gam * (s * s * (lam - lam_next) - ds * ds);
    d.i2 += (held - call_delta(lam, s, K)) * ds;

    const std::size_t j = k + 1;
    if (path.s_post[j] != path.s_pre[j]) {
      const double x = path.s_pre[j];
      const double z = path.s_post[j] / x - 1.0;
      d.i2 += (held - call_delta(lam_next, x, K)) * (path.s_post[j] - x);
      d.i3 += jump_term(lam_next, x, z, K);
    }
    lam = lam_next;
  }
  d.residual = d.raw_error - (0.5 * d.i1 + d.i2 - d.i3 - config.kappa * d.gamma_n);
  return d;
}

}  // namespace jumphedge
