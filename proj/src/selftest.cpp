#include "jumphedge/selftest.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "jumphedge/asymptotics.hpp"
#include "jumphedge/config.hpp"
#include "jumphedge/ensemble.hpp"
#include "jumphedge/experiment.hpp"
#include "jumphedge/hedging.hpp"
#include "jumphedge/pricing.hpp"

namespace jumphedge {

namespace {

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

CheckResult pde_residual() {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> lx(std::log(0.5), std::log(2.0)), ll(0.05, 4.0);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const double x = std::exp(lx(rng)), lam = ll(rng), h = 1e-4 * lam;
    // dC/dlambda = x^2 C_xx / 2
    const double dl = (call_price(lam + h, x, 1.0) - call_price(lam - h, x, 1.0)) / (2.0 * h);
    const double rhs = 0.5 * x * x * call_gamma(lam, x, 1.0);
    worst = std::max(worst, std::abs(dl - rhs) / std::max(std::abs(rhs), 1e-12));
  }
  return {"pricing: C_lambda = x^2 C_xx / 2", worst < 1e-6, "max rel residual " + fmt(worst)};
}

CheckResult g_identities() {
  double worst = std::abs(g_fn(0.0) - std::sqrt(2.0 / std::numbers::pi));
  bool in_range = true;
  for (double a = -6.0; a <= 6.0; a += 0.25) {
    worst = std::max(worst, std::abs(g_fn(a) - g_fn(-a)));
    const double l = lambda_fn(a);
    in_range = in_range && l > 0.0 && l < 1.0;
  }
  return {"asymptotics: G(0), G even, 0 < Lambda < 1", worst < 1e-12 && in_range, "max deviation " + fmt(worst)};
}

CheckResult gamma_normalization() {
  // x int lambda^{-1/2} phi_tilde dlambda = 2 min(x, K), and E|cZ + q| ~ c sqrt(2/pi) for large c
  double worst = 0.0;
  for (double x : {0.5, 1.0, 2.0}) {
    const double sigma = 1e4, rho = 1.0;
    const double g = gamma_limit(x, sigma, 1.0, rho);
    const double expect = sigma / rho * std::sqrt(2.0 / std::numbers::pi) * 2.0 * std::min(x, 1.0);
    worst = std::max(worst, std::abs(g - expect) / expect);
  }
  return {"asymptotics: Gamma ~ (sigma/rho) sqrt(2/pi) 2 min(x,K) for large sigma", worst < 1e-3,
          "max rel deviation " + fmt(worst)};
}

CheckResult martingale(int workers) {
  ExperimentConfig c = hull_white_jump_config(0.0);
  const RevisionGrid g = make_revision_grid(20, 1.0);
  const auto term = simulate_terminals(c.model, g.dates, 2, {4000, 11, workers, 0});
  std::vector<double> s1;
  for (const auto& t : term) s1.push_back(t.s1);
  const SampleStats st = sample_stats(s1);
  const double z = (st.mean - c.model.s0) / (st.sd / std::sqrt(double(s1.size())));
  return {"models: mean S1 = S0 (4000 paths)", std::abs(z) <= 3.0, "z = " + fmt(z)};
}

CheckResult determinism(int workers) {
  ExperimentConfig c = hull_white_jump_config(0.0);
  c.n_paths = 64;
  const auto a = run_paths(c, 16, 0, workers);
  const auto b = run_paths_serial(c, 16, 0);
  bool same = a.size() == b.size();
  for (std::size_t i = 0; same && i < a.size(); ++i)
    same = a[i].raw_error == b[i].raw_error && a[i].corrected_error == b[i].corrected_error && a[i].s1 == b[i].s1;
  return {"ensemble: parallel run equals serial run bit for bit", same, same ? "64 paths identical" : "mismatch"};
}

CheckResult ledger() {
  ExperimentConfig c = hull_white_jump_config(0.0);
  const RevisionGrid g = make_revision_grid(32, 1.0);
  const HedgeConfig h = c.hedge.make(32, c.model);
  double worst = 0.0;
  for (std::uint64_t k = 0; k < 20; ++k) {
    const SimulatedPath p = simulate_path(c.model, g.dates, 2, 3, k);
    const HedgeOutcome o = run_hedge(p, h);
    worst = std::max(worst, std::abs(replay_ledger(p, h, o) - o.v1));
  }
  return {"hedging: v1 equals the replayed trade ledger", worst <= 1e-12, "max |diff| " + fmt(worst)};
}

CheckResult quantile_monotone() {
  std::mt19937_64 rng(5);
  std::lognormal_distribution<double> ln(0.0, 0.3);
  std::vector<double> s(1000);
  for (double& v : s) v = ln(rng);
  double prev = 2.0;
  bool ok = true;
  for (double eps : {0.01, 0.02, 0.05, 0.1, 0.2, 0.5}) {
    const double d = quantile_price(s, 1.0, 0.01, 1.0, eps);
    ok = ok && d <= prev;
    prev = d;
  }
  return {"asymptotics: quantile price nonincreasing in eps", ok, ""};
}

}  // namespace

std::vector<CheckResult> run_selftest(int workers) {
  std::vector<CheckResult> out;
  auto guarded = [&](auto fn) {
    try {
      out.push_back(fn());
    } catch (const std::exception& e) {
      out.push_back({"exception", false, e.what()});
    }
  };
  guarded(pde_residual);
  guarded(g_identities);
  guarded(gamma_normalization);
  guarded([&] { return martingale(workers); });
  guarded([&] { return determinism(workers); });
  guarded(ledger);
  guarded(quantile_monotone);
  return out;
}

}  // namespace jumphedge
