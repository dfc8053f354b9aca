#include <cstdint>
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "jumphedge/asymptotics.hpp"
#include "jumphedge/config.hpp"
#include "jumphedge/ensemble.hpp"
#include "jumphedge/experiment.hpp"
#include "jumphedge/hedging.hpp"
#include "jumphedge/selftest.hpp"

using namespace jumphedge;

namespace {

struct Globals {
  std::string config_path;
  std::string preset = "hull-white";
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> paths;
  std::optional<std::string> out;
  std::optional<int> workers;
  std::optional<std::string> format;
};

ExperimentConfig resolve(const Globals& g) {
  ExperimentConfig c;
  if (!g.config_path.empty())
    c = load_config(g.config_path);
  else if (g.preset == "hull-white")
    c = hull_white_jump_config(0.0);
  else if (g.preset == "const-vol")
    c = const_vol_jump_config();
  else
    throw ConfigError("--preset: expected hull-white or const-vol");
  if (g.seed) c.master_seed = *g.seed;
  if (g.paths) c.n_paths = *g.paths;
  if (g.out) c.output.dir = *g.out;
  if (g.workers) c.workers = *g.workers;
  if (g.format) c.output.format = *g.format;
  c.validate();
  return c;
}

std::vector<double> grid_dates(const ExperimentConfig& c, int n) { return make_revision_grid(n, c.hedge.mu).dates; }

void report(const std::string& path) { std::cout << "wrote " << path << '\n'; }

int cmd_simulate(const ExperimentConfig& c, int n, int trace) {
  const auto dates = grid_dates(c, n);
  const auto paths = simulate_ensemble(c.model, dates, c.substeps, {c.n_paths, c.master_seed, c.workers, 0});
  Table summary{{"path", "s1", "y1", "n_jumps", "s_min", "s_max", "resamples"}, {}};
  Table traces{{"path", "t", "s_pre", "s_post", "y"}, {}};
  for (std::size_t k = 0; k < paths.size(); ++k) {
    const TerminalState t = summarize(paths[k]);
    summary.rows.push_back({double(k), t.s1, t.y1, double(t.n_jumps), t.s_min, t.s_max, double(t.resamples)});
    if (static_cast<int>(k) < trace)
      for (std::size_t i = 0; i < paths[k].times.size(); ++i)
        traces.rows.push_back({double(k), paths[k].times[i], paths[k].s_pre[i], paths[k].s_post[i], paths[k].y_post[i]});
  }
  const auto meta = meta_block(c);
  report(write_table(summary, c.output.format, c.output.dir, "simulate", meta));
  if (trace > 0) report(write_table(traces, c.output.format, c.output.dir, "simulate_trace", meta));
  return 0;
}

int cmd_hedge(ExperimentConfig c, int n) {
  c.n_values = {n};
  const ExperimentResult r = run_experiment(c);
  for (const auto& p : emit_results(r, c, c.output.format, c.output.dir, "hedge")) report(p);
  const auto& row = r.rows.front();
  std::printf("n=%d paths=%zu mean_corrected=%.6g stderr=%.3g mean_corrector=%.6g\n", row.n, row.paths,
              row.mean_corrected, row.stderr_corrected, row.mean_corrector);
  return 0;
}

int cmd_converge(ExperimentConfig c, const std::vector<int>& n_values) {
  if (!n_values.empty()) c.n_values = n_values;
  c.validate();
  const ExperimentResult r = run_experiment(c);
  for (const auto& p : emit_results(r, c, c.output.format, c.output.dir, "converge")) report(p);
  if (r.slope)
    std::printf("slope %.4f  95%% CI [%.4f, %.4f]  (%zu points, %d resamples)\n", r.slope->slope, r.slope->ci_lo,
                r.slope->ci_hi, r.slope->points, r.slope->resamples);
  else
    std::printf("slope not fitted: need >= 4 n values spanning a decade\n");
  return 0;
}

int cmd_gamma_table(const ExperimentConfig& c) {
  const auto& g = c.gamma_table;
  const auto rows = gamma_table(c.limit_context(), g.y, g.x_min, g.x_max, g.points);
  Table t{{"x", "gamma", "corrector"}, {}};
  for (const auto& r : rows) t.rows.push_back({r.x, r.gamma, r.corrector});
  report(write_table(t, c.output.format, c.output.dir, "gamma_table", meta_block(c)));
  return 0;
}

std::vector<TerminalState> terminals(const ExperimentConfig& c, int n) {
  return simulate_terminals(c.model, grid_dates(c, n), c.substeps, {c.n_paths, c.master_seed, c.workers, 0});
}

int cmd_quantile(const ExperimentConfig& c, int n) {
  std::vector<double> s1;
  for (const auto& t : terminals(c, n)) s1.push_back(t.s1);
  Table t{{"eps", "delta"}, {}};
  for (double eps : c.quantile.eps)
    t.rows.push_back({eps, quantile_price(s1, c.model.s0, c.hedge.kappa, c.hedge.strike, eps)});
  report(write_table(t, c.output.format, c.output.dir, "quantile", meta_block(c)));
  return 0;
}

int cmd_superhedge(const ExperimentConfig& c, int n) {
  std::vector<std::pair<double, double>> states;
  for (const auto& t : terminals(c, n)) states.emplace_back(t.s1, t.y1);
  const SuperhedgeResult r = superhedge_rho(states, c.limit_context(), c.superhedge);
  Table t{{"found", "rho_star", "grid_index", "feasibility_monotone", "worst_x", "worst_y", "worst_corrector"},
          {{double(r.found), r.rho_star, double(r.grid_index), double(r.feasibility_monotone), r.worst_x, r.worst_y,
            r.worst_corrector}}};
  report(write_table(t, c.output.format, c.output.dir, "superhedge", meta_block(c)));
  if (r.found)
    std::printf("rho* = %.6g\n", r.rho_star);
  else
    std::printf("no feasible rho on the search grid; worst corrector %.6g at x=%.6g y=%.6g\n", r.worst_corrector,
                r.worst_x, r.worst_y);
  if (r.found && r.grid_index == 0 && c.hedge.kappa > 0.0)
    std::printf("warning: the lowest grid point is already feasible, lower superhedge.lo_factor\n");
  if (!r.feasibility_monotone) std::printf("warning: feasibility is not monotone along the rho grid\n");
  return 0;
}

int cmd_grid(const ExperimentConfig& c, int n, const std::vector<double>& mus) {
  Table t{{"mu", "j", "t", "lambda"}, {}};
  for (double mu : mus) {
    const RevisionGrid g = make_revision_grid(n, mu);
    const VolSchedule s = VolSchedule::simple(n, mu, c.hedge.resolved_rho(c.model));
    for (std::size_t j = 0; j < g.dates.size(); ++j) t.rows.push_back({mu, double(j), g.dates[j], s.lambda_at(g.dates[j])});
  }
  report(write_table(t, c.output.format, c.output.dir, "grid", meta_block(c)));
  return 0;
}

int cmd_selftest(int workers) {
  bool ok = true;
  for (const auto& r : run_selftest(workers)) {
    std::printf("%s  %s  %s\n", r.passed ? "PASS" : "FAIL", r.name.c_str(), r.detail.c_str());
    ok = ok && r.passed;
  }
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Monte Carlo hedging of calls under jump-diffusion stochastic volatility with transaction costs"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--config", g.config_path, "JSON config file (see docs/config.md)")->check(CLI::ExistingFile);
  app.add_option("--preset", g.preset, "built-in config when --config is absent")
      ->check(CLI::IsMember({"hull-white", "const-vol"}));
  app.add_option("--seed", g.seed, "master seed");
  app.add_option("--paths", g.paths, "paths per ensemble");
  app.add_option("--out", g.out, "output directory");
  app.add_option("--workers", g.workers, "OpenMP threads (0: default)");
  app.add_option("--format", g.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));

  int n = 0;
  int trace = 0;
  std::vector<int> n_values;
  std::vector<double> mus{1.0, 1.5, 1.9};

  auto* sim = app.add_subcommand("simulate", "simulate an ensemble and emit path summaries");
  sim->add_option("--n", n, "revision count of the grid (default: first n_values)");
  sim->add_option("--trace", trace, "also dump the full grid of the first k paths");
  auto* hedge = app.add_subcommand("hedge", "hedge one ensemble at one n");
  hedge->add_option("--n", n, "revision count (default: first n_values)");
  auto* conv = app.add_subcommand("converge", "sweep n, fit the rate of std(corrected error)");
  conv->add_option("--n-values", n_values, "override n_values");
  app.add_subcommand("gamma-table", "Gamma and corrector over a strike-relative spot range");
  auto* quant = app.add_subcommand("quantile", "quantile price for each eps of the config");
  quant->add_option("--n", n, "revision grid used for simulation (default: first n_values)");
  auto* sup = app.add_subcommand("superhedge", "smallest rho with a nonnegative corrector on the sample");
  sup->add_option("--n", n, "revision grid used for simulation (default: first n_values)");
  app.add_subcommand("selftest", "run the invariant suite");
  auto* grid = app.add_subcommand("grid", "revision dates and lambda clock for several mu");
  grid->add_option("--n", n, "revision count (default 30)");
  grid->add_option("--mu", mus, "mu values");

  for (auto* sc : app.get_subcommands({})) sc->fallthrough();

  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand("selftest")) return cmd_selftest(g.workers.value_or(0));
    const ExperimentConfig c = resolve(g);
    const int n_or_first = n > 0 ? n : c.n_values.front();
    if (app.got_subcommand("simulate")) return cmd_simulate(c, n_or_first, trace);
    if (app.got_subcommand("hedge")) return cmd_hedge(c, n_or_first);
    if (app.got_subcommand("converge")) return cmd_converge(c, n_values);
    if (app.got_subcommand("gamma-table")) return cmd_gamma_table(c);
    if (app.got_subcommand("quantile")) return cmd_quantile(c, n_or_first);
    if (app.got_subcommand("superhedge")) return cmd_superhedge(c, n_or_first);
    if (app.got_subcommand("grid")) return cmd_grid(c, n > 0 ? n : 30, mus);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
