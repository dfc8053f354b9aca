#include "jumphedge/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>

#include "jumphedge/ensemble.hpp"

#ifndef JUMPHEDGE_GIT_DESCRIBE
#define JUMPHEDGE_GIT_DESCRIBE "unknown"
#endif

namespace jumphedge {

using nlohmann::json;

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

PathResult one_path(const ExperimentConfig& cfg, const HedgeConfig& hedge, const RevisionGrid& grid,
                    std::uint64_t stream) {
  const SimulatedPath path = simulate_path(cfg.model, grid.dates, cfg.substeps, cfg.master_seed, stream);
  const HedgeOutcome out = run_hedge(path, hedge);
  PathResult r;
  r.s1 = path.s_terminal();
  r.y1 = path.y_terminal();
  r.raw_error = out.raw_error;
  r.corrected_error = corrected_error(out, r.s1, r.y1, hedge, cfg.theorem, cfg.model.sigma);
  // corrected = raw - corrector for every theorem
  r.corrector = r.raw_error - r.corrected_error;
  r.gamma_n = out.gamma_n;
  r.resamples = path.resamples;
  return r;
}

void write_file(const std::string& path, const std::string& body) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error(path + ": cannot open for writing");
  f << body;
  f.close();
  if (!f) throw std::runtime_error(path + ": write failed");
}

std::string ensure_dir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw std::runtime_error(dir + ": cannot create output directory: " + ec.message());
  return dir;
}

}  // namespace

SampleStats sample_stats(std::span<const double> xs) {
  SampleStats s;
  const auto n = static_cast<double>(xs.size());
  if (xs.empty()) return s;
  double sum = 0.0;
  for (double x : xs) sum += x;
  s.mean = sum / n;
  double m2 = 0.0, m3 = 0.0;
  for (double x : xs) {
    const double d = x - s.mean;
    m2 += d * d;
    m3 += d * d * d;
  }
  s.sd = xs.size() > 1 ? std::sqrt(m2 / (n - 1.0)) : 0.0;
  m2 /= n;
  m3 /= n;
  s.skew = m2 > 0.0 ? m3 / std::pow(m2, 1.5) : 0.0;
  return s;
}

std::uint64_t stream_base_for(std::size_t index) { return static_cast<std::uint64_t>(index) << 32; }

std::vector<PathResult> run_paths(const ExperimentConfig& config, int n, std::uint64_t stream_base, int workers) {
  const HedgeConfig hedge = config.hedge.make(n, config.model);
  const RevisionGrid grid = make_revision_grid(n, config.hedge.mu);
  return parallel_map(config.n_paths, workers,
                      [&](std::size_t k) { return one_path(config, hedge, grid, stream_base + k); });
}

std::vector<PathResult> run_paths_serial(const ExperimentConfig& config, int n, std::uint64_t stream_base) {
  const HedgeConfig hedge = config.hedge.make(n, config.model);
  const RevisionGrid grid = make_revision_grid(n, config.hedge.mu);
  return serial_map(config.n_paths, [&](std::size_t k) { return one_path(config, hedge, grid, stream_base + k); });
}

ExperimentRow summarize_row(int n, std::uint64_t seed, std::span<const PathResult> paths) {
  std::vector<double> raw, cor, gam, crr;
  raw.reserve(paths.size());
  cor.reserve(paths.size());
  gam.reserve(paths.size());
  crr.reserve(paths.size());
  for (const auto& p : paths) {
    raw.push_back(p.raw_error);
    cor.push_back(p.corrected_error);
    gam.push_back(p.gamma_n);
    crr.push_back(p.corrector);
  }
  const SampleStats sr = sample_stats(raw);
  const SampleStats sc = sample_stats(cor);
  ExperimentRow row;
  row.n = n;
  row.paths = paths.size();
  row.mean_raw = sr.mean;
  row.std_raw = sr.sd;
  row.mean_corrected = sc.mean;
  row.std_corrected = sc.sd;
  row.stderr_corrected = sc.sd / std::sqrt(static_cast<double>(paths.size()));
  row.skew_corrected = sc.skew;
  row.mean_gamma_n = sample_stats(gam).mean;
  row.mean_corrector = sample_stats(crr).mean;
  row.seed = seed;
  return row;
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
  config.validate();
  ExperimentResult res;
  for (std::size_t i = 0; i < config.n_values.size(); ++i) {
    const int n = config.n_values[i];
    std::vector<PathResult> paths;
    try {
      paths = run_paths(config, n, stream_base_for(i), config.workers);
    } catch (const std::exception& e) {
      throw std::runtime_error("run_experiment (n=" + std::to_string(n) + "): " + e.what());
    }
    res.rows.push_back(summarize_row(n, config.master_seed, paths));
    std::vector<double> cor;
    cor.reserve(paths.size());
    for (const auto& p : paths) {
      cor.push_back(p.corrected_error);
      res.total_resamples += p.resamples;
    }
    res.corrected.push_back(std::move(cor));
  }
  const bool enough = res.rows.size() >= 4 && res.rows.back().n >= 10 * res.rows.front().n;
  if (enough) res.slope = convergence_slope(res, config.bootstrap_resamples, config.master_seed);
  return res;
}

std::pair<double, double> ols_fit(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size() || xs.size() < 2) throw std::invalid_argument("ols_fit: need >= 2 paired points");
  const auto n = static_cast<double>(xs.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
  }
  if (sxx == 0.0) throw std::invalid_argument("ols_fit: xs are all equal");
  const double slope = sxy / sxx;
  return {slope, my - slope * mx};
}

SlopeFit convergence_slope(const ExperimentResult& result, int resamples, std::uint64_t seed) {
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < result.rows.size(); ++i)
    if (result.rows[i].std_corrected > 0.0) keep.push_back(i);
  if (keep.size() < 4)
    throw std::invalid_argument("convergence_slope: " + std::to_string(keep.size()) +
                                " usable n values, need at least 4");
  const double span = double(result.rows[keep.back()].n) / double(result.rows[keep.front()].n);
  if (span < 10.0) throw std::invalid_argument("convergence_slope: n values must span at least a decade");

  std::vector<double> xs, ys;
  for (std::size_t i : keep) {
    xs.push_back(std::log(double(result.rows[i].n)));
    ys.push_back(std::log(result.rows[i].std_corrected));
  }
  SlopeFit fit;
  std::tie(fit.slope, fit.intercept) = ols_fit(xs, ys);
  fit.points = keep.size();
  fit.resamples = resamples;

  const bool have_paths = result.corrected.size() == result.rows.size();
  if (!have_paths || resamples < 1) {
    fit.ci_lo = fit.ci_hi = fit.slope;
    return fit;
  }
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  std::vector<double> slopes;
  slopes.reserve(static_cast<std::size_t>(resamples));
  std::vector<double> boot;
  for (int b = 0; b < resamples; ++b) {
    std::vector<double> by;
    by.reserve(keep.size());
    for (std::size_t i : keep) {
      const auto& src = result.corrected[i];
      std::uniform_int_distribution<std::size_t> pick(0, src.size() - 1);
      boot.resize(src.size());
      for (double& v : boot) v = src[pick(rng)];
      const double sd = sample_stats(boot).sd;
      by.push_back(std::log(std::max(sd, 1e-300)));
    }
    slopes.push_back(ols_fit(xs, by).first);
  }
  std::sort(slopes.begin(), slopes.end());
  auto pct = [&](double p) {
    const double pos = p * double(slopes.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, slopes.size() - 1);
    return slopes[lo] + (pos - double(lo)) * (slopes[hi] - slopes[lo]);
  };
  fit.ci_lo = pct(0.025);
  fit.ci_hi = pct(0.975);
  return fit;
}

std::string result_csv(const ExperimentResult& result) {
  std::ostringstream os;
  os << kResultCsvHeader << '\n';
  for (const auto& r : result.rows) {
    os << r.n << ',' << r.paths << ',' << num(r.mean_raw) << ',' << num(r.std_raw) << ',' << num(r.mean_corrected)
       << ',' << num(r.std_corrected) << ',' << num(r.stderr_corrected) << ',' << num(r.skew_corrected) << ','
       << num(r.mean_gamma_n) << ',' << num(r.mean_corrector) << ',' << r.seed << '\n';
  }
  return os.str();
}

std::string git_describe() { return JUMPHEDGE_GIT_DESCRIBE; }

json meta_block(const ExperimentConfig& config) {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return {{"config", to_json(config)}, {"git_describe", git_describe()}, {"timestamp", buf}};
}

json result_json(const ExperimentResult& result, const ExperimentConfig& config) {
  json rows = json::array();
  for (const auto& r : result.rows)
    rows.push_back({{"n", r.n},
                    {"paths", r.paths},
                    {"mean_raw", r.mean_raw},
                    {"std_raw", r.std_raw},
                    {"mean_corrected", r.mean_corrected},
                    {"std_corrected", r.std_corrected},
                    {"stderr_corrected", r.stderr_corrected},
                    {"skew_corrected", r.skew_corrected},
                    {"mean_gamma_n", r.mean_gamma_n},
                    {"mean_corrector", r.mean_corrector},
                    {"seed", r.seed}});
  json j = {{"meta", meta_block(config)}, {"rows", rows}, {"total_resamples", result.total_resamples}};
  if (result.slope) {
    const SlopeFit& s = *result.slope;
    j["slope"] = {{"slope", s.slope},   {"intercept", s.intercept}, {"ci_lo", s.ci_lo},
                  {"ci_hi", s.ci_hi},   {"points", s.points},       {"resamples", s.resamples}};
  } else {
    j["slope"] = nullptr;
  }
  return j;
}

ExperimentResult parse_result_json(const json& j) {
  ExperimentResult res;
  for (const auto& r : j.at("rows")) {
    ExperimentRow row;
    row.n = r.at("n").get<int>();
    row.paths = r.at("paths").get<std::size_t>();
    row.mean_raw = r.at("mean_raw").get<double>();
    row.std_raw = r.at("std_raw").get<double>();
    row.mean_corrected = r.at("mean_corrected").get<double>();
    row.std_corrected = r.at("std_corrected").get<double>();
    row.stderr_corrected = r.at("stderr_corrected").get<double>();
    row.skew_corrected = r.at("skew_corrected").get<double>();
    row.mean_gamma_n = r.at("mean_gamma_n").get<double>();
    row.mean_corrector = r.at("mean_corrector").get<double>();
    row.seed = r.at("seed").get<std::uint64_t>();
    res.rows.push_back(row);
  }
  res.total_resamples = j.value("total_resamples", std::uint64_t{0});
  if (j.contains("slope") && !j.at("slope").is_null()) {
    const json& s = j.at("slope");
    res.slope = SlopeFit{s.at("slope").get<double>(),        s.at("intercept").get<double>(),
                         s.at("ci_lo").get<double>(),        s.at("ci_hi").get<double>(),
                         s.at("points").get<std::size_t>(), s.at("resamples").get<int>()};
  }
  return res;
}

std::vector<std::string> emit_results(const ExperimentResult& result, const ExperimentConfig& config,
                                      const std::string& format, const std::string& dir, const std::string& stem) {
  ensure_dir(dir);
  const std::filesystem::path base(dir);
  std::vector<std::string> written;
  if (format == "csv") {
    const std::string p = (base / (stem + ".csv")).string();
    write_file(p, result_csv(result));
    written.push_back(p);
    if (result.slope) {
      const SlopeFit& s = *result.slope;
      const std::string sp = (base / (stem + "_slope.csv")).string();
      write_file(sp, "slope,intercept,ci_lo,ci_hi,points,resamples\n" + num(s.slope) + "," + num(s.intercept) + "," +
                         num(s.ci_lo) + "," + num(s.ci_hi) + "," + std::to_string(s.points) + "," +
                         std::to_string(s.resamples) + "\n");
      written.push_back(sp);
    }
  } else if (format == "json") {
    const std::string p = (base / (stem + ".json")).string();
    write_file(p, result_json(result, config).dump(2) + "\n");
    written.push_back(p);
  } else {
    throw std::invalid_argument("emit_results: format must be csv or json");
  }
  return written;
}

std::string table_csv(const Table& t) {
  std::ostringstream os;
  for (std::size_t c = 0; c < t.columns.size(); ++c) os << (c ? "," : "") << t.columns[c];
  os << '\n';
  for (const auto& r : t.rows) {
    if (r.size() != t.columns.size()) throw std::invalid_argument("table_csv: ragged row");
    for (std::size_t c = 0; c < r.size(); ++c) os << (c ? "," : "") << num(r[c]);
    os << '\n';
  }
  return os.str();
}

json table_json(const Table& t) {
  json rows = json::array();
  for (const auto& r : t.rows) {
    json o = json::object();
    for (std::size_t c = 0; c < t.columns.size(); ++c) o[t.columns[c]] = r.at(c);
    rows.push_back(o);
  }
  return {{"columns", t.columns}, {"rows", rows}};
}

std::string write_table(const Table& t, const std::string& format, const std::string& dir, const std::string& stem,
                        const json& meta) {
  ensure_dir(dir);
  const std::filesystem::path base(dir);
  if (format == "csv") {
    const std::string p = (base / (stem + ".csv")).string();
    write_file(p, table_csv(t));
    return p;
  }
  if (format == "json") {
    json j = table_json(t);
    if (!meta.is_null()) j["meta"] = meta;
    const std::string p = (base / (stem + ".json")).string();
    write_file(p, j.dump(2) + "\n");
    return p;
  }
  throw std::invalid_argument("write_table: format must be csv or json");
}

}  // namespace jumphedge
