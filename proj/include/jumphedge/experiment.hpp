#pragma once

// Monte Carlo sweeps over the revision count n: simulate, hedge, correct,
// summarize, fit the rate, write CSV/JSON.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "jumphedge/config.hpp"

namespace jumphedge {

/// Per-path quantities of one hedge run.
struct PathResult {
  double s1 = 0.0;
  double y1 = 0.0;
  double raw_error = 0.0;
  double corrected_error = 0.0;
  double gamma_n = 0.0;
  double corrector = 0.0;  // the limit the theorem subtracts, e.g. min(S1,K) - kappa Gamma
  std::uint32_t resamples = 0;
};

struct ExperimentRow {
  int n = 0;
  std::size_t paths = 0;
  double mean_raw = 0.0;
  double std_raw = 0.0;
  double mean_corrected = 0.0;
  double std_corrected = 0.0;
  double stderr_corrected = 0.0;
  double skew_corrected = 0.0;
  double mean_gamma_n = 0.0;
  double mean_corrector = 0.0;
  std::uint64_t seed = 0;

  bool operator==(const ExperimentRow&) const = default;
};

struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
  std::size_t points = 0;
  int resamples = 0;

  bool operator==(const SlopeFit&) const = default;
};

struct ExperimentResult {
  std::vector<ExperimentRow> rows;
  std::optional<SlopeFit> slope;
  /// corrected errors per row, path order; kept for the bootstrap
  std::vector<std::vector<double>> corrected;
  std::uint64_t total_resamples = 0;
};

struct SampleStats {
  double mean = 0.0;
  double sd = 0.0;  // n - 1 denominator
  double skew = 0.0;  // m3 / m2^{3/2}, population moments
};

SampleStats sample_stats(std::span<const double> xs);

/// One ensemble of n_paths hedges at revision count n. Path k of the
/// ensemble uses substream stream_base + k.
std::vector<PathResult> run_paths(const ExperimentConfig& config, int n, std::uint64_t stream_base, int workers);
std::vector<PathResult> run_paths_serial(const ExperimentConfig& config, int n, std::uint64_t stream_base);

ExperimentRow summarize_row(int n, std::uint64_t seed, std::span<const PathResult> paths);

/// Substream base of the ensemble for the i-th entry of n_values.
std::uint64_t stream_base_for(std::size_t index);

/// Independent ensemble for every n. Fits the slope when at least four n
/// values spanning a decade are present.
ExperimentResult run_experiment(const ExperimentConfig& config);

/// Least squares slope and intercept of ys on xs.
std::pair<double, double> ols_fit(std::span<const double> xs, std::span<const double> ys);

/// OLS of log std(corrected) on log n, with a percentile CI from a
/// path-level bootstrap. Points with nonpositive std are dropped. Throws if
/// fewer than four points remain or they span less than a decade.
SlopeFit convergence_slope(const ExperimentResult& result, int resamples, std::uint64_t seed);

inline constexpr const char* kResultCsvHeader =
    "n,paths,mean_raw,std_raw,mean_corrected,std_corrected,stderr_corrected,skew_corrected,mean_gamma_n,"
    "mean_corrector,seed";

std::string result_csv(const ExperimentResult& result);
nlohmann::json result_json(const ExperimentResult& result, const ExperimentConfig& config);
/// Rows and slope back from result_json output.
ExperimentResult parse_result_json(const nlohmann::json& j);

/// Writes <dir>/<stem>.csv (plus <stem>_slope.csv when a slope exists) or
/// <dir>/<stem>.json. Returns the paths written.
std::vector<std::string> emit_results(const ExperimentResult& result, const ExperimentConfig& config,
                                      const std::string& format, const std::string& dir, const std::string& stem);

/// Generic table writer used by the CLI for the other subcommands.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

std::string table_csv(const Table& t);
nlohmann::json table_json(const Table& t);
std::string write_table(const Table& t, const std::string& format, const std::string& dir, const std::string& stem,
                        const nlohmann::json& meta = nullptr);

/// Metadata block: config echo, git describe, UTC timestamp.
nlohmann::json meta_block(const ExperimentConfig& config);
std::string git_describe();

}  // namespace jumphedge
