#include "jumphedge/ensemble.hpp"

#include <algorithm>
#include <stdexcept>

namespace jumphedge {

namespace {

void check(const ModelSpec& model, const EnsembleConfig& config) {
  if (config.n_paths < 1) throw std::invalid_argument("ensemble: n_paths must be >= 1");
  model.validate();
}

}  // namespace

TerminalState summarize(const SimulatedPath& path) {
  TerminalState out;
  out.s1 = path.s_terminal();
  out.y1 = path.y_terminal();
  out.n_jumps = path.jumps.size();
  const auto [lo, hi] = std::minmax_element(path.s_post.begin(), path.s_post.end());
  out.s_min = std::min(*lo, *std::min_element(path.s_pre.begin(), path.s_pre.end()));
  out.s_max = std::max(*hi, *std::max_element(path.s_pre.begin(), path.s_pre.end()));
  out.resamples = path.resamples;
  return out;
}

std::vector<SimulatedPath> simulate_ensemble(const ModelSpec& model, std::span<const double> revision_dates,
                                             int substeps, const EnsembleConfig& config) {
  check(model, config);
  return parallel_map(config.n_paths, config.workers, [&](std::size_t k) {
    return simulate_path(model, revision_dates, substeps, config.master_seed, config.stream_offset + k);
  });
}

std::vector<SimulatedPath> simulate_ensemble_serial(const ModelSpec& model, std::span<const double> revision_dates,
                                                    int substeps, const EnsembleConfig& config) {
  check(model, config);
  return serial_map(config.n_paths, [&](std::size_t k) {
    return simulate_path(model, revision_dates, substeps, config.master_seed, config.stream_offset + k);
  });
}

std::vector<TerminalState> simulate_terminals(const ModelSpec& model, std::span<const double> revision_dates,
                                              int substeps, const EnsembleConfig& config) {
  check(model, config);
  return parallel_map(config.n_paths, config.workers, [&](std::size_t k) {
    return summarize(simulate_path(model, revision_dates, substeps, config.master_seed, config.stream_offset + k));
  });
}

std::vector<TerminalState> simulate_terminals_serial(const ModelSpec& model, std::span<const double> revision_dates,
                                                     int substeps, const EnsembleConfig& config) {
  check(model, config);
  return serial_map(config.n_paths, [&](std::size_t k) {
    return summarize(simulate_path(model, revision_dates, substeps, config.master_seed, config.stream_offset + k));
  });
}

}  // namespace jumphedge
