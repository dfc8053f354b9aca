#pragma once

// Path-level parallelism. Every path k draws from its own substream
// (master_seed, stream_offset + k), so the output does not depend on the
// number of workers or on scheduling. The serial kernels are the reference
// the OpenMP ones are tested against.

#include <cstddef>
#include <cstdint>
#include <exception>
#include <span>
#include <type_traits>
#include <vector>

#include <omp.h>

#include "jumphedge/models.hpp"

namespace jumphedge {

struct EnsembleConfig {
  std::size_t n_paths = 1;
  std::uint64_t master_seed = 0;
  int workers = 0;  // <= 0: OpenMP default
  std::uint64_t stream_offset = 0;
};

/// results[k] = fn(k) for k in [0, n), one thread.
template <class Fn>
auto serial_map(std::size_t n, Fn&& fn) -> std::vector<std::invoke_result_t<Fn&, std::size_t>> {
  std::vector<std::invoke_result_t<Fn&, std::size_t>> out;
  out.reserve(n);
  for (std::size_t k = 0; k < n; ++k) out.push_back(fn(k));
  return out;
}

/// results[k] = fn(k) for k in [0, n) with an OpenMP worksharing loop. `fn`
/// must only touch state owned by index k. An exception thrown for some k is
/// rethrown after the loop (the one with the smallest k).
template <class Fn>
auto parallel_map(std::size_t n, int workers, Fn&& fn) -> std::vector<std::invoke_result_t<Fn&, std::size_t>> {
  using R = std::invoke_result_t<Fn&, std::size_t>;
  std::vector<R> out(n);
  std::vector<std::exception_ptr> errors(n);
  const int threads = workers > 0 ? workers : omp_get_max_threads();
  const auto count = static_cast<std::int64_t>(n);
#pragma omp parallel for schedule(dynamic, 4) num_threads(threads)
  for (std::int64_t k = 0; k < count; ++k) {
    const auto i = static_cast<std::size_t>(k);
    try {
      out[i] = fn(i);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

std::vector<SimulatedPath> simulate_ensemble(const ModelSpec& model, std::span<const double> revision_dates,
                                             int substeps, const EnsembleConfig& config);

std::vector<SimulatedPath> simulate_ensemble_serial(const ModelSpec& model, std::span<const double> revision_dates,
                                                    int substeps, const EnsembleConfig& config);

/// Terminal (S_1, y_1) only, without keeping the paths around.
struct TerminalState {
  double s1 = 0.0;
  double y1 = 0.0;
  std::size_t n_jumps = 0;
  double s_min = 0.0;
  double s_max = 0.0;
  std::uint32_t resamples = 0;
};

std::vector<TerminalState> simulate_terminals(const ModelSpec& model, std::span<const double> revision_dates,
                                              int substeps, const EnsembleConfig& config);

std::vector<TerminalState> simulate_terminals_serial(const ModelSpec& model, std::span<const double> revision_dates,
                                                     int substeps, const EnsembleConfig& config);

TerminalState summarize(const SimulatedPath& path);

}  // namespace jumphedge
