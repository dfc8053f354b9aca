#pragma once

// Jump-diffusion stochastic-volatility dynamics
//
//   dS_t = S_{t-} ( b dt + sigma(y_t) dW1_t + d zeta_t )
//   dy_t = alpha1(y_t) dt + alpha2(y_t) dW2_t + d zeta^y_t
//
// with compound Poisson jump parts. The price drift b is always the
// martingale compensator -sum(theta * E xi) of the price-jump channels.

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace jumphedge {

using Engine = std::mt19937_64;

/// Deterministic substream for path `stream` of an ensemble seeded with
/// `master_seed`. `attempt` > 0 gives the fresh substreams used when a path
/// has to be resampled.
Engine make_engine(std::uint64_t master_seed, std::uint64_t stream, std::uint64_t attempt = 0);

// ---------------------------------------------------------------------------
// Jump sizes
// ---------------------------------------------------------------------------

struct NormalJump {
  double mean = 0.0;
  double sd = 0.0;
};

/// 1 + xi = exp(Z), Z ~ N(mean, sd^2).
struct LogNormalFactorJump {
  double mean = 0.0;
  double sd = 0.0;
};

struct PointMassJump {
  double value = 0.0;
};

struct UniformJump {
  double lo = 0.0;
  double hi = 0.0;
};

using JumpSizeDist = std::variant<NormalJump, LogNormalFactorJump, PointMassJump, UniformJump>;

enum class JumpTarget { Price, Volatility, Both };

struct JumpChannel {
  double intensity = 0.0;
  JumpSizeDist size = PointMassJump{0.0};
  JumpTarget applies_to = JumpTarget::Price;

  bool hits_price() const noexcept { return applies_to != JumpTarget::Volatility; }
  bool hits_volatility() const noexcept { return applies_to != JumpTarget::Price; }
};

/// Maximum admissible P(xi <= -1) for a price channel. Sizes at or below -1
/// are rejection-resampled.
inline constexpr double kMaxPriceJumpRejection = 1e-3;

/// Mean of the distribution as specified (no truncation).
double jump_mean(const JumpSizeDist& dist);

/// Second moment E xi^2 as specified (no truncation).
double jump_second_moment(const JumpSizeDist& dist);

/// P(xi <= -1).
double prob_at_or_below_minus_one(const JumpSizeDist& dist);

/// Mean of the law actually sampled for a price channel, i.e. conditioned on
/// xi > -1.
double price_jump_mean(const JumpSizeDist& dist);

/// Integrability requirements on the price-jump law: finite E xi^2 and finite
/// E (1+xi)^{-1}. A normal law truncated at -1 keeps positive density at -1,
/// so the inverse moment is (logarithmically) infinite even though the
/// truncated mass is tiny.
struct MomentConditions {
  bool finite_second_moment = true;
  bool finite_inverse_moment = true;
  bool satisfied() const noexcept { return finite_second_moment && finite_inverse_moment; }
};
MomentConditions moment_conditions(const JumpSizeDist& dist);

/// Draws one jump size. With `price_constrained` the draw is repeated until
/// xi > -1; the number of rejected draws is added to `rejections`.
double sample_jump_size(const JumpSizeDist& dist, Engine& engine, bool price_constrained,
                        std::uint64_t& rejections);

/// Constant drift b = -theta * E xi making S a local martingale with respect
/// to this channel. Throws if the channel does not act on the price.
double drift_compensator(const JumpChannel& channel);

/// Sorted homogeneous-Poisson arrival times in (0, horizon).
std::vector<double> sample_jump_times(double intensity, double horizon, Engine& engine);

// ---------------------------------------------------------------------------
// Volatility
// ---------------------------------------------------------------------------

/// sigma(y) = scale * exp(y) + floor
struct ExponentialVol {
  double scale = 1.0;
  double floor = 0.0;
};

/// sigma(y) = sqrt(max(y, floor))
struct SqrtVol {
  double floor = 1e-4;
};

struct ConstantVol {
  double sigma = 0.2;
};

using VolFunction = std::variant<ExponentialVol, SqrtVol, ConstantVol>;

double vol_at(const VolFunction& fn, double y) noexcept;
double vol_lower_bound(const VolFunction& fn) noexcept;
bool is_constant(const VolFunction& fn) noexcept;

/// dy = (a - y) dt + b dW
struct OrnsteinUhlenbeck {
  double a = 0.0;
  double b = 0.0;
};

/// dy = a (m - y) dt + b sqrt(y+) dW, full truncation inside the root.
struct CoxIngersollRoss {
  double a = 0.0;
  double m = 0.0;
  double b = 0.0;
};

struct FrozenVolatility {};

using VolDynamics = std::variant<OrnsteinUhlenbeck, CoxIngersollRoss, FrozenVolatility>;

double vol_drift(const VolDynamics& dyn, double t, double y) noexcept;
double vol_diffusion(const VolDynamics& dyn, double t, double y) noexcept;

// ---------------------------------------------------------------------------
// Model
// ---------------------------------------------------------------------------

enum class ModelClass { SV, SVJV, SVJP, SVCJ, SVJJ };

std::string to_string(ModelClass c);

struct ModelSpec {
  double s0 = 1.0;
  VolFunction sigma = ConstantVol{};
  VolDynamics vol_sde = FrozenVolatility{};
  std::vector<JumpChannel> jumps;
  double brownian_corr = 0.0;
  double y0 = 0.0;

  /// Throws std::invalid_argument describing the first violated requirement.
  void validate() const;

  /// Martingale drift of S: -sum over price channels of theta * E xi.
  double price_drift() const;

  ModelClass classify() const noexcept;
};

// ---------------------------------------------------------------------------
// Paths
// ---------------------------------------------------------------------------

struct JumpEvent {
  double time = 0.0;
  std::size_t channel = 0;
  double size = 0.0;
};

/// Randomness of one path on a fixed merged grid. dw1/dw2 hold the Brownian
/// increments over [times[k], times[k+1]]; dw2 is already correlated with dw1.
struct PathNoise {
  std::vector<double> times;
  std::vector<double> dw1;
  std::vector<double> dw2;
  std::vector<JumpEvent> jumps;  // sorted by time, every time is on the grid
  std::uint64_t rejected_jump_draws = 0;
};

struct JumpMark {
  std::size_t index = 0;
  std::size_t channel = 0;
  double size = 0.0;
};

struct SimulatedPath {
  std::vector<double> times;
  std::vector<double> s_pre;   // S_{t-}
  std::vector<double> s_post;  // S_t
  std::vector<double> y_pre;
  std::vector<double> y_post;
  std::vector<JumpMark> jumps;
  std::vector<std::size_t> revision_index;  // index of each revision date in `times`
  std::uint32_t resamples = 0;
  std::uint64_t rejected_jump_draws = 0;

  double s_terminal() const { return s_post.back(); }
  double y_terminal() const { return y_post.back(); }
  bool finite() const noexcept;
};

/// Revision dates refined by `substeps` uniform substeps per interval.
std::vector<double> refine_grid(std::span<const double> revision_dates, int substeps);

/// Draws jumps and Brownian increments on revision dates + substeps + jump times.
PathNoise draw_noise(const ModelSpec& model, std::span<const double> revision_dates, int substeps,
                     Engine& engine);

/// Keeps the grid points listed in `keep` (plus every jump time) and merges
/// the Brownian increments in between. Used for coupled refinement.
PathNoise coarsen(const PathNoise& fine, std::span<const double> keep);

/// Advances (S, y) along the noise: log-Euler for S with sigma frozen at the
/// left end of each step, Euler-Maruyama for y, multiplicative price jumps
/// and additive volatility jumps at their grid points.
SimulatedPath integrate_path(const ModelSpec& model, const PathNoise& noise,
                             std::span<const double> revision_dates);

/// Draw + integrate. A path with non-finite or non-positive state is redrawn
/// from a fresh substream; `resamples` counts those redraws.
SimulatedPath simulate_path(const ModelSpec& model, std::span<const double> revision_dates,
                            int substeps, std::uint64_t master_seed, std::uint64_t stream);

}  // namespace jumphedge
