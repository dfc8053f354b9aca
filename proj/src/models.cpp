#include "jumphedge/models.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "jumphedge/normal.hpp"

namespace jumphedge {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

constexpr double kGridTol = 1e-14;

bool same_time(double a, double b) noexcept { return std::abs(a - b) <= kGridTol; }

// Index of `t` in the sorted grid, or npos.
std::size_t find_time(std::span<const double> grid, double t) {
  auto it = std::lower_bound(grid.begin(), grid.end(), t - kGridTol);
  if (it != grid.end() && same_time(*it, t)) return static_cast<std::size_t>(it - grid.begin());
  return std::numeric_limits<std::size_t>::max();
}

}  // namespace

Engine make_engine(std::uint64_t master_seed, std::uint64_t stream, std::uint64_t attempt) {
  auto lo = [](std::uint64_t v) { return static_cast<std::uint32_t>(v & 0xffffffffu); };
  auto hi = [](std::uint64_t v) { return static_cast<std::uint32_t>(v >> 32); };
  std::seed_seq seq{lo(master_seed), hi(master_seed), lo(stream),
                    hi(stream),      lo(attempt),     hi(attempt)};
  return Engine(seq);
}

// ---------------------------------------------------------------------------
// Jump sizes
// ---------------------------------------------------------------------------

double jump_mean(const JumpSizeDist& dist) {
  return std::visit(Overloaded{
                        [](const NormalJump& d) { return d.mean; },
                        [](const LogNormalFactorJump& d) { return std::expm1(d.mean + 0.5 * d.sd * d.sd); },
                        [](const PointMassJump& d) { return d.value; },
                        [](const UniformJump& d) { return 0.5 * (d.lo + d.hi); },
                    },
                    dist);
}

double jump_second_moment(const JumpSizeDist& dist) {
  return std::visit(
      Overloaded{
          [](const NormalJump& d) { return d.mean * d.mean + d.sd * d.sd; },
          [](const LogNormalFactorJump& d) {
            // E(e^Z - 1)^2 = E e^{2Z} - 2 E e^Z + 1
            return std::exp(2.0 * d.mean + 2.0 * d.sd * d.sd) - 2.0 * std::exp(d.mean + 0.5 * d.sd * d.sd) +
                   1.0;
          },
          [](const PointMassJump& d) { return d.value * d.value; },
          [](const UniformJump& d) { return (d.lo * d.lo + d.lo * d.hi + d.hi * d.hi) / 3.0; },
      },
      dist);
}

double prob_at_or_below_minus_one(const JumpSizeDist& dist) {
  return std::visit(Overloaded{
                        [](const NormalJump& d) {
                          if (d.sd <= 0.0) return d.mean <= -1.0 ? 1.0 : 0.0;
                          return norm_cdf((-1.0 - d.mean) / d.sd);
                        },
                        [](const LogNormalFactorJump&) { return 0.0; },
                        [](const PointMassJump& d) { return d.value <= -1.0 ? 1.0 : 0.0; },
                        [](const UniformJump& d) {
                          if (d.lo >= -1.0) return 0.0;
                          if (d.hi <= -1.0) return 1.0;
                          return (-1.0 - d.lo) / (d.hi - d.lo);
                        },
                    },
                    dist);
}

double price_jump_mean(const JumpSizeDist& dist) {
  if (prob_at_or_below_minus_one(dist) >= 1.0)
    throw std::invalid_argument("price jump law has no mass above -1");
  return std::visit(Overloaded{
                        [](const NormalJump& d) {
                          if (d.sd <= 0.0) return d.mean;
                          // mean of N(m, s^2) conditioned on xi > -1
                          const double alpha = (-1.0 - d.mean) / d.sd;
                          const double tail = 0.5 * std::erfc(alpha / std::numbers::sqrt2);
                          return d.mean + d.sd * norm_pdf(alpha) / tail;
                        },
                        [](const LogNormalFactorJump& d) { return std::expm1(d.mean + 0.5 * d.sd * d.sd); },
                        [](const PointMassJump& d) { return d.value; },
                        [](const UniformJump& d) { return 0.5 * (std::max(d.lo, -1.0) + d.hi); },
                    },
                    dist);
}

MomentConditions moment_conditions(const JumpSizeDist& dist) {
  MomentConditions out;
  out.finite_second_moment = std::isfinite(jump_second_moment(dist));
  out.finite_inverse_moment = std::visit(Overloaded{
                                             [](const NormalJump& d) { return d.sd <= 0.0 && d.mean > -1.0; },
                                             [](const LogNormalFactorJump&) { return true; },
                                             [](const PointMassJump& d) { return d.value > -1.0; },
                                             [](const UniformJump& d) { return d.lo > -1.0; },
                                         },
                                         dist);
  return out;
}

double sample_jump_size(const JumpSizeDist& dist, Engine& engine, bool price_constrained,
                        std::uint64_t& rejections) {
  auto draw = [&]() {
    return std::visit(Overloaded{
                          [&](const NormalJump& d) {
                            std::normal_distribution<double> n(d.mean, d.sd);
                            return d.sd > 0.0 ? n(engine) : d.mean;
                          },
                          [&](const LogNormalFactorJump& d) {
                            std::normal_distribution<double> n(d.mean, d.sd);
                            return std::expm1(d.sd > 0.0 ? n(engine) : d.mean);
                          },
                          [](const PointMassJump& d) { return d.value; },
                          [&](const UniformJump& d) {
                            std::uniform_real_distribution<double> u(d.lo, d.hi);
                            return u(engine);
                          },
                      },
                      dist);
  };
  if (price_constrained && prob_at_or_below_minus_one(dist) >= 1.0)
    throw std::invalid_argument("price jump law has no mass above -1");
  double xi = draw();
  while (price_constrained && xi <= -1.0) {
    ++rejections;
    xi = draw();
  }
  return xi;
}

double drift_compensator(const JumpChannel& channel) {
  if (!channel.hits_price()) throw std::invalid_argument("drift_compensator: channel does not act on the price");
  if (channel.intensity == 0.0) return 0.0;
  const double m = price_jump_mean(channel.size);
  if (!std::isfinite(m)) throw std::invalid_argument("drift_compensator: jump mean is not finite");
  return -channel.intensity * m;
}

std::vector<double> sample_jump_times(double intensity, double horizon, Engine& engine) {
  std::vector<double> out;
  if (intensity <= 0.0) return out;
  std::poisson_distribution<int> count(intensity * horizon);
  const int k = count(engine);
  std::uniform_real_distribution<double> u(0.0, horizon);
  out.reserve(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) {
    double t = u(engine);
    if (t <= 0.0) t = std::nextafter(0.0, horizon);
    out.push_back(t);
  }
  std::sort(out.begin(), out.end());
  return out;
}

// ---------------------------------------------------------------------------
// Volatility
// ---------------------------------------------------------------------------

double vol_at(const VolFunction& fn, double y) noexcept {
  return std::visit(Overloaded{
                        [y](const ExponentialVol& f) { return f.scale * std::exp(y) + f.floor; },
                        [y](const SqrtVol& f) { return std::sqrt(std::max(y, f.floor)); },
                        [](const ConstantVol& f) { return f.sigma; },
                    },
                    fn);
}

double vol_lower_bound(const VolFunction& fn) noexcept {
  return std::visit(Overloaded{
                        [](const ExponentialVol& f) { return f.floor; },
                        [](const SqrtVol& f) { return std::sqrt(std::max(f.floor, 0.0)); },
                        [](const ConstantVol& f) { return f.sigma; },
                    },
                    fn);
}

bool is_constant(const VolFunction& fn) noexcept { return std::holds_alternative<ConstantVol>(fn); }

double vol_drift(const VolDynamics& dyn, double, double y) noexcept {
  return std::visit(Overloaded{
                        [y](const OrnsteinUhlenbeck& d) { return d.a - y; },
                        [y](const CoxIngersollRoss& d) { return d.a * (d.m - y); },
                        [](const FrozenVolatility&) { return 0.0; },
                    },
                    dyn);
}

double vol_diffusion(const VolDynamics& dyn, double, double y) noexcept {
  return std::visit(Overloaded{
                        [](const OrnsteinUhlenbeck& d) { return d.b; },
                        [y](const CoxIngersollRoss& d) { return d.b * std::sqrt(std::max(y, 0.0)); },
                        [](const FrozenVolatility&) { return 0.0; },
                    },
                    dyn);
}

// ---------------------------------------------------------------------------
// Model
// ---------------------------------------------------------------------------

std::string to_string(ModelClass c) {
  switch (c) {
    case ModelClass::SV: return "SV";
    case ModelClass::SVJV: return "SVJV";
    case ModelClass::SVJP: return "SVJP";
    case ModelClass::SVCJ: return "SVCJ";
    case ModelClass::SVJJ: return "SVJJ";
  }
  return "?";
}

void ModelSpec::validate() const {
  if (!(s0 > 0.0) || !std::isfinite(s0)) throw std::invalid_argument("model: s0 must be positive");
  if (!(brownian_corr >= -1.0 && brownian_corr <= 1.0))
    throw std::invalid_argument("model: brownian_corr must lie in [-1, 1]");
  if (!std::isfinite(y0)) throw std::invalid_argument("model: y0 must be finite");

  std::visit(Overloaded{
                 [](const ExponentialVol& f) {
                   if (!(f.floor > 0.0) || !(f.scale >= 0.0))
                     throw std::invalid_argument("model: exponential sigma needs scale >= 0 and floor > 0");
                 },
                 [](const SqrtVol& f) {
                   if (!(f.floor > 0.0)) throw std::invalid_argument("model: sqrt sigma needs floor > 0");
                 },
                 [](const ConstantVol& f) {
                   if (!(f.sigma > 0.0)) throw std::invalid_argument("model: constant sigma must be positive");
                 },
             },
             sigma);

  std::visit(Overloaded{
                 [](const OrnsteinUhlenbeck& d) {
                   if (!(d.b >= 0.0)) throw std::invalid_argument("model: OU b must be >= 0");
                 },
                 [](const CoxIngersollRoss& d) {
                   if (!(d.a >= 0.0 && d.m >= 0.0 && d.b >= 0.0))
                     throw std::invalid_argument("model: CIR coefficients must be >= 0");
                 },
                 [](const FrozenVolatility&) {},
             },
             vol_sde);

  for (std::size_t c = 0; c < jumps.size(); ++c) {
    const auto& ch = jumps[c];
    const std::string tag = "model: jump channel " + std::to_string(c) + ": ";
    if (!(ch.intensity >= 0.0) || !std::isfinite(ch.intensity))
      throw std::invalid_argument(tag + "intensity must be finite and >= 0");
    if (!std::isfinite(jump_second_moment(ch.size)))
      throw std::invalid_argument(tag + "jump size needs a finite second moment");
    if (ch.hits_price()) {
      const double p = prob_at_or_below_minus_one(ch.size);
      if (p >= kMaxPriceJumpRejection)
        throw std::invalid_argument(tag + "P(xi <= -1) = " + std::to_string(p) + " is too large for a price jump");
    }
  }
}

double ModelSpec::price_drift() const {
  double b = 0.0;
  for (const auto& ch : jumps)
    if (ch.hits_price()) b += drift_compensator(ch);
  return b;
}

ModelClass ModelSpec::classify() const noexcept {
  bool price_only = false, vol_only = false, both = false;
  for (const auto& ch : jumps) {
    if (ch.intensity <= 0.0) continue;
    switch (ch.applies_to) {
      case JumpTarget::Price: price_only = true; break;
      case JumpTarget::Volatility: vol_only = true; break;
      case JumpTarget::Both: both = true; break;
    }
  }
  if (both) return (price_only || vol_only) ? ModelClass::SVJJ : ModelClass::SVCJ;
  if (price_only && vol_only) return ModelClass::SVJJ;
  if (price_only) return ModelClass::SVJP;
  if (vol_only) return ModelClass::SVJV;
  return ModelClass::SV;
}

// ---------------------------------------------------------------------------
// Paths
// ---------------------------------------------------------------------------

bool SimulatedPath::finite() const noexcept {
  for (std::size_t k = 0; k < times.size(); ++k) {
    if (!(s_pre[k] > 0.0) || !(s_post[k] > 0.0) || !std::isfinite(s_pre[k]) || !std::isfinite(s_post[k]))
      return false;
    if (!std::isfinite(y_pre[k]) || !std::isfinite(y_post[k])) return false;
  }
  return true;
}

std::vector<double> refine_grid(std::span<const double> revision_dates, int substeps) {
  if (substeps < 1) throw std::invalid_argument("refine_grid: substeps must be >= 1");
  if (revision_dates.size() < 2) throw std::invalid_argument("refine_grid: need at least two dates");
  std::vector<double> grid;
  grid.reserve((revision_dates.size() - 1) * static_cast<std::size_t>(substeps) + 1);
  for (std::size_t i = 1; i < revision_dates.size(); ++i) {
    const double a = revision_dates[i - 1];
    const double h = revision_dates[i] - a;
    if (!(h > 0.0)) throw std::invalid_argument("refine_grid: revision dates must be strictly increasing");
    grid.push_back(a);
    for (int j = 1; j < substeps; ++j) grid.push_back(a + h * j / substeps);
  }
  grid.push_back(revision_dates.back());
  return grid;
}

PathNoise draw_noise(const ModelSpec& model, std::span<const double> revision_dates, int substeps,
                     Engine& engine) {
  PathNoise noise;
  const std::vector<double> base = refine_grid(revision_dates, substeps);
  const double t0 = base.front();
  const double horizon = base.back() - t0;

  for (std::size_t c = 0; c < model.jumps.size(); ++c) {
    const auto& ch = model.jumps[c];
    for (double t : sample_jump_times(ch.intensity, horizon, engine)) {
      const double xi = sample_jump_size(ch.size, engine, ch.hits_price(), noise.rejected_jump_draws);
      noise.jumps.push_back({t0 + t, c, xi});
    }
  }
  std::stable_sort(noise.jumps.begin(), noise.jumps.end(),
                   [](const JumpEvent& a, const JumpEvent& b) { return a.time < b.time; });

  noise.times.reserve(base.size() + noise.jumps.size());
  std::size_t j = 0;
  for (double t : base) {
    while (j < noise.jumps.size() && noise.jumps[j].time < t - kGridTol) {
      if (noise.times.empty() || !same_time(noise.times.back(), noise.jumps[j].time))
        noise.times.push_back(noise.jumps[j].time);
      ++j;
    }
    // A jump that lands on a grid point (numerically) is processed at that point.
    while (j < noise.jumps.size() && same_time(noise.jumps[j].time, t)) {
      noise.jumps[j].time = t;
      ++j;
    }
    if (noise.times.empty() || !same_time(noise.times.back(), t)) noise.times.push_back(t);
  }

  const std::size_t steps = noise.times.size() - 1;
  noise.dw1.resize(steps);
  noise.dw2.resize(steps);
  const double rho = model.brownian_corr;
  const double rho_bar = std::sqrt(std::max(0.0, 1.0 - rho * rho));
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (std::size_t k = 0; k < steps; ++k) {
    const double sq = std::sqrt(noise.times[k + 1] - noise.times[k]);
    const double z1 = gauss(engine);
    const double z2 = gauss(engine);
    noise.dw1[k] = sq * z1;
    noise.dw2[k] = sq * (rho * z1 + rho_bar * z2);
  }
  return noise;
}

PathNoise coarsen(const PathNoise& fine, std::span<const double> keep) {
  PathNoise out;
  out.jumps = fine.jumps;
  out.rejected_jump_draws = fine.rejected_jump_draws;
  std::size_t j = 0;
  double acc1 = 0.0, acc2 = 0.0;
  for (std::size_t k = 0; k < fine.times.size(); ++k) {
    const double t = fine.times[k];
    if (k > 0) {
      acc1 += fine.dw1[k - 1];
      acc2 += fine.dw2[k - 1];
    }
    while (j < fine.jumps.size() && fine.jumps[j].time < t - kGridTol) ++j;
    const bool is_jump = j < fine.jumps.size() && same_time(fine.jumps[j].time, t);
    const bool last = k + 1 == fine.times.size();
    if (k == 0 || last || is_jump || find_time(keep, t) != std::numeric_limits<std::size_t>::max()) {
      if (k > 0) {
        out.dw1.push_back(acc1);
        out.dw2.push_back(acc2);
      }
      out.times.push_back(t);
      acc1 = acc2 = 0.0;
    }
  }
  return out;
}

SimulatedPath integrate_path(const ModelSpec& model, const PathNoise& noise,
                             std::span<const double> revision_dates) {
  const std::size_t npts = noise.times.size();
  SimulatedPath p;
  p.times = noise.times;
  p.s_pre.resize(npts);
  p.s_post.resize(npts);
  p.y_pre.resize(npts);
  p.y_post.resize(npts);
  p.rejected_jump_draws = noise.rejected_jump_draws;

  const double b = model.price_drift();
  double s = model.s0;
  double y = model.y0;
  std::size_t j = 0;

  auto apply_jumps = [&](std::size_t k) {
    while (j < noise.jumps.size() && same_time(noise.jumps[j].time, p.times[k])) {
      const auto& ev = noise.jumps[j];
      const auto& ch = model.jumps[ev.channel];
      if (ch.hits_price()) s *= 1.0 + ev.size;
      if (ch.hits_volatility()) y += ev.size;
      p.jumps.push_back({k, ev.channel, ev.size});
      ++j;
    }
  };

  p.s_pre[0] = s;
  p.y_pre[0] = y;
  apply_jumps(0);
  p.s_post[0] = s;
  p.y_post[0] = y;

  for (std::size_t k = 0; k + 1 < npts; ++k) {
    const double t = p.times[k];
    const double dt = p.times[k + 1] - t;
    const double sig = vol_at(model.sigma, y);
    const double y_next = y + vol_drift(model.vol_sde, t, y) * dt + vol_diffusion(model.vol_sde, t, y) * noise.dw2[k];
    s *= std::exp((b - 0.5 * sig * sig) * dt + sig * noise.dw1[k]);
    y = y_next;
    p.s_pre[k + 1] = s;
    p.y_pre[k + 1] = y;
    apply_jumps(k + 1);
    p.s_post[k + 1] = s;
    p.y_post[k + 1] = y;
  }

  p.revision_index.reserve(revision_dates.size());
  for (double t : revision_dates) {
    const std::size_t idx = find_time(p.times, t);
    if (idx == std::numeric_limits<std::size_t>::max())
      throw std::invalid_argument("integrate_path: revision date missing from the noise grid");
    p.revision_index.push_back(idx);
  }
  return p;
}

SimulatedPath simulate_path(const ModelSpec& model, std::span<const double> revision_dates, int substeps,
                            std::uint64_t master_seed, std::uint64_t stream) {
  constexpr std::uint32_t kMaxAttempts = 1000;
  for (std::uint32_t attempt = 0; attempt < kMaxAttempts; ++attempt) {
    Engine engine = make_engine(master_seed, stream, attempt);
    SimulatedPath path = integrate_path(model, draw_noise(model, revision_dates, substeps, engine), revision_dates);
    if (path.finite()) {
      path.resamples = attempt;
      return path;
    }
  }
  throw std::runtime_error("simulate_path: no finite path after repeated resampling");
}

}  // namespace jumphedge
