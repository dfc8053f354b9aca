#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "jumphedge/config.hpp"
#include "jumphedge/ensemble.hpp"
#include "jumphedge/experiment.hpp"
#include "jumphedge/hedging.hpp"
#include "jumphedge/models.hpp"

using namespace jumphedge;

namespace {

ModelSpec hull_white() { return hull_white_jump_config(0.0).model; }

// stochastic volatility with light enough tails for 3-stderr checks
ModelSpec mild_sv() {
  ModelSpec m;
  m.sigma = ExponentialVol{0.2, 0.1};
  m.vol_sde = OrnsteinUhlenbeck{-1.0, 0.8};
  return m;
}

ModelSpec gbm(double sigma) {
  ModelSpec m;
  m.sigma = ConstantVol{sigma};
  return m;
}

}  // namespace

TEST(Drift, ZeroMeanJumpsNeedNoCompensation) {
  // the sampled law is the normal conditioned on xi > -1, whose mean is ~ -3e-7
  EXPECT_NEAR(drift_compensator({3.0, NormalJump{0.0, 0.2}, JumpTarget::Price}), 0.0, 1e-6);
  EXPECT_EQ(drift_compensator({3.0, NormalJump{0.0, 0.0}, JumpTarget::Price}), 0.0);
  EXPECT_EQ(drift_compensator({0.0, UniformJump{0.1, 0.5}, JumpTarget::Price}), 0.0);
}

TEST(Drift, LognormalFactorClosedForm) {
  EXPECT_NEAR(drift_compensator({2.0, LogNormalFactorJump{-0.08, 0.4}, JumpTarget::Price}), 0.0, 1e-15);
  const double m = 0.1, s = 0.3;
  EXPECT_NEAR(drift_compensator({2.0, LogNormalFactorJump{m, s}, JumpTarget::Price}),
              -2.0 * (std::exp(m + 0.5 * s * s) - 1.0), 1e-14);
}

TEST(Drift, LognormalFactorMeanAgainstSampling) {
  const LogNormalFactorJump d{0.1, 0.3};
  Engine e = make_engine(99, 0);
  std::uint64_t rej = 0;
  double sum = 0.0, sum2 = 0.0;
  const int n = 1000000;
  for (int i = 0; i < n; ++i) {
    const double x = sample_jump_size(d, e, true, rej);
    sum += x;
    sum2 += x * x;
  }
  const double mean = sum / n, se = std::sqrt((sum2 / n - mean * mean) / n);
  EXPECT_NEAR(mean, jump_mean(d), 4.0 * se);
  EXPECT_EQ(rej, 0u);
}

TEST(Drift, RejectsVolatilityOnlyChannel) {
  EXPECT_THROW(drift_compensator({1.0, NormalJump{0.0, 0.1}, JumpTarget::Volatility}), std::invalid_argument);
}

TEST(JumpTimes, ZeroIntensityIsEmpty) {
  Engine e = make_engine(1, 0);
  EXPECT_TRUE(sample_jump_times(0.0, 1.0, e).empty());
}

TEST(JumpTimes, PoissonCountAndLastGap) {
  Engine e = make_engine(2024, 0);
  const int draws = 100000;
  const double t_star = 0.99;
  double count = 0.0;
  int none_after = 0;
  for (int i = 0; i < draws; ++i) {
    const auto ts = sample_jump_times(3.0, 1.0, e);
    ASSERT_TRUE(std::is_sorted(ts.begin(), ts.end()));
    for (double t : ts) ASSERT_TRUE(t > 0.0 && t < 1.0);
    count += double(ts.size());
    if (ts.empty() || ts.back() <= t_star) ++none_after;
  }
  EXPECT_NEAR(count / draws, 3.0, 0.02);
  const double p = std::exp(-3.0 * (1.0 - t_star));
  EXPECT_NEAR(double(none_after) / draws, p, 4.0 * std::sqrt(p * (1 - p) / draws));
}

TEST(JumpSizes, NormalRejectionIsNegligible) {
  const NormalJump d{0.0, 0.2};
  EXPECT_LT(prob_at_or_below_minus_one(d), 1e-6);
  EXPECT_GT(prob_at_or_below_minus_one(d), 1e-7);
  EXPECT_TRUE(moment_conditions(LogNormalFactorJump{0.0, 0.1}).satisfied());
  EXPECT_FALSE(moment_conditions(NormalJump{0.0, 0.2}).finite_inverse_moment);
}

TEST(Model, ValidateRejectsBadInput) {
  ModelSpec m = hull_white();
  EXPECT_NO_THROW(m.validate());
  auto broken = m;
  broken.jumps[0].intensity = -1.0;
  EXPECT_THROW(broken.validate(), std::invalid_argument);
  broken = m;
  broken.jumps[0].size = NormalJump{0.0, 1.0};  // P(xi <= -1) ~ 0.16
  EXPECT_THROW(broken.validate(), std::invalid_argument);
  broken = m;
  broken.brownian_corr = 1.5;
  EXPECT_THROW(broken.validate(), std::invalid_argument);
  EXPECT_THROW(gbm(0.0).validate(), std::invalid_argument);
  EXPECT_EQ(m.classify(), ModelClass::SVJP);
  EXPECT_EQ(gbm(0.2).classify(), ModelClass::SV);
}

TEST(Paths, JumpRuleAndPositivity) {
  const ModelSpec m = hull_white();
  const auto dates = make_revision_grid(20, 1.0).dates;
  std::size_t jumps = 0;
  for (std::uint64_t k = 0; k < 200; ++k) {
    const SimulatedPath p = simulate_path(m, dates, 4, 5, k);
    std::vector<bool> marked(p.times.size(), false);
    for (const auto& j : p.jumps) {
      marked[j.index] = true;
      EXPECT_NEAR(p.s_post[j.index] / p.s_pre[j.index] - 1.0, j.size, 1e-14);
    }
    for (std::size_t i = 0; i < p.times.size(); ++i) {
      ASSERT_GT(p.s_pre[i], 0.0);
      ASSERT_GT(p.s_post[i], 0.0);
      if (!marked[i]) EXPECT_EQ(p.s_pre[i], p.s_post[i]);
      if (i > 0) ASSERT_GT(p.times[i], p.times[i - 1]);
    }
    for (std::size_t i = 0; i < dates.size(); ++i) EXPECT_EQ(p.times[p.revision_index[i]], dates[i]);
    jumps += p.jumps.size();
  }
  EXPECT_GT(jumps, 400u);  // about 3 per path
}

TEST(Paths, MartingaleConstantVol) {
  const ModelSpec m = gbm(0.4);
  const auto dates = make_revision_grid(4, 1.0).dates;
  const auto term = simulate_terminals(m, dates, 1, {100000, 17, 0, 0});
  std::vector<double> s1;
  for (const auto& t : term) s1.push_back(t.s1);
  const SampleStats st = sample_stats(s1);
  EXPECT_LE(std::abs(st.mean - 1.0), 3.0 * st.sd / std::sqrt(double(s1.size())));
}

TEST(Paths, MartingaleWithJumpsAndStochasticVol) {
  ModelSpec m = mild_sv();
  // nonzero mean: uncompensated, E S1 would be exp(3 * 0.0725) ~ 1.24
  m.jumps = {JumpChannel{3.0, LogNormalFactorJump{0.05, 0.2}, JumpTarget::Price}};
  const auto dates = make_revision_grid(10, 1.0).dates;
  const auto term = simulate_terminals(m, dates, 2, {20000, 23, 0, 0});
  std::vector<double> s1;
  for (const auto& t : term) s1.push_back(t.s1);
  const SampleStats st = sample_stats(s1);
  EXPECT_LE(std::abs(st.mean - 1.0), 3.0 * st.sd / std::sqrt(double(s1.size())));
}

TEST(Paths, DegenerateModelIsGbm) {
  const double sigma = 0.25;
  const int n = 4000;
  const auto dates = make_revision_grid(n, 1.0).dates;
  const SimulatedPath p = simulate_path(gbm(sigma), dates, 1, 3, 0);
  std::vector<double> r;
  for (std::size_t i = 1; i < p.times.size(); ++i) r.push_back(std::log(p.s_post[i] / p.s_post[i - 1]));
  const SampleStats st = sample_stats(r);
  const double var = sigma * sigma / n;
  EXPECT_NEAR(st.sd * st.sd, var, 4.0 * var * std::sqrt(2.0 / n));
  for (double y : p.y_post) EXPECT_EQ(y, 0.0);
}

TEST(Noise, IncrementCorrelation) {
  for (double corr : {0.0, 0.6}) {
    ModelSpec m = hull_white();
    m.brownian_corr = corr;
    const auto dates = make_revision_grid(1000, 1.0).dates;
    std::vector<double> a, b;
    for (std::uint64_t k = 0; k < 25; ++k) {
      Engine e = make_engine(41, k);
      const PathNoise nz = draw_noise(m, dates, 4, e);
      for (std::size_t i = 0; i < nz.dw1.size(); ++i) {
        const double h = std::sqrt(nz.times[i + 1] - nz.times[i]);
        a.push_back(nz.dw1[i] / h);
        b.push_back(nz.dw2[i] / h);
      }
    }
    ASSERT_GE(a.size(), 100000u);
    double sab = 0, saa = 0, sbb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      sab += a[i] * b[i];
      saa += a[i] * a[i];
      sbb += b[i] * b[i];
    }
    const double r = sab / std::sqrt(saa * sbb);
    EXPECT_NEAR(r, corr, 3.0 * (1.0 - corr * corr) / std::sqrt(double(a.size())));
  }
}

TEST(Noise, CoarseningKeepsIncrementSums) {
  const ModelSpec m = hull_white();
  const auto dates = make_revision_grid(8, 1.0).dates;
  Engine e = make_engine(8, 1);
  const PathNoise fine = draw_noise(m, dates, 16, e);
  const PathNoise coarse = coarsen(fine, refine_grid(dates, 4));
  double f = 0, c = 0;
  for (double x : fine.dw1) f += x;
  for (double x : coarse.dw1) c += x;
  EXPECT_NEAR(f, c, 1e-12);
  EXPECT_EQ(coarse.jumps.size(), fine.jumps.size());
  EXPECT_LT(coarse.times.size(), fine.times.size());
  EXPECT_GE(coarse.times.size(), refine_grid(dates, 4).size());
}

TEST(Noise, CoupledRefinementConverges) {
  // Same Brownian increments, coarser substeps: the terminal gap shrinks as the step does.
  const ModelSpec m = mild_sv();
  const auto dates = make_revision_grid(8, 1.0).dates;
  const int finest = 128;
  double gap[3] = {0, 0, 0};
  const int sub[3] = {4, 8, 16};
  for (std::uint64_t k = 0; k < 400; ++k) {
    Engine e = make_engine(12, k);
    const PathNoise fine = draw_noise(m, dates, finest, e);
    const double ref = integrate_path(m, fine, dates).s_terminal();
    for (int i = 0; i < 3; ++i) {
      const double s = integrate_path(m, coarsen(fine, refine_grid(dates, sub[i])), dates).s_terminal();
      gap[i] += std::abs(std::log(s / ref));
    }
  }
  EXPECT_LT(gap[1], 0.8 * gap[0]);
  EXPECT_LT(gap[2], 0.8 * gap[1]);
}

TEST(Ensemble, WorkerCountDoesNotMatter) {
  const ModelSpec m = hull_white();
  const auto dates = make_revision_grid(16, 1.0).dates;
  const auto a = simulate_terminals(m, dates, 2, {300, 77, 1, 0});
  const auto b = simulate_terminals(m, dates, 2, {300, 77, 8, 0});
  const auto c = simulate_terminals_serial(m, dates, 2, {300, 77, 0, 0});
  const auto d = simulate_terminals(m, dates, 2, {300, 78, 1, 0});
  ASSERT_EQ(a.size(), 300u);
  bool differs = false;
  for (std::size_t k = 0; k < a.size(); ++k) {
    EXPECT_EQ(a[k].s1, b[k].s1);
    EXPECT_EQ(a[k].s1, c[k].s1);
    EXPECT_EQ(a[k].y1, c[k].y1);
    differs = differs || a[k].s1 != d[k].s1;
  }
  EXPECT_TRUE(differs);
}

TEST(Ensemble, ExceptionsLeaveTheParallelLoop) {
  EXPECT_THROW(parallel_map(100, 4,
                            [](std::size_t k) -> int {
                              if (k == 37) throw std::runtime_error("boom");
                              return int(k);
                            }),
               std::runtime_error);
}
