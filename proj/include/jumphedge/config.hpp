#pragma once

// JSON experiment configuration. Every object is parsed strictly: a key that
// is not part of the schema (docs/config.md) is a ConfigError.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "jumphedge/asymptotics.hpp"
#include "jumphedge/hedging.hpp"
#include "jumphedge/models.hpp"
#include "jumphedge/pricing.hpp"

namespace jumphedge {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Hedge settings shared by every n of a sweep.
struct HedgeTemplate {
  Strategy strategy = Strategy::Leland;
  ScheduleForm schedule = ScheduleForm::Simple;
  double mu = 1.0;
  /// Unset means Leland's kappa * sigma * sqrt(8/pi) (constant sigma only).
  std::optional<double> rho;
  /// Base volatility of the classical schedule; defaults to the model's
  /// constant sigma.
  std::optional<double> base_sigma;
  double kappa = 0.0;
  double strike = 1.0;
  bool charge_initial_trade = false;

  double resolved_rho(const ModelSpec& model) const;
  HedgeConfig make(int n, const ModelSpec& model) const;
};

struct OutputSpec {
  std::string dir = "out";
  std::string format = "csv";  // csv | json
};

struct GammaTableSpec {
  double x_min = 0.05;
  double x_max = 3.0;
  int points = 60;
  double y = 0.0;
};

struct QuantileSpec {
  std::vector<double> eps = {0.2, 0.1, 0.05, 0.02, 0.01};
};

struct ExperimentConfig {
  ModelSpec model;
  HedgeTemplate hedge;
  std::vector<int> n_values = {50, 100, 200, 400, 800};
  std::size_t n_paths = 500;
  std::uint64_t master_seed = 20240917;
  int substeps = 4;
  Theorem theorem = Theorem::SVJP;
  int workers = 0;
  int bootstrap_resamples = 200;
  OutputSpec output;
  GammaTableSpec gamma_table;
  QuantileSpec quantile;
  SuperhedgeSearch superhedge;

  /// Throws ConfigError (model/hedge problems are rethrown with context).
  void validate() const;
  LimitContext limit_context() const;
};

ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig load_config(const std::string& path);
nlohmann::json to_json(const ExperimentConfig& config);

/// Hull-White volatility with Gaussian price jumps: S0 = K = 1,
/// dy = (-1 - y) dt + 0.2 dW, sigma(y) = 2 e^y + 1, xi ~ N(0, 0.2^2) at rate 3,
/// rho = sqrt(8/pi), kappa = 0.001, Leland hedge.
ExperimentConfig hull_white_jump_config(double y0 = 0.0);

/// Constant sigma = 0.3, lognormal-factor price jumps at rate 1, mu = 1,
/// Leland with kappa = 0.01 and rho = sigma sqrt(8/pi).
ExperimentConfig const_vol_jump_config();

}  // namespace jumphedge
