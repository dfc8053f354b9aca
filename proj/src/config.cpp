#include "jumphedge/config.hpp"

#include <cmath>
#include <fstream>
#include <initializer_list>
#include <numbers>

namespace jumphedge {

using nlohmann::json;

namespace {

void check_object(const json& j, const std::string& path, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw ConfigError(path + ": expected an object");
  for (const auto& [key, _] : j.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) throw ConfigError(path + ": unknown key '" + key + "'");
  }
}

template <class T>
T field(const json& j, const char* key, const std::string& path, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(path + "." + key + ": " + e.what());
  }
}

template <class T>
T required(const json& j, const char* key, const std::string& path) {
  if (!j.contains(key)) throw ConfigError(path + ": missing key '" + key + "'");
  return field<T>(j, key, path, T{});
}

std::string type_of(const json& j, const std::string& path) { return required<std::string>(j, "type", path); }

JumpSizeDist parse_size(const json& j, const std::string& path) {
  const std::string t = type_of(j, path);
  if (t == "normal") {
    check_object(j, path, {"type", "mean", "sd", "variance"});
    if (j.contains("sd") && j.contains("variance")) throw ConfigError(path + ": give either sd or variance");
    double sd = field(j, "sd", path, 0.0);
    if (j.contains("variance")) {
      const double v = required<double>(j, "variance", path);
      if (!(v >= 0.0)) throw ConfigError(path + ".variance: must be >= 0");
      sd = std::sqrt(v);
    }
    return NormalJump{field(j, "mean", path, 0.0), sd};
  }
  if (t == "lognormal_factor") {
    check_object(j, path, {"type", "mean", "sd"});
    return LogNormalFactorJump{field(j, "mean", path, 0.0), field(j, "sd", path, 0.0)};
  }
  if (t == "point") {
    check_object(j, path, {"type", "value"});
    return PointMassJump{required<double>(j, "value", path)};
  }
  if (t == "uniform") {
    check_object(j, path, {"type", "lo", "hi"});
    return UniformJump{required<double>(j, "lo", path), required<double>(j, "hi", path)};
  }
  throw ConfigError(path + ".type: unknown jump size law '" + t + "'");
}

json size_to_json(const JumpSizeDist& d) {
  return std::visit(
      [](const auto& s) -> json {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, NormalJump>) return {{"type", "normal"}, {"mean", s.mean}, {"sd", s.sd}};
        if constexpr (std::is_same_v<T, LogNormalFactorJump>)
          return {{"type", "lognormal_factor"}, {"mean", s.mean}, {"sd", s.sd}};
        if constexpr (std::is_same_v<T, PointMassJump>) return {{"type", "point"}, {"value", s.value}};
        if constexpr (std::is_same_v<T, UniformJump>) return {{"type", "uniform"}, {"lo", s.lo}, {"hi", s.hi}};
      },
      d);
}

JumpTarget parse_target(const std::string& s, const std::string& path) {
  if (s == "price") return JumpTarget::Price;
  if (s == "volatility") return JumpTarget::Volatility;
  if (s == "both") return JumpTarget::Both;
  throw ConfigError(path + ": applies_to must be price, volatility or both");
}

const char* target_name(JumpTarget t) {
  switch (t) {
    case JumpTarget::Price: return "price";
    case JumpTarget::Volatility: return "volatility";
    case JumpTarget::Both: return "both";
  }
  return "?";
}

VolFunction parse_vol(const json& j, const std::string& path) {
  const std::string t = type_of(j, path);
  if (t == "exponential") {
    check_object(j, path, {"type", "scale", "floor"});
    return ExponentialVol{field(j, "scale", path, 1.0), field(j, "floor", path, 0.0)};
  }
  if (t == "sqrt") {
    check_object(j, path, {"type", "floor"});
    return SqrtVol{field(j, "floor", path, 1e-4)};
  }
  if (t == "constant") {
    check_object(j, path, {"type", "sigma"});
    return ConstantVol{required<double>(j, "sigma", path)};
  }
  throw ConfigError(path + ".type: unknown volatility function '" + t + "'");
}

json vol_to_json(const VolFunction& v) {
  return std::visit(
      [](const auto& s) -> json {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, ExponentialVol>)
          return {{"type", "exponential"}, {"scale", s.scale}, {"floor", s.floor}};
        if constexpr (std::is_same_v<T, SqrtVol>) return {{"type", "sqrt"}, {"floor", s.floor}};
        if constexpr (std::is_same_v<T, ConstantVol>) return {{"type", "constant"}, {"sigma", s.sigma}};
      },
      v);
}

VolDynamics parse_dyn(const json& j, const std::string& path) {
  const std::string t = type_of(j, path);
  if (t == "ou") {
    check_object(j, path, {"type", "a", "b"});
    return OrnsteinUhlenbeck{field(j, "a", path, 0.0), field(j, "b", path, 0.0)};
  }
  if (t == "cir") {
    check_object(j, path, {"type", "a", "m", "b"});
    return CoxIngersollRoss{required<double>(j, "a", path), required<double>(j, "m", path),
                            required<double>(j, "b", path)};
  }
  if (t == "frozen") {
    check_object(j, path, {"type"});
    return FrozenVolatility{};
  }
  throw ConfigError(path + ".type: unknown volatility dynamics '" + t + "'");
}

json dyn_to_json(const VolDynamics& v) {
  return std::visit(
      [](const auto& s) -> json {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, OrnsteinUhlenbeck>) return {{"type", "ou"}, {"a", s.a}, {"b", s.b}};
        if constexpr (std::is_same_v<T, CoxIngersollRoss>)
          return {{"type", "cir"}, {"a", s.a}, {"m", s.m}, {"b", s.b}};
        if constexpr (std::is_same_v<T, FrozenVolatility>) return {{"type", "frozen"}};
      },
      v);
}

ModelSpec parse_model(const json& j) {
  const std::string path = "model";
  check_object(j, path, {"s0", "y0", "brownian_corr", "sigma", "vol_sde", "jumps"});
  ModelSpec m;
  m.s0 = field(j, "s0", path, 1.0);
  m.y0 = field(j, "y0", path, 0.0);
  m.brownian_corr = field(j, "brownian_corr", path, 0.0);
  if (j.contains("sigma")) m.sigma = parse_vol(j.at("sigma"), path + ".sigma");
  if (j.contains("vol_sde")) m.vol_sde = parse_dyn(j.at("vol_sde"), path + ".vol_sde");
  if (j.contains("jumps")) {
    const json& arr = j.at("jumps");
    if (!arr.is_array()) throw ConfigError(path + ".jumps: expected an array");
    for (std::size_t i = 0; i < arr.size(); ++i) {
      const std::string p = path + ".jumps[" + std::to_string(i) + "]";
      check_object(arr[i], p, {"intensity", "size", "applies_to"});
      JumpChannel c;
      c.intensity = required<double>(arr[i], "intensity", p);
      c.size = parse_size(arr[i].contains("size") ? arr[i].at("size") : throw ConfigError(p + ": missing key 'size'"),
                          p + ".size");
      c.applies_to = parse_target(field<std::string>(arr[i], "applies_to", p, "price"), p + ".applies_to");
      m.jumps.push_back(c);
    }
  }
  return m;
}

Strategy parse_strategy(const std::string& s) {
  if (s == "leland") return Strategy::Leland;
  if (s == "lepinette") return Strategy::Lepinette;
  if (s == "plain_delta") return Strategy::PlainDelta;
  throw ConfigError("hedge.strategy: expected leland, lepinette or plain_delta, got '" + s + "'");
}

Theorem parse_theorem(const std::string& s) {
  if (s == "svjp") return Theorem::SVJP;
  if (s == "lepinette") return Theorem::Lepinette;
  if (s == "constvol") return Theorem::ConstVol;
  if (s == "raw") return Theorem::Raw;
  throw ConfigError("theorem: expected svjp, lepinette, constvol or raw, got '" + s + "'");
}

HedgeTemplate parse_hedge(const json& j) {
  const std::string path = "hedge";
  check_object(j, path, {"strategy", "schedule", "mu", "rho", "base_sigma", "kappa", "strike", "charge_initial_trade"});
  HedgeTemplate h;
  h.strategy = parse_strategy(field<std::string>(j, "strategy", path, "leland"));
  const std::string sch = field<std::string>(j, "schedule", path, "simple");
  if (sch == "simple")
    h.schedule = ScheduleForm::Simple;
  else if (sch == "classical")
    h.schedule = ScheduleForm::Classical;
  else
    throw ConfigError("hedge.schedule: expected simple or classical, got '" + sch + "'");
  h.mu = field(j, "mu", path, 1.0);
  if (j.contains("rho")) {
    const json& r = j.at("rho");
    if (r.is_string()) {
      if (r.get<std::string>() != "classical") throw ConfigError("hedge.rho: a number or \"classical\"");
    } else {
      h.rho = field(j, "rho", path, 0.0);
    }
  } else {
    h.rho = std::sqrt(8.0 / std::numbers::pi);
  }
  if (j.contains("base_sigma")) h.base_sigma = required<double>(j, "base_sigma", path);
  h.kappa = field(j, "kappa", path, 0.0);
  h.strike = field(j, "strike", path, 1.0);
  h.charge_initial_trade = field(j, "charge_initial_trade", path, false);
  return h;
}

json hedge_to_json(const HedgeTemplate& h) {
  json j = {{"strategy", to_string(h.strategy)},
            {"schedule", h.schedule == ScheduleForm::Simple ? "simple" : "classical"},
            {"mu", h.mu},
            {"kappa", h.kappa},
            {"strike", h.strike},
            {"charge_initial_trade", h.charge_initial_trade}};
  if (h.rho)
    j["rho"] = *h.rho;
  else
    j["rho"] = "classical";
  if (h.base_sigma) j["base_sigma"] = *h.base_sigma;
  return j;
}

}  // namespace

double HedgeTemplate::resolved_rho(const ModelSpec& model) const {
  if (rho) return *rho;
  if (!is_constant(model.sigma)) throw ConfigError("hedge.rho: \"classical\" needs a constant model volatility");
  return classical_rho(vol_at(model.sigma, model.y0), kappa);
}

HedgeConfig HedgeTemplate::make(int n, const ModelSpec& model) const {
  HedgeConfig c;
  c.strategy = strategy;
  const double r = resolved_rho(model);
  if (schedule == ScheduleForm::Simple) {
    c.schedule = VolSchedule::simple(n, mu, r);
  } else {
    double base = 0.0;
    if (base_sigma)
      base = *base_sigma;
    else if (is_constant(model.sigma))
      base = vol_at(model.sigma, model.y0);
    else
      throw ConfigError("hedge.base_sigma: the classical schedule needs base_sigma for a non-constant volatility");
    c.schedule = VolSchedule::classical(n, mu, r, base);
  }
  c.kappa = kappa;
  c.strike = strike;
  c.charge_initial_trade = charge_initial_trade;
  if (strategy == Strategy::PlainDelta) c.true_vol = model.sigma;
  return c;
}

void ExperimentConfig::validate() const {
  try {
    model.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("model: ") + e.what());
  }
  if (n_values.empty()) throw ConfigError("n_values: must be nonempty");
  for (std::size_t i = 0; i < n_values.size(); ++i) {
    if (n_values[i] < 1) throw ConfigError("n_values: entries must be >= 1");
    if (i > 0 && n_values[i] <= n_values[i - 1]) throw ConfigError("n_values: must be strictly increasing");
  }
  if (n_paths < 1) throw ConfigError("paths: must be >= 1");
  if (substeps < 1) throw ConfigError("substeps: must be >= 1");
  if (bootstrap_resamples < 1) throw ConfigError("bootstrap_resamples: must be >= 1");
  if (output.format != "csv" && output.format != "json") throw ConfigError("output.format: csv or json");
  try {
    const HedgeConfig h = hedge.make(n_values.front(), model);
    h.validate();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("hedge: ") + e.what());
  }
  const bool leland = hedge.strategy == Strategy::Leland;
  const bool lep = hedge.strategy == Strategy::Lepinette;
  if (theorem == Theorem::SVJP && !leland) throw ConfigError("theorem: svjp needs strategy leland");
  if (theorem == Theorem::Lepinette && !lep) throw ConfigError("theorem: lepinette needs strategy lepinette");
  if (theorem == Theorem::ConstVol && !(leland || lep))
    throw ConfigError("theorem: constvol needs strategy leland or lepinette");
  if (theorem == Theorem::ConstVol && !is_constant(model.sigma))
    throw ConfigError("theorem: constvol needs a constant model volatility");
}

LimitContext ExperimentConfig::limit_context() const {
  LimitContext c;
  c.strike = hedge.strike;
  c.kappa = hedge.kappa;
  c.rho = hedge.resolved_rho(model);
  c.sigma = model.sigma;
  return c;
}

ExperimentConfig parse_config(const json& j) {
  check_object(j, "config",
               {"model", "hedge", "n_values", "paths", "seed", "substeps", "theorem", "workers", "bootstrap_resamples",
                "output", "gamma_table", "quantile", "superhedge"});
  ExperimentConfig c;
  if (j.contains("model")) c.model = parse_model(j.at("model"));
  if (j.contains("hedge")) c.hedge = parse_hedge(j.at("hedge"));
  c.n_values = field(j, "n_values", "config", c.n_values);
  c.n_paths = field(j, "paths", "config", c.n_paths);
  c.master_seed = field(j, "seed", "config", c.master_seed);
  c.substeps = field(j, "substeps", "config", c.substeps);
  c.theorem = parse_theorem(field<std::string>(j, "theorem", "config", to_string(c.theorem)));
  c.workers = field(j, "workers", "config", c.workers);
  c.bootstrap_resamples = field(j, "bootstrap_resamples", "config", c.bootstrap_resamples);
  if (j.contains("output")) {
    const json& o = j.at("output");
    check_object(o, "output", {"dir", "format"});
    c.output.dir = field(o, "dir", "output", c.output.dir);
    c.output.format = field(o, "format", "output", c.output.format);
  }
  if (j.contains("gamma_table")) {
    const json& g = j.at("gamma_table");
    check_object(g, "gamma_table", {"x_min", "x_max", "points", "y"});
    c.gamma_table.x_min = field(g, "x_min", "gamma_table", c.gamma_table.x_min);
    c.gamma_table.x_max = field(g, "x_max", "gamma_table", c.gamma_table.x_max);
    c.gamma_table.points = field(g, "points", "gamma_table", c.gamma_table.points);
    c.gamma_table.y = field(g, "y", "gamma_table", c.gamma_table.y);
  }
  if (j.contains("quantile")) {
    const json& q = j.at("quantile");
    check_object(q, "quantile", {"eps"});
    c.quantile.eps = field(q, "eps", "quantile", c.quantile.eps);
  }
  if (j.contains("superhedge")) {
    const json& s = j.at("superhedge");
    check_object(s, "superhedge", {"lo_factor", "hi_factor", "grid_points", "rel_tol"});
    c.superhedge.lo_factor = field(s, "lo_factor", "superhedge", c.superhedge.lo_factor);
    c.superhedge.hi_factor = field(s, "hi_factor", "superhedge", c.superhedge.hi_factor);
    c.superhedge.grid_points = field(s, "grid_points", "superhedge", c.superhedge.grid_points);
    c.superhedge.rel_tol = field(s, "rel_tol", "superhedge", c.superhedge.rel_tol);
  }
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open config file");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError(path + ": " + e.what());
  }
  try {
    return parse_config(j);
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

json to_json(const ExperimentConfig& c) {
  json jumps = json::array();
  for (const auto& ch : c.model.jumps)
    jumps.push_back({{"intensity", ch.intensity}, {"size", size_to_json(ch.size)}, {"applies_to", target_name(ch.applies_to)}});
  return {{"model",
           {{"s0", c.model.s0},
            {"y0", c.model.y0},
            {"brownian_corr", c.model.brownian_corr},
            {"sigma", vol_to_json(c.model.sigma)},
            {"vol_sde", dyn_to_json(c.model.vol_sde)},
            {"jumps", jumps}}},
          {"hedge", hedge_to_json(c.hedge)},
          {"n_values", c.n_values},
          {"paths", c.n_paths},
          {"seed", c.master_seed},
          {"substeps", c.substeps},
          {"theorem", to_string(c.theorem)},
          {"workers", c.workers},
          {"bootstrap_resamples", c.bootstrap_resamples},
          {"output", {{"dir", c.output.dir}, {"format", c.output.format}}},
          {"gamma_table",
           {{"x_min", c.gamma_table.x_min},
            {"x_max", c.gamma_table.x_max},
            {"points", c.gamma_table.points},
            {"y", c.gamma_table.y}}},
          {"quantile", {{"eps", c.quantile.eps}}},
          {"superhedge",
           {{"lo_factor", c.superhedge.lo_factor},
            {"hi_factor", c.superhedge.hi_factor},
            {"grid_points", c.superhedge.grid_points},
            {"rel_tol", c.superhedge.rel_tol}}}};
}

ExperimentConfig hull_white_jump_config(double y0) {
  ExperimentConfig c;
  c.model.s0 = 1.0;
  c.model.y0 = y0;
  c.model.sigma = ExponentialVol{2.0, 1.0};
  c.model.vol_sde = OrnsteinUhlenbeck{-1.0, 0.2};
  c.model.jumps = {JumpChannel{3.0, NormalJump{0.0, 0.2}, JumpTarget::Price}};
  c.hedge.strategy = Strategy::Leland;
  c.hedge.mu = 1.0;
  c.hedge.rho = std::sqrt(8.0 / std::numbers::pi);
  c.hedge.kappa = 0.001;
  c.hedge.strike = 1.0;
  c.theorem = Theorem::SVJP;
  c.n_paths = 500;
  c.gamma_table.y = y0;
  return c;
}

ExperimentConfig const_vol_jump_config() {
  ExperimentConfig c;
  c.model.s0 = 1.0;
  c.model.sigma = ConstantVol{0.3};
  c.model.vol_sde = FrozenVolatility{};
  c.model.jumps = {JumpChannel{1.0, LogNormalFactorJump{0.0, 0.1}, JumpTarget::Price}};
  c.hedge.strategy = Strategy::Leland;
  c.hedge.mu = 1.0;
  c.hedge.rho = 0.3 * std::sqrt(8.0 / std::numbers::pi);
  c.hedge.kappa = 0.01;
  c.hedge.strike = 1.0;
  c.theorem = Theorem::ConstVol;
  c.n_values = {32, 64, 128, 256, 512, 1024};
  c.n_paths = 4000;
  c.substeps = 1;
  return c;
}

}  // namespace jumphedge
