#include "wpt/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>

#include "wpt/errors.hpp"
#include "wpt/format.hpp"

namespace wpt {

namespace {

double parse_number(std::string_view text, std::string_view what) {
  // Accepts plain decimals and simple fractions such as "1/3".
  if (auto slash = text.find('/'); slash != std::string_view::npos) {
    const double num = parse_number(text.substr(0, slash), what);
    const double den = parse_number(text.substr(slash + 1), what);
    if (den == 0.0) throw ConfigError(std::string(what) + ": zero denominator");
    return num / den;
  }
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty())
    throw ConfigError(std::string(what) + ": cannot parse '" +
                      std::string(text) + "'");
  return value;
}

int to_integer(double v, std::string_view what) {
  if (!std::isfinite(v) || std::floor(v) != v || std::abs(v) > 1e9)
    throw ConfigError(std::string(what) + " must be an integer");
  return static_cast<int>(v);
}

}  // namespace

double parse_value(std::string_view text) { return parse_number(text, "value"); }

NamedPolicy parse_policy(std::string_view token) {
  if (token == "optimal") return {std::string(token), OptimalPolicy{}};
  const auto colon = token.find(':');
  if (colon != std::string_view::npos) {
    const auto kind = token.substr(0, colon);
    const auto arg = token.substr(colon + 1);
    if (kind == "beta")
      return {std::string(token), BetaPolicy{parse_number(arg, "beta")}};
    if (kind == "forced")
      return {std::string(token),
              ForcedStopPolicy{to_integer(parse_number(arg, "forced"),
                                          "forced stop slot")}};
  }
  throw ConfigError("unknown policy '" + std::string(token) +
                    "' (expected optimal, beta:<b> or forced:<T0>)");
}

DiscreteChannel ChannelSpec::build() const {
  if (explicit_channel) return *explicit_channel;
  return discretize(law, levels);
}

std::string_view to_string(SweepVar var) {
  switch (var) {
    case SweepVar::T: return "T";
    case SweepVar::N: return "N";
    case SweepVar::m: return "m";
    case SweepVar::eta: return "eta";
    case SweepVar::forced_T0: return "forced_T0";
  }
  return "?";
}

SweepVar parse_sweep_var(std::string_view name) {
  for (SweepVar v : {SweepVar::T, SweepVar::N, SweepVar::m, SweepVar::eta,
                     SweepVar::forced_T0})
    if (to_string(v) == name) return v;
  throw ConfigError("unknown sweep variable '" + std::string(name) +
                    "' (expected T, N, m, eta or forced_T0)");
}

void ExperimentConfig::merge_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  try {
    for (const auto& [key, v] : j.items()) {
      if (key == "T") {
        params.horizon = to_integer(v.get<double>(), "T");
      } else if (key == "N") {
        channel.levels = static_cast<std::size_t>(
            std::max(0, to_integer(v.get<double>(), "N")));
        channel.explicit_channel.reset();
      } else if (key == "m") {
        params.order = v.get<double>();
      } else if (key == "lambda") {
        params.energy_coeff = v.get<double>();
      } else if (key == "P") {
        params.ap_power = v.get<double>();
      } else if (key == "eta") {
        params.efficiency = v.get<double>();
      } else if (key == "episodes") {
        episodes = v.get<std::size_t>();
      } else if (key == "seed") {
        seed = v.get<std::uint64_t>();
      } else if (key == "workers") {
        workers = v.get<unsigned>();
      } else if (key == "E1") {
        initial_energy = v.get<double>();
      } else if (key == "policies") {
        policies.clear();
        for (const auto& p : v) policies.push_back(parse_policy(p.get<std::string>()));
      } else if (key == "sweep") {
        sweep = parse_sweep_var(v.get<std::string>());
      } else if (key == "values") {
        sweep_values = v.get<std::vector<double>>();
      } else if (key == "out") {
        out = v.get<std::string>();
      } else if (key == "format") {
        const auto f = v.get<std::string>();
        if (f == "csv") format = OutputFormat::Csv;
        else if (f == "json") format = OutputFormat::Json;
        else throw ConfigError("format must be csv or json");
      } else if (key == "channel") {
        if (v.contains("levels")) {
          channel.explicit_channel = DiscreteChannel::from_json(v);
        } else {
          const auto law = v.value("law", std::string("exponential"));
          if (law == "exponential")
            channel.law = ExponentialLaw{v.value("mean", 1.0)};
          else if (law == "deterministic")
            channel.law = DeterministicLaw{v.value("value", 1.0)};
          else
            throw ConfigError("unknown fading law '" + law + "'");
          if (v.contains("N"))
            channel.levels = v.at("N").get<std::size_t>();
          channel.explicit_channel.reset();
        }
      } else if (key == "K_E") {
        oracle_energy_points = v.get<std::size_t>();
      } else if (key == "K_alpha") {
        oracle_alpha_points = v.get<std::size_t>();
      } else if (key == "E_max") {
        oracle_e_max = v.get<double>();
      } else {
        throw ConfigError("unknown config key '" + key + "'");
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad config value: ") + e.what());
  }
}

namespace {

ExperimentConfig at_sweep_point(const ExperimentConfig& base, SweepVar var,
                                double value) {
  ExperimentConfig cfg = base;
  cfg.sweep.reset();
  cfg.sweep_values.clear();
  switch (var) {
    case SweepVar::T:
      cfg.params.horizon = to_integer(value, "swept T");
      break;
    case SweepVar::N:
      if (cfg.channel.explicit_channel)
        throw ConfigError("cannot sweep N over an explicit channel");
      if (value < 1.0) throw ConfigError("swept N must be >= 1");
      cfg.channel.levels =
          static_cast<std::size_t>(to_integer(value, "swept N"));
      break;
    case SweepVar::m:
      cfg.params.order = value;
      break;
    case SweepVar::eta:
      cfg.params.efficiency = value;
      break;
    case SweepVar::forced_T0:
      cfg.policies = {parse_policy(
          "forced:" + std::to_string(to_integer(value, "swept forced_T0")))};
      break;
  }
  return cfg;
}

std::vector<double> sweep_points(const ExperimentConfig& config) {
  std::vector<double> values = config.sweep_values;
  if (values.empty() && config.sweep == SweepVar::forced_T0)
    for (int t0 = 1; t0 < config.params.horizon; ++t0)
      values.push_back(t0);
  std::sort(values.begin(), values.end());
  return values;
}

void validate_point(const ExperimentConfig& cfg) {
  cfg.params.validate();
  (void)cfg.channel.build();
  if (cfg.policies.empty()) throw ConfigError("at least one policy is required");
  for (const auto& p : cfg.policies) validate_policy(p.spec, cfg.params.horizon);
}

}  // namespace

void ExperimentConfig::validate() const {
  if (episodes < 1) throw ConfigError("episodes must be >= 1");
  if (!(initial_energy >= 0.0) || !std::isfinite(initial_energy))
    throw ConfigError("initial battery E1 must be >= 0");
  if (!sweep) {
    validate_point(*this);
    return;
  }
  params.validate();
  const auto values = sweep_points(*this);
  if (values.empty()) throw ConfigError("sweep needs at least one value");
  for (double v : values) validate_point(at_sweep_point(*this, *sweep, v));
}

nlohmann::json tables_report(const ExperimentConfig& config) {
  config.params.validate();
  return PolicyTables(config.params, config.channel.build()).to_json();
}

namespace {

std::vector<ResultRecord> run_point(const ExperimentConfig& cfg,
                                    std::string_view sweep_var,
                                    std::optional<double> sweep_value) {
  if (!cfg.seed) throw ConfigError("a master seed must be resolved first");
  validate_point(cfg);
  const DiscreteChannel channel = cfg.channel.build();
  const PolicyTables tables(cfg.params, channel);
  MonteCarloOptions options{cfg.episodes, *cfg.seed, cfg.workers,
                            cfg.initial_energy};
  std::vector<ResultRecord> records;
  for (const auto& policy : cfg.policies) {
    const auto s =
        run_monte_carlo(cfg.params, channel, tables, policy.spec, options);
    records.push_back({std::string(sweep_var), sweep_value, policy.name,
                       s.episodes, s.mean_bits, s.ci95, s.mean_harvested,
                       s.mean_stop_slot, s.seed});
  }
  return records;
}

void sort_records(std::vector<ResultRecord>& records) {
  std::stable_sort(records.begin(), records.end(),
                   [](const ResultRecord& a, const ResultRecord& b) {
                     const double va = a.sweep_value.value_or(0.0);
                     const double vb = b.sweep_value.value_or(0.0);
                     if (va != vb) return va < vb;
                     return a.policy < b.policy;
                   });
}

}  // namespace

std::vector<ResultRecord> simulate(const ExperimentConfig& config) {
  config.validate();
  auto records = run_point(config, "none", std::nullopt);
  sort_records(records);
  return records;
}

std::vector<ResultRecord> sweep(const ExperimentConfig& config) {
  if (!config.sweep) throw ConfigError("no sweep variable given");
  config.validate();
  std::vector<ResultRecord> records;
  for (double v : sweep_points(config)) {
    auto point = run_point(at_sweep_point(config, *config.sweep, v),
                           to_string(*config.sweep), v);
    records.insert(records.end(), point.begin(), point.end());
  }
  sort_records(records);
  return records;
}

std::string render_csv(const std::vector<ResultRecord>& records) {
  std::ostringstream os;
  os << kCsvHeader << '\n';
  for (const auto& r : records) {
    os << r.sweep_var << ','
       << (r.sweep_value ? format_double(*r.sweep_value) : std::string())
       << ',' << r.policy << ',' << r.episodes << ','
       << format_double(r.mean_bits) << ',' << format_double(r.ci95) << ','
       << format_double(r.mean_harvest) << ','
       << format_double(r.mean_stop_slot) << ',' << r.seed << '\n';
  }
  return os.str();
}

std::string render_json(const std::vector<ResultRecord>& records) {
  nlohmann::ordered_json out = nlohmann::ordered_json::array();
  for (const auto& r : records) {
    nlohmann::ordered_json o;
    o["sweep_var"] = r.sweep_var;
    o["sweep_value"] = r.sweep_value ? nlohmann::ordered_json(*r.sweep_value)
                                     : nlohmann::ordered_json(nullptr);
    o["policy"] = r.policy;
    o["episodes"] = r.episodes;
    o["mean_bits"] = r.mean_bits;
    o["ci95"] = r.ci95;
    o["mean_harvest_J"] = r.mean_harvest;
    o["mean_T0"] = r.mean_stop_slot;
    o["seed"] = r.seed;
    out.push_back(std::move(o));
  }
  return out.dump(2) + "\n";
}

std::vector<ResultRecord> parse_csv(std::string_view text) {
  std::vector<ResultRecord> records;
  std::istringstream is{std::string(text)};
  std::string line;
  if (!std::getline(is, line) || line != kCsvHeader)
    throw ConfigError("CSV header mismatch");
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) f.push_back(cell);
    if (line.back() == ',') f.emplace_back();
    if (f.size() != 9) throw ConfigError("CSV row has wrong column count");
    ResultRecord r;
    r.sweep_var = f[0];
    if (!f[1].empty()) r.sweep_value = parse_number(f[1], "sweep_value");
    r.policy = f[2];
    r.episodes = static_cast<std::size_t>(parse_number(f[3], "episodes"));
    r.mean_bits = parse_number(f[4], "mean_bits");
    r.ci95 = parse_number(f[5], "ci95");
    r.mean_harvest = parse_number(f[6], "mean_harvest_J");
    r.mean_stop_slot = parse_number(f[7], "mean_T0");
    r.seed = std::stoull(f[8]);
    records.push_back(std::move(r));
  }
  return records;
}

std::vector<ResultRecord> parse_json(std::string_view text) {
  std::vector<ResultRecord> records;
  try {
    for (const auto& o : nlohmann::json::parse(text)) {
      ResultRecord r;
      r.sweep_var = o.at("sweep_var").get<std::string>();
      if (!o.at("sweep_value").is_null())
        r.sweep_value = o.at("sweep_value").get<double>();
      r.policy = o.at("policy").get<std::string>();
      r.episodes = o.at("episodes").get<std::size_t>();
      r.mean_bits = o.at("mean_bits").get<double>();
      r.ci95 = o.at("ci95").get<double>();
      r.mean_harvest = o.at("mean_harvest_J").get<double>();
      r.mean_stop_slot = o.at("mean_T0").get<double>();
      r.seed = o.at("seed").get<std::uint64_t>();
      records.push_back(std::move(r));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad results JSON: ") + e.what());
  }
  return records;
}

nlohmann::json OracleReport::to_json() const {
  return {{"alpha_grid_step", alpha_step},
          {"energy_grid_step", energy_step},
          {"E_max", e_max},
          {"it_max_rel_error", it_max_rel_error},
          {"alpha_max_abs_error", alpha_max_abs_error},
          {"single_crossing", single_crossing},
          {"threshold_max_abs_error", threshold_max_abs_error},
          {"thresholds_on_grid", thresholds_on_grid},
          {"thresholds_beyond_grid", thresholds_beyond_grid},
          {"thresholds_consistent", thresholds_consistent},
          {"J1_at_E1", stopping_value_at_start}};
}

OracleReport compare_with_oracle(const SystemParams& params,
                                 const DiscreteChannel& channel,
                                 const oracle::GridSpec& grid,
                                 double initial_energy) {
  const PolicyTables tables(params, channel);
  const QTable& q = tables.q();
  const int horizon = params.horizon;

  OracleReport rep;
  rep.alpha_step = grid.alpha_step();
  rep.energy_step = grid.energy_step();
  rep.e_max = grid.e_max;

  const auto it = oracle::dp_it_value(params, channel, grid);
  for (int t = 1; t <= horizon; ++t) {
    for (std::size_t k = 1; k < it.grid().size(); ++k) {
      const double e = it.grid().energy(k);
      for (std::size_t n = 0; n < channel.size(); ++n) {
        const double g = channel.level(n);
        const double exact = value(t, e, g, q);
        rep.it_max_rel_error = std::max(
            rep.it_max_rel_error, std::abs(it.value(t, k, n) - exact) / exact);
        rep.alpha_max_abs_error =
            std::max(rep.alpha_max_abs_error,
                     std::abs(it.alpha(t, k, n) - alpha_star(t, g, q)));
      }
    }
  }

  const auto stopping = oracle::dp_stopping(params, channel, q, grid);
  for (int t = 1; t < horizon; ++t) {
    std::optional<double> found;
    try {
      found = oracle::extract_threshold(stopping, t);
    } catch (const InvariantViolation&) {
      rep.single_crossing = false;
      rep.thresholds_consistent = false;
      continue;
    }
    const double gamma = tables.gamma(t);
    if (found) {
      ++rep.thresholds_on_grid;
      const double err = std::abs(*found - gamma);
      rep.threshold_max_abs_error = std::max(rep.threshold_max_abs_error, err);
      if (err > rep.energy_step) rep.thresholds_consistent = false;
    } else {
      ++rep.thresholds_beyond_grid;
      if (gamma < grid.e_max - rep.energy_step)
        rep.thresholds_consistent = false;
    }
  }
  rep.stopping_value_at_start = stopping.value_at(1, initial_energy);
  return rep;
}

OracleReport oracle_check(const ExperimentConfig& config) {
  config.params.validate();
  const DiscreteChannel channel = config.channel.build();
  auto grid = oracle::default_grid(config.params, channel,
                                   config.oracle_energy_points,
                                   config.oracle_alpha_points);
  if (config.oracle_e_max > 0.0) grid.e_max = config.oracle_e_max;
  grid.validate();
  return compare_with_oracle(config.params, channel, grid,
                             config.initial_energy);
}

}  // namespace wpt
