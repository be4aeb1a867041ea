#pragma once

#include <json.hpp>
#include <string>
#include <vector>

#include "hdmds/baselines.hpp"
#include "hdmds/bootstrap.hpp"
#include "hdmds/dgp.hpp"
#include "hdmds/errors.hpp"
#include "hdmds/experiment.hpp"

// JSON schemas for results and experiment configs. Keys serialize in
// alphabetical order and contain nothing volatile (no timestamps, no thread
// counts), so reports are byte-stable for a fixed configuration.
namespace hdmds {

inline std::string map_name(MapKind map) {
  switch (map) {
    case MapKind::Linear:
      return "linear";
    case MapKind::LinearQuadratic:
      return "linquad";
    case MapKind::Cosine:
      return "cos";
  }
  return "?";
}

inline MapKind parse_map(const std::string& name) {
  if (name == "linear") return MapKind::Linear;
  if (name == "linquad") return MapKind::LinearQuadratic;
  if (name == "cos") return MapKind::Cosine;
  throw config_error("unknown map '" + name + "' (expected linear|linquad|cos)");
}

inline KernelFamily parse_kernel(const std::string& name) {
  if (name == "qs") return KernelFamily::QuadraticSpectral;
  if (name == "parzen") return KernelFamily::Parzen;
  if (name == "bartlett") return KernelFamily::Bartlett;
  throw config_error("unknown kernel '" + name +
                     "' (expected qs|parzen|bartlett)");
}

inline std::string variant_name(StatVariant v) {
  return v == StatVariant::Plain ? "plain" : "centered";
}

inline StatVariant parse_variant(const std::string& name) {
  if (name == "plain") return StatVariant::Plain;
  if (name == "centered") return StatVariant::Centered;
  throw config_error("unknown variant '" + name +
                     "' (expected plain|centered)");
}

inline std::string model_name(DgpModel m) {
  switch (m) {
    case DgpModel::M1: return "m1";
    case DgpModel::M2: return "m2";
    case DgpModel::M3: return "m3";
    case DgpModel::M4: return "m4";
    case DgpModel::M5: return "m5";
    case DgpModel::M6: return "m6";
    case DgpModel::M1p: return "m1p";
    case DgpModel::M2p: return "m2p";
    case DgpModel::M3p: return "m3p";
  }
  return "?";
}

inline DgpModel parse_model(const std::string& name) {
  if (name == "m1") return DgpModel::M1;
  if (name == "m2") return DgpModel::M2;
  if (name == "m3") return DgpModel::M3;
  if (name == "m4") return DgpModel::M4;
  if (name == "m5") return DgpModel::M5;
  if (name == "m6") return DgpModel::M6;
  if (name == "m1p") return DgpModel::M1p;
  if (name == "m2p") return DgpModel::M2p;
  if (name == "m3p") return DgpModel::M3p;
  throw config_error("unknown model '" + name + "' (expected m1..m6, m1p..m3p)");
}

inline PortmanteauVariant parse_portmanteau(const std::string& name) {
  if (name == "bp") return PortmanteauVariant::BoxPierce;
  if (name == "hs") return PortmanteauVariant::Hosking;
  if (name == "lm") return PortmanteauVariant::LiMcLeod;
  throw config_error("unknown baseline variant '" + name +
                     "' (expected bp|hs|lm)");
}

inline nlohmann::json to_json(const TestResult& r) {
  nlohmann::json j;
  j["statistic"] = r.statistic;
  j["critical_value"] = r.critical_value;
  j["p_value"] = r.p_value;
  j["reject"] = r.reject;
  j["per_lag"] = std::vector<double>(r.per_lag.begin(), r.per_lag.end());
  nlohmann::json argmax = nlohmann::json::array();
  for (const auto& a : r.argmax_per_lag) {
    argmax.push_back({a.phi_index, a.series_index});
  }
  j["argmax_per_lag"] = argmax;
  j["bandwidth"] = r.bandwidth;
  j["bandwidth_degenerate"] = r.bandwidth_degenerate;
  j["config"] = {
      {"map", map_name(r.config.map)},
      {"lags", r.config.lags},
      {"kernel", kernel_name(r.config.kernel)},
      {"bandwidth_mode", r.config.bandwidth ? "explicit" : "andrews"},
      {"draws", r.config.draws},
      {"alpha", r.config.alpha},
      {"seed", r.config.seed},
      {"variant", variant_name(r.config.variant)},
      {"n", r.n},
      {"p", r.p},
  };
  if (r.draws.size() > 0) {
    j["draws"] = std::vector<double>(r.draws.begin(), r.draws.end());
  }
  return j;
}

inline nlohmann::json to_json(const PortmanteauResult& r, Eigen::Index n,
                              Eigen::Index p, int lags) {
  nlohmann::json j;
  j["variant"] = portmanteau_name(r.variant);
  j["statistic"] = r.statistic;
  j["df"] = r.df;
  j["p_value"] = r.p_value;
  j["config"] = {{"lags", lags}, {"n", n}, {"p", p}};
  return j;
}

inline nlohmann::json to_json(const CellSpec& cell) {
  nlohmann::json j;
  j["map"] = map_name(cell.map);
  j["lags"] = cell.lags;
  j["kernel"] = kernel_name(cell.kernel);
  j["variant"] = variant_name(cell.variant);
  if (cell.bandwidth) j["bandwidth"] = *cell.bandwidth;
  return j;
}

inline nlohmann::json config_echo(const ExperimentConfig& config) {
  nlohmann::json j;
  j["dgp"] = {
      {"model", model_name(config.dgp.model)},
      {"n", config.dgp.n},
      {"p", config.dgp.p},
      {"a", config.dgp.a},
      {"burn_in", config.dgp.burn_in},
  };
  nlohmann::json cells = nlohmann::json::array();
  for (const auto& c : config.cells) cells.push_back(to_json(c));
  j["cells"] = cells;
  j["replications"] = config.replications;
  j["draws"] = config.draws;
  j["alpha"] = config.alpha;
  j["seed"] = config.seed;
  return j;
}

inline nlohmann::json to_json(const ExperimentReport& report) {
  nlohmann::json j;
  j["format_version"] = 1;
  j["config"] = config_echo(report.config);
  nlohmann::json cells = nlohmann::json::array();
  for (const auto& c : report.cells) {
    nlohmann::json jc = to_json(c.cell);
    jc["rejections"] = c.rejections;
    jc["replications"] = c.replications;
    jc["rejection_rate"] = c.rejection_rate;
    jc["mc_se"] = c.mc_se;
    cells.push_back(jc);
  }
  j["cells"] = cells;
  return j;
}

inline nlohmann::json to_json(
    const std::vector<std::pair<double, ExperimentReport>>& curve,
    const ExperimentConfig& config) {
  nlohmann::json j;
  j["format_version"] = 1;
  j["config"] = config_echo(config);
  nlohmann::json grid = nlohmann::json::array();
  for (const auto& [a, report] : curve) {
    nlohmann::json point;
    point["a"] = a;
    nlohmann::json cells = nlohmann::json::array();
    for (const auto& c : report.cells) {
      nlohmann::json jc = to_json(c.cell);
      jc["rejections"] = c.rejections;
      jc["replications"] = c.replications;
      jc["rejection_rate"] = c.rejection_rate;
      jc["mc_se"] = c.mc_se;
      cells.push_back(jc);
    }
    point["cells"] = cells;
    grid.push_back(point);
  }
  j["grid"] = grid;
  return j;
}

namespace detail {

template <typename T>
T require_field(const nlohmann::json& j, const std::string& key) {
  if (!j.contains(key)) {
    throw config_error("experiment config: missing required field '" + key + "'");
  }
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw config_error("experiment config: bad field '" + key + "': " + e.what());
  }
}

template <typename T>
T optional_field(const nlohmann::json& j, const std::string& key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw config_error("experiment config: bad field '" + key + "': " + e.what());
  }
}

}  // namespace detail

struct ParsedExperiment {
  ExperimentConfig config;
  std::vector<double> a_grid;  // non-empty -> power curve
};

inline ParsedExperiment parse_experiment_config(const nlohmann::json& j) {
  ParsedExperiment parsed;
  auto& config = parsed.config;

  const nlohmann::json dgp = detail::require_field<nlohmann::json>(j, "dgp");
  config.dgp.model = parse_model(detail::require_field<std::string>(dgp, "model"));
  config.dgp.n = detail::require_field<Eigen::Index>(dgp, "n");
  config.dgp.p = detail::require_field<Eigen::Index>(dgp, "p");
  config.dgp.a = detail::optional_field<double>(dgp, "a", 0.0);
  config.dgp.burn_in = detail::optional_field<int>(dgp, "burn_in", 500);

  const nlohmann::json cells = detail::require_field<nlohmann::json>(j, "cells");
  if (!cells.is_array() || cells.empty()) {
    throw config_error("experiment config: 'cells' must be a non-empty array");
  }
  for (const auto& jc : cells) {
    CellSpec cell;
    cell.map = parse_map(detail::require_field<std::string>(jc, "map"));
    cell.lags = detail::require_field<int>(jc, "lags");
    cell.kernel = parse_kernel(detail::require_field<std::string>(jc, "kernel"));
    cell.variant =
        parse_variant(detail::optional_field<std::string>(jc, "variant", "plain"));
    if (jc.contains("bandwidth")) {
      cell.bandwidth = detail::require_field<double>(jc, "bandwidth");
    }
    config.cells.push_back(cell);
  }

  config.replications = detail::require_field<int>(j, "replications");
  config.draws = detail::optional_field<int>(j, "draws", 2000);
  config.alpha = detail::optional_field<double>(j, "alpha", 0.05);
  if (!j.contains("seed")) {
    throw config_error(
        "experiment config: 'seed' is required (reproducibility-first)");
  }
  config.seed = detail::require_field<std::uint64_t>(j, "seed");
  config.threads = detail::optional_field<int>(j, "threads", 1);

  parsed.a_grid = detail::optional_field<std::vector<double>>(j, "a_grid", {});
  return parsed;
}

}  // namespace hdmds
