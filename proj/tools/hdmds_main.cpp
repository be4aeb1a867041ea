// Command-line frontend: `test` runs the martingale difference test on a CSV
// panel, `simulate` writes panels from the built-in models, `experiment`
// drives Monte Carlo size/power studies, `baseline` runs the portmanteau
// white-noise tests. Exit codes: 0 success, 2 config error, 3 data error,
// 4 numerical error.

#include <CLI11.hpp>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "hdmds/baselines.hpp"
#include "hdmds/bootstrap.hpp"
#include "hdmds/dgp.hpp"
#include "hdmds/experiment.hpp"
#include "hdmds/panel.hpp"
#include "hdmds/serialize.hpp"

namespace {

void write_text(const std::string& path, const std::string& text) {
  if (path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw hdmds::data_error("cannot open output file: " + path);
  out << text;
}

std::string panel_to_csv(const hdmds::Panel& panel) {
  std::string out;
  char buf[64];
  for (Eigen::Index t = 0; t < panel.n(); ++t) {
    for (Eigen::Index c = 0; c < panel.p(); ++c) {
      std::snprintf(buf, sizeof(buf), "%.17g", panel.data(t, c));
      out += buf;
      out += (c + 1 < panel.p()) ? ',' : '\n';
    }
  }
  return out;
}

std::string cell_label(const hdmds::CellSpec& cell) {
  std::string label = hdmds::kernel_name(cell.kernel) + "/" +
                      hdmds::map_name(cell.map) + "/K" +
                      std::to_string(cell.lags) + "/" +
                      hdmds::variant_name(cell.variant);
  if (cell.bandwidth) label += "/b=" + std::to_string(*cell.bandwidth);
  return label;
}

std::string report_table(const hdmds::ExperimentReport& report) {
  std::string out;
  char line[160];
  std::snprintf(line, sizeof(line), "%-36s %10s %8s %8s\n", "cell", "reject%",
                "mc_se%", "rejects");
  out += line;
  for (const auto& c : report.cells) {
    std::snprintf(line, sizeof(line), "%-36s %10.2f %8.2f %5d/%d\n",
                  cell_label(c.cell).c_str(), 100.0 * c.rejection_rate,
                  100.0 * c.mc_se, c.rejections, c.replications);
    out += line;
  }
  return out;
}

std::string report_csv(const hdmds::ExperimentReport& report, double a,
                       bool header) {
  std::string out;
  if (header) {
    out += "a,map,lags,kernel,variant,rejection_rate,mc_se,rejections,replications\n";
  }
  char line[256];
  for (const auto& c : report.cells) {
    std::snprintf(line, sizeof(line), "%.17g,%s,%d,%s,%s,%.17g,%.17g,%d,%d\n",
                  a, hdmds::map_name(c.cell.map).c_str(), c.cell.lags,
                  hdmds::kernel_name(c.cell.kernel).c_str(),
                  hdmds::variant_name(c.cell.variant).c_str(),
                  c.rejection_rate, c.mc_se, c.rejections, c.replications);
    out += line;
  }
  return out;
}

std::uint64_t entropy_seed() {
  std::random_device dev;
  return (static_cast<std::uint64_t>(dev()) << 32) ^ dev();
}

struct TestArgs {
  std::string input, output;
  std::string map = "linear";
  int lags = 0;
  std::string kernel = "bartlett";
  double bandwidth = 0.0;
  bool bandwidth_given = false;
  int draws = 2000;
  double alpha = 0.05;
  std::uint64_t seed = 0;
  bool seed_given = false;
  bool centered = false;
  bool emit_draws = false;
  int threads = 1;
};

int run_test(const TestArgs& args) {
  const hdmds::Panel panel = hdmds::load_panel_file(args.input);

  hdmds::TestConfig config;
  config.map = hdmds::parse_map(args.map);
  config.lags = args.lags;
  config.kernel = hdmds::parse_kernel(args.kernel);
  if (args.bandwidth_given) config.bandwidth = args.bandwidth;
  config.draws = args.draws;
  config.alpha = args.alpha;
  config.seed = args.seed_given ? args.seed : entropy_seed();
  config.variant =
      args.centered ? hdmds::StatVariant::Centered : hdmds::StatVariant::Plain;
  config.keep_draws = args.emit_draws;
  config.threads = args.threads;
  if (!args.seed_given) {
    std::cerr << "seed not given; using " << config.seed << "\n";
  }

  const hdmds::TestResult result = hdmds::run_mds_test(panel, config);
  write_text(args.output, hdmds::to_json(result).dump(2) + "\n");
  return 0;
}

struct SimulateArgs {
  std::string model = "m1";
  Eigen::Index n = 0, p = 0;
  double a = 0.0;
  int burn_in = 500;
  std::uint64_t seed = 0;
  bool seed_given = false;
  std::string output;
};

int run_simulate(const SimulateArgs& args) {
  hdmds::DgpSpec spec;
  spec.model = hdmds::parse_model(args.model);
  spec.n = args.n;
  spec.p = args.p;
  spec.a = args.a;
  spec.burn_in = args.burn_in;
  spec.seed = args.seed_given ? args.seed : entropy_seed();
  if (!args.seed_given) {
    std::cerr << "seed not given; using " << spec.seed << "\n";
  }
  write_text(args.output, panel_to_csv(hdmds::simulate(spec)));
  return 0;
}

struct ExperimentArgs {
  std::string config_path, output, csv;
  int threads = 0;  // 0 -> value from config
};

int run_experiment_cmd(const ExperimentArgs& args) {
  std::ifstream in(args.config_path);
  if (!in) throw hdmds::data_error("cannot open config file: " + args.config_path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw hdmds::config_error(std::string("experiment config: invalid JSON: ") +
                              e.what());
  }
  hdmds::ParsedExperiment parsed = hdmds::parse_experiment_config(j);
  if (args.threads > 0) parsed.config.threads = args.threads;

  nlohmann::json out;
  std::string csv_text;
  double total_runtime = 0.0;
  if (parsed.a_grid.empty()) {
    const hdmds::ExperimentReport report = hdmds::run_experiment(parsed.config);
    out = hdmds::to_json(report);
    total_runtime = report.runtime_seconds;
    csv_text = report_csv(report, parsed.config.dgp.a, true);
    if (!args.output.empty()) std::cout << report_table(report);
  } else {
    const auto curve = hdmds::run_power_curve(parsed.config, parsed.a_grid);
    out = hdmds::to_json(curve, parsed.config);
    bool header = true;
    for (const auto& [a, report] : curve) {
      total_runtime += report.runtime_seconds;
      csv_text += report_csv(report, a, header);
      header = false;
      if (!args.output.empty()) {
        std::cout << "a = " << a << "\n" << report_table(report);
      }
    }
  }
  write_text(args.output, out.dump(2) + "\n");
  if (!args.csv.empty()) write_text(args.csv, csv_text);
  std::cerr << "experiment completed in " << total_runtime << " s\n";
  return 0;
}

struct BaselineArgs {
  std::string input, output;
  int lags = 0;
  std::string variant = "bp";
};

int run_baseline(const BaselineArgs& args) {
  const hdmds::Panel panel = hdmds::load_panel_file(args.input);
  const hdmds::PortmanteauVariant variant = hdmds::parse_portmanteau(args.variant);
  const hdmds::PortmanteauResult result =
      hdmds::portmanteau(panel, args.lags, variant);
  write_text(args.output,
             hdmds::to_json(result, panel.n(), panel.p(), args.lags).dump(2) + "\n");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"High-dimensional martingale difference hypothesis testing"};
  app.require_subcommand(1);

  TestArgs test_args;
  auto* test_cmd = app.add_subcommand("test", "Run the MDS test on a CSV panel");
  test_cmd->add_option("--input", test_args.input, "Panel CSV path")->required();
  test_cmd->add_option("--map", test_args.map, "Component map: linear|linquad|cos");
  test_cmd->add_option("--lags", test_args.lags, "Number of lags K")->required();
  test_cmd->add_option("--kernel", test_args.kernel, "Kernel: qs|parzen|bartlett");
  auto* test_bw =
      test_cmd->add_option("--bandwidth", test_args.bandwidth,
                           "Explicit bandwidth (default: Andrews selection)");
  test_cmd->add_option("--draws", test_args.draws, "Bootstrap draw count B");
  test_cmd->add_option("--alpha", test_args.alpha, "Significance level");
  auto* test_seed =
      test_cmd->add_option("--seed", test_args.seed, "Master RNG seed");
  test_cmd->add_flag("--centered", test_args.centered,
                     "Test against an unknown common mean");
  test_cmd->add_flag("--emit-draws", test_args.emit_draws,
                     "Include sorted bootstrap draws in the output");
  test_cmd->add_option("--threads", test_args.threads, "Worker threads");
  test_cmd->add_option("--output", test_args.output,
                       "Result JSON path (default: stdout)");

  SimulateArgs sim_args;
  auto* sim_cmd = app.add_subcommand("simulate", "Simulate a builtin model");
  sim_cmd->add_option("--model", sim_args.model, "m1..m6 or m1p|m2p|m3p")
      ->required();
  sim_cmd->add_option("--n", sim_args.n, "Sample size")->required();
  sim_cmd->add_option("--p", sim_args.p, "Dimension")->required();
  sim_cmd->add_option("--a", sim_args.a, "Perturbation distance (m1p-m3p)");
  sim_cmd->add_option("--burn-in", sim_args.burn_in, "Warm-up steps");
  auto* sim_seed = sim_cmd->add_option("--seed", sim_args.seed, "Master RNG seed");
  sim_cmd->add_option("--output", sim_args.output,
                      "Panel CSV path (default: stdout)");

  ExperimentArgs exp_args;
  auto* exp_cmd =
      app.add_subcommand("experiment", "Run a Monte Carlo size/power study");
  exp_cmd->add_option("--config", exp_args.config_path, "Experiment config JSON")
      ->required();
  exp_cmd->add_option("--output", exp_args.output,
                      "Report JSON path (default: stdout)");
  exp_cmd->add_option("--csv", exp_args.csv, "Also export the per-cell CSV matrix");
  exp_cmd->add_option("--threads", exp_args.threads,
                      "Worker threads (overrides config)");

  BaselineArgs base_args;
  auto* base_cmd =
      app.add_subcommand("baseline", "Run a portmanteau white-noise test");
  base_cmd->add_option("--input", base_args.input, "Panel CSV path")->required();
  base_cmd->add_option("--lags", base_args.lags, "Number of lags K")->required();
  base_cmd->add_option("--variant", base_args.variant, "bp|hs|lm");
  base_cmd->add_option("--output", base_args.output,
                       "Result JSON path (default: stdout)");

  try {
    app.parse(argc, argv);
    test_args.seed_given = test_seed->count() > 0;
    test_args.bandwidth_given = test_bw->count() > 0;
    sim_args.seed_given = sim_seed->count() > 0;
    if (test_cmd->parsed()) return run_test(test_args);
    if (sim_cmd->parsed()) return run_simulate(sim_args);
    if (exp_cmd->parsed()) return run_experiment_cmd(exp_args);
    if (base_cmd->parsed()) return run_baseline(base_args);
    return 2;
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const hdmds::config_error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const hdmds::data_error& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 3;
  } catch (const hdmds::numerical_error& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
