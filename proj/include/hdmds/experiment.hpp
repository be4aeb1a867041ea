#pragma once

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <exception>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "hdmds/bootstrap.hpp"
#include "hdmds/dgp.hpp"
#include "hdmds/errors.hpp"

namespace hdmds {

// One test configuration evaluated in every replication.
struct CellSpec {
  MapKind map = MapKind::Linear;
  int lags = 2;
  KernelFamily kernel = KernelFamily::Bartlett;
  StatVariant variant = StatVariant::Plain;
  std::optional<double> bandwidth;  // empty -> Andrews
};

struct ExperimentConfig {
  DgpSpec dgp;  // template; its seed field is ignored in favor of `seed`
  std::vector<CellSpec> cells;
  int replications = 100;
  int draws = 2000;
  double alpha = 0.05;
  std::uint64_t seed = 0;
  int threads = 1;  // parallelism hint; never affects results
};

struct CellResult {
  CellSpec cell;
  int rejections = 0;
  int replications = 0;
  double rejection_rate = 0.0;
  double mc_se = 0.0;  // sqrt(r (1 - r) / R)
};

struct ExperimentReport {
  ExperimentConfig config;
  std::vector<CellResult> cells;
  double runtime_seconds = 0.0;  // informational; excluded from serialization
};

namespace detail {

inline void validate_experiment(const ExperimentConfig& config) {
  if (config.replications < 1) {
    throw config_error("experiment: replications must be >= 1");
  }
  if (config.cells.empty()) {
    throw config_error("experiment: at least one test cell is required");
  }
}

}  // namespace detail

// Runs the Monte Carlo study: each replication simulates one panel and
// evaluates every cell on it, so cross-cell comparisons share the data.
// Replication r uses the stream substream(seed, r) for the panel and
// substream(panel_seed, c + 1) for cell c's bootstrap noise; the aggregate is
// a sum of indicators, so reports are identical for any thread count.
inline ExperimentReport run_experiment(const ExperimentConfig& config) {
  detail::validate_experiment(config);
  const auto start = std::chrono::steady_clock::now();

  const int reps = config.replications;
  const auto cells = config.cells;
  std::vector<std::vector<std::uint8_t>> reject(
      cells.size(), std::vector<std::uint8_t>(reps, 0));

  std::mutex error_mutex;
  std::exception_ptr first_error;
  std::atomic<bool> failed{false};

  detail::parallel_chunks(reps, config.threads, [&](Eigen::Index lo, Eigen::Index hi) {
    for (Eigen::Index r = lo; r < hi; ++r) {
      if (failed.load(std::memory_order_relaxed)) return;
      try {
        DgpSpec dgp = config.dgp;
        dgp.seed = substream(config.seed, static_cast<std::uint64_t>(r));
        const Panel panel = simulate(dgp);
        for (std::size_t c = 0; c < cells.size(); ++c) {
          TestConfig tc;
          tc.map = cells[c].map;
          tc.lags = cells[c].lags;
          tc.kernel = cells[c].kernel;
          tc.variant = cells[c].variant;
          tc.bandwidth = cells[c].bandwidth;
          tc.draws = config.draws;
          tc.alpha = config.alpha;
          tc.seed = substream(dgp.seed, static_cast<std::uint64_t>(c) + 1);
          tc.threads = 1;
          reject[c][r] = run_mds_test(panel, tc).reject ? 1 : 0;
        }
      } catch (...) {
        std::scoped_lock lock(error_mutex);
        if (!first_error) {
          failed.store(true, std::memory_order_relaxed);
          try {
            throw;
          } catch (const std::exception& e) {
            first_error = std::make_exception_ptr(config_error(
                "replication " + std::to_string(r + 1) + ": " + e.what()));
          } catch (...) {
            first_error = std::current_exception();
          }
        }
        return;
      }
    }
  });
  if (first_error) std::rethrow_exception(first_error);

  ExperimentReport report;
  report.config = config;
  report.cells.reserve(cells.size());
  for (std::size_t c = 0; c < cells.size(); ++c) {
    CellResult res;
    res.cell = cells[c];
    res.replications = reps;
    for (int r = 0; r < reps; ++r) res.rejections += reject[c][r];
    res.rejection_rate =
        static_cast<double>(res.rejections) / static_cast<double>(reps);
    res.mc_se = std::sqrt(res.rejection_rate * (1.0 - res.rejection_rate) /
                          static_cast<double>(reps));
    report.cells.push_back(res);
  }
  report.runtime_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  return report;
}

// Power curve: the experiment repeated over a grid of perturbation distances.
// Grid point a = 0 reproduces the base model's size experiment.
inline std::vector<std::pair<double, ExperimentReport>> run_power_curve(
    const ExperimentConfig& config, const std::vector<double>& a_grid) {
  std::vector<std::pair<double, ExperimentReport>> out;
  out.reserve(a_grid.size());
  for (const double a : a_grid) {
    ExperimentConfig point = config;
    point.dgp.a = a;
    out.emplace_back(a, run_experiment(point));
  }
  return out;
}

}  // namespace hdmds
