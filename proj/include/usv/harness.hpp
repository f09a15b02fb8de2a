// Run statistics and the batch experiment runner.
#pragma once

#include "usv/config.hpp"
#include "usv/simulator.hpp"

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace usv {

struct ErrorStats {
  double mean_position = 0.0;      // m
  double std_position = 0.0;       // m, population
  double mean_heading_deg = 0.0;   // absolute wrapped error
  double std_heading_deg = 0.0;
  std::size_t samples = 0;
};

// Streaming mean/variance (Welford) that can be merged across chunks.
class RunningStat {
 public:
  void add(double x);
  void merge(const RunningStat& other);
  std::size_t count() const { return n_; }
  double mean() const { return mean_; }
  double variance() const;  // population
 private:
  std::size_t n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

class ErrorAccumulator {
 public:
  // error = eta - eta_d, heading in rad
  void add(const Vec3& error);
  void merge(const ErrorAccumulator& other);
  ErrorStats stats() const;
 private:
  RunningStat position_;
  RunningStat heading_;
};

ErrorStats compute_error_stats(const SimLog& log);

struct WindStats {
  double mean_speed = 0.0;          // m/s
  double std_speed = 0.0;           // m/s
  double mean_direction_deg = 0.0;  // circular mean in [0, 360)
  double std_direction_deg = 0.0;   // circular std
  double intensity_percent = 0.0;   // TKE / mean speed
  std::size_t samples = 0;
};

// Raw apparent-wind samples at a fixed spacing `dt`.
WindStats compute_wind_stats(std::span<const WindSample> samples, double dt);
// Uses the raw anemometer samples recorded in the log.
WindStats compute_wind_stats(const SimLog& log);

struct MatrixCell {
  std::size_t scenario_index = 0;
  std::string scenario;
  ControllerKind controller = ControllerKind::pd;
  bool feedforward = false;
  std::uint64_t seed = 1;
};

struct CellResult {
  MatrixCell cell;
  bool ok = false;
  std::string error;
  ErrorStats errors;
  std::optional<WindStats> wind;
  std::filesystem::path log_path;
};

// Seed-averaged statistics of one (scenario, controller, feedforward) group.
struct SummaryRow {
  std::string scenario;
  ControllerKind controller = ControllerKind::pd;
  bool feedforward = false;
  std::size_t runs = 0;
  ErrorStats errors;
  std::optional<WindStats> wind;
};

struct MatrixReport {
  std::string name;
  std::vector<CellResult> cells;
  std::vector<SummaryRow> summary;
  std::size_t failures() const;
};

struct MatrixOptions {
  std::optional<std::filesystem::path> log_dir;  // per-cell CSV logs when set
  unsigned threads = 0;                          // overrides the config when nonzero
};

// Cells enumerate scenario-major, then controller, feedforward and seed.
std::vector<MatrixCell> enumerate_cells(const MatrixConfig& cfg,
                                        const std::vector<ScenarioFile>& scenarios);

MatrixReport run_experiment_matrix(const MatrixConfig& cfg, const MatrixOptions& opts = {});
MatrixReport run_experiment_matrix(const MatrixConfig& cfg,
                                   const std::vector<ScenarioFile>& scenarios,
                                   const MatrixOptions& opts = {});

std::string cell_label(ControllerKind kind, bool feedforward);

// One fixed-width table per scenario: controller variants as columns,
// error and wind statistics as rows.
std::string format_summary_table(const MatrixReport& report);
std::string summary_csv(const MatrixReport& report);
std::string summary_json(const MatrixReport& report);

std::string stats_json(const ErrorStats& e, const std::optional<WindStats>& w);
std::string stats_csv(const ErrorStats& e, const std::optional<WindStats>& w);

}  // namespace usv
