#ifndef FDIE_EVAL_HPP
#define FDIE_EVAL_HPP

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>

#include "fdie/systems.hpp"
#include "fdie/tuning.hpp"

namespace fdie {

/// Per-channel steady-error statistics over seeded end-to-end runs.
struct MonteCarloReport {
  Vec mu;         // mean of per-run steady errors
  Vec sigma2;     // variance of per-run steady errors
  int n_runs = 0;
  int successes = 0;
  int exclusions = 0;  // runs whose synthesis was infeasible
  std::uint64_t base_seed = 0;
  std::string scenario_id;
  double seconds_per_run = 0.0;
};

/// One Monte Carlo run maps a seed to per-channel steady errors, or nothing
/// when synthesis fails for that draw.
using McRun = std::function<std::optional<Vec>(std::uint64_t seed)>;

MonteCarloReport monte_carlo(const McRun& run, int n_runs,
                             std::uint64_t base_seed,
                             const std::string& scenario_id, int channels,
                             int jobs = 1,
                             std::vector<Vec>* keep_samples = nullptr);

/// Steady error: mean of (f_hat - f) over the trailing `window` samples of
/// the estimate trace (both aligned to fault time).
Vec steady_error(const FaultEstimateTrace& est, const Mat& fault_truth,
                 int window);

/// Median per-sample wall-clock cost of the filter recursion.
double timing_probe(const FilterRealization& filter, const IoDataset& data,
                    int min_samples = 10000);

// ---------------------------------------------------------------------------
// Scripted end-to-end scenarios. Each returns its key numbers and, when an
// output directory is given, writes the CSV/SVG artifact bundle.
// ---------------------------------------------------------------------------

struct Fdi4x2Result {
  int detection_alarm_at = -1;        // first alarm sample of the detection filter
  IsolationResult isolation;
  MEstimate m_est;
  FilterRealization detection_reduced;
};

/// Detection + isolation on the nonminimum-phase benchmark: PRBS
/// identification, calibrated bands, actuator-1 bias at k=150, bank
/// {q={1}, q={2}}.
Fdi4x2Result scenario_example1_fdi(std::uint64_t seed,
                                   const std::filesystem::path* out = nullptr);

struct EstimationDemoResult {
  double untuned_error_pct = 0.0;
  double tuned_error_pct = 0.0;
  ErrorDynamicsEstimate error_dyn;
};

/// Sensor-2 bias estimation on the minimum-phase benchmark under the
/// two-tone input, before and after filter tuning.
EstimationDemoResult scenario_example2_estimation(
    std::uint64_t seed, const std::filesystem::path* out = nullptr);

struct Table1Report {
  MonteCarloReport sensor_untuned, sensor_tuned;
  MonteCarloReport actuator_untuned, actuator_tuned;
};

/// 400-run Monte Carlo of tuned/untuned sensor and actuator estimators on
/// the minimum-phase benchmark (input scale 1.0 = the large two-tone input,
/// 0.1 = the small one).
Table1Report scenario_table1(int n_runs, std::uint64_t base_seed,
                             double input_scale = 1.0, int jobs = 1,
                             const std::filesystem::path* out = nullptr);

struct VtolReport {
  MonteCarloReport actuator_tuned;
  MonteCarloReport sensor_tuned;
  double seconds_per_sample = 0.0;
};

/// VTOL closed-loop comparative study: reference-driven identification,
/// tuned sensor (i=2, p={1,2}) and actuator (i=3, q={1,2}) estimators,
/// sinusoid + bias faults after k=50.
VtolReport scenario_vtol(int n_runs, std::uint64_t base_seed, int jobs = 1,
                         const std::filesystem::path* out = nullptr);

}  // namespace fdie

#endif
