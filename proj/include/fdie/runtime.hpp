#ifndef FDIE_RUNTIME_HPP
#define FDIE_RUNTIME_HPP

#include <functional>
#include <optional>
#include <string>

#include "fdie/synth.hpp"

namespace fdie {

/// Residual trace of one filter over one dataset. Row t corresponds to
/// filter step k = t + i (the first i samples prime the stacks).
struct ResidualTrace {
  Mat inner;        // (T-i) x il'   raw inner residual eta - Y + D U
  Mat monitored;    // (T-i) x dim   after the I_f row selection
  Vec norms;        // per-step |monitored|
  Vec windowed;     // trailing-window mean of norms (first entries repeat)
  std::string filter_id;
  int i = 0;
  int warmup = 0;   // samples excluded from decisions (filter transient)
};

struct Thresholds {
  double r_min = 0.0;
  double r_max = 0.0;
  int n_runs = 0;
  double lo_quantile = 0.005;
  double hi_quantile = 0.995;
};

/// Time-aligned fault estimates: row s estimates the fault at sample s
/// (the filter emits it i steps later).
struct FaultEstimateTrace {
  Mat f_hat;   // (T-i) x channels
  int delay = 0;
  std::string filter_id;
};

inline constexpr int kDecisionWindow = 20;

/// Runs the residual recursion over the dataset. For closed-loop datasets
/// produced with a reference record, the reference is used as the input
/// channel (the identified model is the closed-loop one).
ResidualTrace run_residual(const FilterRealization& filter,
                           const IoDataset& data, const Vec& eta0 = Vec());

/// Sensor-fault estimates from a sensor_estimation realization.
FaultEstimateTrace estimate_sensor_fault(const FilterRealization& filter,
                                         const IoDataset& data,
                                         const Vec& eta0 = Vec());

/// Actuator-fault estimates from an actuator_estimation realization.
FaultEstimateTrace estimate_actuator_fault(const FilterRealization& filter,
                                           const IoDataset& data,
                                           const Vec& eta0 = Vec());

/// Empirical quantiles of windowed residual-norm means over n_runs healthy
/// seeded runs. The generator supplies one healthy dataset per seed.
Thresholds calibrate_thresholds(
    const FilterRealization& filter,
    const std::function<IoDataset(std::uint64_t)>& healthy_run, int n_runs,
    std::uint64_t base_seed, double lo_quantile = 0.005,
    double hi_quantile = 0.995);

/// Healthy iff the windowed mean norm stays within [r_min, r_max].
bool in_band(double windowed_norm, const Thresholds& th);

/// First step (absolute sample index) at which the windowed norm leaves the
/// band, searching from `from`; -1 when it never does.
int first_alarm(const ResidualTrace& trace, const Thresholds& th, int from);

enum class IsolationVerdict { none, isolated, ambiguous };

struct IsolationResult {
  IsolationVerdict verdict = IsolationVerdict::none;
  int channel = -1;       // 1-based isolated channel
  std::vector<bool> in_band_flags;
};

/// Structured-residual isolation: the faulty channel is the one whose
/// insensitive filter stays in band while every other filter alarms.
/// `window` selects the decision samples (absolute indices).
IsolationResult isolate(const std::vector<ResidualTrace>& bank,
                        const std::vector<Thresholds>& thresholds,
                        const std::vector<int>& channels, int decide_from,
                        int decide_to, double out_fraction = 0.5);

}  // namespace fdie

#endif
