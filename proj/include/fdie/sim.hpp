#ifndef FDIE_SIM_HPP
#define FDIE_SIM_HPP

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "fdie/linalg.hpp"

namespace fdie {

/// Discrete LTI quadruple with joint process/measurement noise covariance
///   x(k+1) = A x(k) + B u(k) + w(k)
///   y(k)   = C x(k) + v(k),   cov[w;v] = [[Q,S],[S',R]].
struct StateSpaceModel {
  Mat A, B, C;
  Mat Q, R, S;

  int n() const { return static_cast<int>(A.rows()); }
  int m() const { return static_cast<int>(B.cols()); }
  int l() const { return static_cast<int>(C.rows()); }

  /// Dimension and covariance-symmetry checks; throws on mismatch.
  void validate() const;
  bool is_stable() const;
  /// Rank of the depth-n observability stack equals n.
  bool is_observable() const;
  /// H_beta = C A^beta B for beta = 0..count-1.
  std::vector<Mat> markov(int count) const;
};

enum class FaultShape { none, step, sinusoid };

/// Additive per-channel fault waveform: zero before onset, then a constant
/// bias or a sinusoid amplitude*sin(omega*k).
struct FaultSignal {
  FaultShape shape = FaultShape::none;
  int onset = 0;
  double severity = 0.0;  // step level or sinusoid amplitude
  double omega = 0.0;     // rad/sample, sinusoid only

  double value_at(int k) const;

  static FaultSignal none() { return {}; }
  static FaultSignal step(int onset, double severity);
  static FaultSignal sine(int onset, double amplitude, double omega);
};

struct FaultScenario {
  std::vector<FaultSignal> actuator;  // m channels (empty = healthy)
  std::vector<FaultSignal> sensor;    // l channels (empty = healthy)

  static FaultScenario healthy() { return {}; }
  bool empty() const { return actuator.empty() && sensor.empty(); }
  Vec actuator_at(int k, int m) const;
  Vec sensor_at(int k, int l) const;
};

/// Time-indexed input/output record. Columns are samples. For closed-loop
/// runs the external reference that generated the inputs is kept alongside,
/// so identification can regress on the exogenous signal.
struct IoDataset {
  Mat U;  // m x T
  Mat Y;  // l x T
  Mat reference;  // m x T when produced by closed_loop_sim, else empty
  std::uint64_t seed = 0;

  int T() const { return static_cast<int>(U.cols()); }
  int m() const { return static_cast<int>(U.rows()); }
  int l() const { return static_cast<int>(Y.rows()); }
};

/// Deterministic Gaussian sampler (Box-Muller over mt19937_64), so seeded
/// runs reproduce bit-identically across platforms.
class GaussianSampler {
 public:
  explicit GaussianSampler(std::uint64_t seed);
  double operator()();
  Vec vector(Eigen::Index dim);

 private:
  std::mt19937_64 gen_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

/// Maximal-length PRBS (10-bit LFSR, taps 10 and 7, period 1023).
/// Channels run the same m-sequence at phase offsets of period/m so the
/// multichannel regressors never become collinear.
Mat prbs(int T, int channels, double amplitude, std::uint64_t seed,
         int register_length = 10);

struct SimResult {
  IoDataset data;
  Mat X;  // n x (T+1) state trace
};

/// Iterates the faulty dynamics. Faults add through B (actuator) and on the
/// output (sensor); the dataset records the commanded u and measured y.
SimResult simulate(const StateSpaceModel& model, const Mat& input,
                   const FaultScenario& scenario, bool noise_on,
                   std::uint64_t seed, const Vec& x0 = Vec());

/// Zero-order-hold discretisation via the augmented matrix exponential.
std::pair<Mat, Mat> zoh_discretize(const Mat& Ac, const Mat& Bc, double dt);

/// Simulates u(k) = -Ky y(k) + xi(k) and records both the realized input
/// and the reference. Refuses when rho(A - B Ky C) >= 1.
SimResult closed_loop_sim(const StateSpaceModel& model, const Mat& Ky,
                          const Mat& reference, const FaultScenario& scenario,
                          bool noise_on, std::uint64_t seed,
                          const Vec& x0 = Vec());

}  // namespace fdie

#endif
