#include "fdie/sim.hpp"

#include <cmath>
#include <stdexcept>

#include <Eigen/Cholesky>
#include <unsupported/Eigen/MatrixFunctions>

namespace fdie {

void StateSpaceModel::validate() const {
  const int nn = n(), mm = m(), ll = l();
  if (A.rows() != nn || A.cols() != nn) throw std::invalid_argument("A not square");
  if (B.rows() != nn) throw std::invalid_argument("B row count != n");
  if (C.cols() != nn) throw std::invalid_argument("C col count != n");
  if (Q.rows() != nn || Q.cols() != nn) throw std::invalid_argument("Q must be n x n");
  if (R.rows() != ll || R.cols() != ll) throw std::invalid_argument("R must be l x l");
  if (S.rows() != nn || S.cols() != ll) throw std::invalid_argument("S must be n x l");
  Mat blk(nn + ll, nn + ll);
  blk << Q, S, S.transpose(), R;
  if ((blk - blk.transpose()).cwiseAbs().maxCoeff() > 1e-9)
    throw std::invalid_argument("joint noise covariance not symmetric");
  Eigen::SelfAdjointEigenSolver<Mat> es(blk);
  if (es.eigenvalues().minCoeff() < -1e-9)
    throw std::invalid_argument("joint noise covariance not PSD");
  if (mm < 1 || ll < 1) throw std::invalid_argument("need inputs and outputs");
}

bool StateSpaceModel::is_stable() const { return spectral_radius(A) < 1.0; }

bool StateSpaceModel::is_observable() const {
  Mat obs(n() * l(), n());
  Mat cak = C;
  for (int r = 0; r < n(); ++r) {
    obs.middleRows(r * l(), l()) = cak;
    cak = cak * A;
  }
  return numerical_rank(obs) == n();
}

std::vector<Mat> StateSpaceModel::markov(int count) const {
  std::vector<Mat> h;
  h.reserve(count);
  Mat cak = C;
  for (int b = 0; b < count; ++b) {
    h.push_back(cak * B);
    cak = cak * A;
  }
  return h;
}

double FaultSignal::value_at(int k) const {
  if (shape == FaultShape::none || k < onset) return 0.0;
  if (shape == FaultShape::step) return severity;
  return severity * std::sin(omega * k);
}

FaultSignal FaultSignal::step(int onset, double severity) {
  FaultSignal f;
  f.shape = FaultShape::step;
  f.onset = onset;
  f.severity = severity;
  return f;
}

FaultSignal FaultSignal::sine(int onset, double amplitude, double omega) {
  FaultSignal f;
  f.shape = FaultShape::sinusoid;
  f.onset = onset;
  f.severity = amplitude;
  f.omega = omega;
  return f;
}

static Vec scenario_values(const std::vector<FaultSignal>& sig, int k, int dim,
                           const char* what) {
  Vec out = Vec::Zero(dim);
  if (sig.empty()) return out;
  if (static_cast<int>(sig.size()) != dim)
    throw std::invalid_argument(std::string(what) +
                                " fault channel count mismatch");
  for (int c = 0; c < dim; ++c) out(c) = sig[c].value_at(k);
  return out;
}

Vec FaultScenario::actuator_at(int k, int m) const {
  return scenario_values(actuator, k, m, "actuator");
}

Vec FaultScenario::sensor_at(int k, int l) const {
  return scenario_values(sensor, k, l, "sensor");
}

GaussianSampler::GaussianSampler(std::uint64_t seed) : gen_(seed) {}

double GaussianSampler::operator()() {
  if (have_spare_) {
    have_spare_ = false;
    return spare_;
  }
  // Box-Muller on (0,1] uniforms from the 53-bit mantissa.
  const double inv = 1.0 / 9007199254740992.0;  // 2^-53
  double u1 = ((gen_() >> 11) + 1) * inv;
  double u2 = (gen_() >> 11) * inv;
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double a = 2.0 * M_PI * u2;
  spare_ = r * std::sin(a);
  have_spare_ = true;
  return r * std::cos(a);
}

Vec GaussianSampler::vector(Eigen::Index dim) {
  Vec v(dim);
  for (Eigen::Index k = 0; k < dim; ++k) v(k) = (*this)();
  return v;
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

// Noise factor for the joint (w, v) draw; small diagonal jitter keeps the
// Cholesky defined for semidefinite covariances.
Mat joint_noise_factor(const StateSpaceModel& model) {
  const int n = model.n(), l = model.l();
  Mat cov(n + l, n + l);
  cov << model.Q, model.S, model.S.transpose(), model.R;
  Eigen::LLT<Mat> llt(cov + 1e-12 * Mat::Identity(n + l, n + l));
  if (llt.info() != Eigen::Success)
    throw std::invalid_argument("noise covariance is not PSD");
  return llt.matrixL();
}

struct LfsrState {
  std::uint32_t state;
  int length;
  std::uint32_t mask;

  int step() {
    const int bit = static_cast<int>(state & 1u);
    // x^len + x^(len-3) + 1 family; for len = 10 this is the maximal
    // polynomial x^10 + x^7 + 1.
    const std::uint32_t fb = ((state >> 0) ^ (state >> 3)) & 1u;
    state = (state >> 1) | (fb << (length - 1));
    state &= mask;
    return bit;
  }
};

}  // namespace

Mat prbs(int T, int channels, double amplitude, std::uint64_t seed,
         int register_length) {
  if (T < 1) throw std::invalid_argument("prbs: T must be positive");
  if (channels < 1) throw std::invalid_argument("prbs: need channels >= 1");
  if (register_length < 4 || register_length > 24)
    throw std::invalid_argument("prbs: register length out of range");
  const std::uint32_t mask = (1u << register_length) - 1u;
  const int period = static_cast<int>(mask);
  std::uint32_t s0 =
      static_cast<std::uint32_t>(splitmix64(seed) & mask);
  if (s0 == 0) s0 = 1;

  Mat out(channels, T);
  for (int ch = 0; ch < channels; ++ch) {
    LfsrState lfsr{s0, register_length, mask};
    // Phase-separate the channels by period/channels steps so windows of
    // the same m-sequence never overlap within any realistic FIR order.
    const int offset = ch * (period / channels);
    for (int k = 0; k < offset; ++k) lfsr.step();
    for (int k = 0; k < T; ++k)
      out(ch, k) = lfsr.step() ? amplitude : -amplitude;
  }
  return out;
}

SimResult simulate(const StateSpaceModel& model, const Mat& input,
                   const FaultScenario& scenario, bool noise_on,
                   std::uint64_t seed, const Vec& x0) {
  model.validate();
  const int n = model.n(), m = model.m(), l = model.l();
  const int T = static_cast<int>(input.cols());
  if (input.rows() != m) throw std::invalid_argument("simulate: input rows != m");
  if (T < 1) throw std::invalid_argument("simulate: empty input");

  Vec x = x0.size() ? x0 : Vec::Zero(n);
  if (x.size() != n) throw std::invalid_argument("simulate: bad x0 size");

  GaussianSampler gauss(splitmix64(seed));
  Mat noiseL;
  if (noise_on) noiseL = joint_noise_factor(model);

  SimResult res;
  res.data.U = input;
  res.data.Y = Mat(l, T);
  res.data.seed = seed;
  res.X = Mat(n, T + 1);
  for (int k = 0; k < T; ++k) {
    res.X.col(k) = x;
    Vec w = Vec::Zero(n), v = Vec::Zero(l);
    if (noise_on) {
      Vec wv = noiseL * gauss.vector(n + l);
      w = wv.head(n);
      v = wv.tail(l);
    }
    res.data.Y.col(k) =
        model.C * x + scenario.sensor_at(k, l) + v;
    x = model.A * x +
        model.B * (input.col(k) + scenario.actuator_at(k, m)) + w;
  }
  res.X.col(T) = x;
  return res;
}

std::pair<Mat, Mat> zoh_discretize(const Mat& Ac, const Mat& Bc, double dt) {
  if (dt <= 0.0) throw std::invalid_argument("zoh_discretize: dt must be > 0");
  const Eigen::Index n = Ac.rows(), m = Bc.cols();
  if (Ac.cols() != n || Bc.rows() != n)
    throw std::invalid_argument("zoh_discretize: dimension mismatch");
  Mat aug = Mat::Zero(n + m, n + m);
  aug.topLeftCorner(n, n) = Ac * dt;
  aug.topRightCorner(n, m) = Bc * dt;
  Mat e = aug.exp();
  return {e.topLeftCorner(n, n), e.topRightCorner(n, m)};
}

SimResult closed_loop_sim(const StateSpaceModel& model, const Mat& Ky,
                          const Mat& reference, const FaultScenario& scenario,
                          bool noise_on, std::uint64_t seed, const Vec& x0) {
  model.validate();
  const int n = model.n(), m = model.m(), l = model.l();
  if (Ky.rows() != m || Ky.cols() != l)
    throw std::invalid_argument("closed_loop_sim: Ky must be m x l");
  const Mat Acl = model.A - model.B * Ky * model.C;
  const double rho = spectral_radius(Acl);
  if (rho >= 1.0)
    throw std::runtime_error(
        "closed_loop_sim: closed loop unstable, spectral radius " +
        std::to_string(rho));
  const int T = static_cast<int>(reference.cols());
  if (reference.rows() != m)
    throw std::invalid_argument("closed_loop_sim: reference rows != m");

  Vec x = x0.size() ? x0 : Vec::Zero(n);
  GaussianSampler gauss(splitmix64(seed ^ 0xC10553Dull));
  Mat noiseL;
  if (noise_on) noiseL = joint_noise_factor(model);

  SimResult res;
  res.data.U = Mat(m, T);
  res.data.Y = Mat(l, T);
  res.data.reference = reference;
  res.data.seed = seed;
  res.X = Mat(n, T + 1);
  for (int k = 0; k < T; ++k) {
    res.X.col(k) = x;
    Vec w = Vec::Zero(n), v = Vec::Zero(l);
    if (noise_on) {
      Vec wv = noiseL * gauss.vector(n + l);
      w = wv.head(n);
      v = wv.tail(l);
    }
    const Vec y = model.C * x + scenario.sensor_at(k, l) + v;
    const Vec u = -Ky * y + reference.col(k);
    res.data.Y.col(k) = y;
    res.data.U.col(k) = u;
    x = model.A * x + model.B * (u + scenario.actuator_at(k, m)) + w;
  }
  res.X.col(T) = x;
  return res;
}

}  // namespace fdie
