#include "fdie/runtime.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace fdie {

namespace {

const Mat& runtime_input(const IoDataset& data) {
  return data.reference.size() ? data.reference : data.U;
}

// Row offsets of the output stack the filter equations consume.
std::vector<Eigen::Index> output_rows(const FilterSpec& spec) {
  const int l = spec.sel.l();
  if (spec.kind == FilterKind::sensor_estimation)
    return block_offsets(IndexSelection({}, {}, l, 1).p_complement(), l,
                         spec.i);
  return block_offsets(spec.sel.p_complement(), l, spec.i);
}

std::vector<Eigen::Index> input_keep_cols(const FilterSpec& spec) {
  return block_offsets(spec.sel.q_complement(), spec.sel.m(), spec.i);
}

Vec trailing_mean(const Vec& x, int window) {
  Vec out(x.size());
  double acc = 0.0;
  for (Eigen::Index k = 0; k < x.size(); ++k) {
    acc += x(k);
    if (k >= window) acc -= x(k - window);
    out(k) = acc / std::min<Eigen::Index>(k + 1, window);
  }
  return out;
}

}  // namespace

ResidualTrace run_residual(const FilterRealization& filter,
                           const IoDataset& data, const Vec& eta0) {
  const FilterSpec& spec = filter.spec;
  const Mat& U = runtime_input(data);
  const Mat& Y = data.Y;
  const int i = spec.i;
  const int T = static_cast<int>(U.cols());
  if (U.rows() != spec.sel.m() || Y.rows() != spec.sel.l())
    throw std::invalid_argument("run_residual: channel count mismatch");
  if (T <= i) throw std::invalid_argument("run_residual: record shorter than i");
  if (filter.reduced)
    throw std::invalid_argument(
        "run_residual: run the full realization; reduced filters are handled "
        "by their own recursion in tests");

  const auto y_rows = output_rows(spec);
  const auto u_cols = input_keep_cols(spec);
  const Eigen::Index d = filter.Ar.rows();
  const int lq = static_cast<int>(y_rows.size());

  Vec eta = eta0.size() ? eta0 : Vec::Zero(d);
  if (eta.size() != d) throw std::invalid_argument("run_residual: bad eta0");

  ResidualTrace tr;
  tr.i = i;
  tr.warmup = 5 * i;
  tr.inner = Mat(T - i, lq);
  const bool project = spec.sel.nq() > 0;  // I_f = leading m rows
  const int mon_dim = project ? spec.sel.m() : lq;
  tr.monitored = Mat(T - i, mon_dim);
  tr.norms = Vec(T - i);

  Vec ys(lq), us(i * spec.sel.m());
  for (int t = i; t < T; ++t) {
    for (int b = 0; b < i; ++b)
      us.segment(static_cast<Eigen::Index>(b) * spec.sel.m(), spec.sel.m()) =
          U.col(t - i + b);
    for (int r = 0; r < lq; ++r) {
      const Eigen::Index off = y_rows[r];
      ys(r) = Y(off % spec.sel.l(), t - i + off / spec.sel.l());
    }
    const Vec inner = eta - ys + filter.D_pm * us;
    tr.inner.row(t - i) = inner.transpose();
    const Vec mon = project ? Vec(inner.head(mon_dim)) : inner;
    tr.monitored.row(t - i) = mon.transpose();
    tr.norms(t - i) = mon.norm();

    Vec uq(static_cast<Eigen::Index>(u_cols.size()));
    for (size_t k = 0; k < u_cols.size(); ++k) uq(k) = us(u_cols[k]);
    eta = filter.Ar * eta + filter.Lr * ys;
    if (filter.Br.cols() > 0) eta += filter.Br * uq;
  }
  tr.windowed = trailing_mean(tr.norms, kDecisionWindow);
  return tr;
}

FaultEstimateTrace estimate_sensor_fault(const FilterRealization& filter,
                                         const IoDataset& data,
                                         const Vec& eta0) {
  if (filter.spec.kind != FilterKind::sensor_estimation)
    throw std::invalid_argument("estimate_sensor_fault: kind mismatch");
  const ResidualTrace tr = run_residual(filter, data, eta0);
  const int l = filter.spec.sel.l();
  FaultEstimateTrace est;
  est.delay = filter.spec.i;
  est.filter_id = tr.filter_id;
  // The healthy inner residual converges to minus the stacked sensor
  // faults; negating the leading block recovers f^s(k-i).
  est.f_hat = -tr.inner.leftCols(l);
  return est;
}

FaultEstimateTrace estimate_actuator_fault(const FilterRealization& filter,
                                           const IoDataset& data,
                                           const Vec& eta0) {
  if (filter.spec.kind != FilterKind::actuator_estimation)
    throw std::invalid_argument("estimate_actuator_fault: kind mismatch");
  const ResidualTrace tr = run_residual(filter, data, eta0);
  const int m = filter.spec.sel.m();
  const Mat D_pinv = pinv_tol(filter.D_pm);
  FaultEstimateTrace est;
  est.delay = filter.spec.i;
  est.filter_id = tr.filter_id;
  est.f_hat = -(tr.inner * D_pinv.transpose()).leftCols(m);
  return est;
}

Thresholds calibrate_thresholds(
    const FilterRealization& filter,
    const std::function<IoDataset(std::uint64_t)>& healthy_run, int n_runs,
    std::uint64_t base_seed, double lo_quantile, double hi_quantile) {
  if (n_runs < 10)
    throw std::invalid_argument(
        "calibrate_thresholds: fewer than 10 runs is statistically "
        "meaningless");
  std::vector<double> samples;
  for (int r = 0; r < n_runs; ++r) {
    const IoDataset data = healthy_run(base_seed + r);
    const ResidualTrace tr = run_residual(filter, data);
    for (Eigen::Index k = tr.warmup; k < tr.windowed.size(); ++k)
      samples.push_back(tr.windowed(k));
  }
  std::sort(samples.begin(), samples.end());
  auto quantile = [&](double q) {
    const double pos = q * (samples.size() - 1);
    const size_t lo = static_cast<size_t>(pos);
    const size_t hi = std::min(lo + 1, samples.size() - 1);
    const double w = pos - lo;
    return (1.0 - w) * samples[lo] + w * samples[hi];
  };
  Thresholds th;
  th.lo_quantile = lo_quantile;
  th.hi_quantile = hi_quantile;
  th.r_min = quantile(lo_quantile);
  th.r_max = quantile(hi_quantile);
  th.n_runs = n_runs;
  if (th.r_min > th.r_max) std::swap(th.r_min, th.r_max);
  return th;
}

bool in_band(double windowed_norm, const Thresholds& th) {
  return windowed_norm >= th.r_min && windowed_norm <= th.r_max;
}

int first_alarm(const ResidualTrace& trace, const Thresholds& th, int from) {
  const int start = std::max(from - trace.i, trace.warmup);
  for (Eigen::Index k = start; k < trace.windowed.size(); ++k)
    if (!in_band(trace.windowed(k), th)) return static_cast<int>(k) + trace.i;
  return -1;
}

IsolationResult isolate(const std::vector<ResidualTrace>& bank,
                        const std::vector<Thresholds>& thresholds,
                        const std::vector<int>& channels, int decide_from,
                        int decide_to, double out_fraction) {
  if (bank.empty()) throw std::invalid_argument("isolate: empty filter bank");
  if (bank.size() != thresholds.size() || bank.size() != channels.size())
    throw std::invalid_argument("isolate: bank/threshold/channel mismatch");

  IsolationResult res;
  int in_count = 0, last_in = -1;
  for (size_t f = 0; f < bank.size(); ++f) {
    const auto& tr = bank[f];
    const int lo = std::max(decide_from - tr.i, tr.warmup);
    const int hi =
        std::min<int>(decide_to - tr.i, static_cast<int>(tr.windowed.size()));
    int out = 0, total = 0;
    for (int k = lo; k < hi; ++k) {
      ++total;
      if (!in_band(tr.windowed(k), thresholds[f])) ++out;
    }
    const bool stays_in =
        total > 0 && static_cast<double>(out) / total <= out_fraction;
    res.in_band_flags.push_back(stays_in);
    if (stays_in) {
      ++in_count;
      last_in = static_cast<int>(f);
    }
  }
  if (in_count == static_cast<int>(bank.size())) {
    res.verdict = IsolationVerdict::none;
  } else if (in_count == 1) {
    res.verdict = IsolationVerdict::isolated;
    res.channel = channels[last_in];
  } else {
    res.verdict = IsolationVerdict::ambiguous;
  }
  return res;
}

}  // namespace fdie
