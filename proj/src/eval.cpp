#include "fdie/eval.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <future>
#include <numeric>

#include <nlohmann/json.hpp>

#include "fdie/csvio.hpp"

namespace fdie {

namespace {

std::uint64_t mix(std::uint64_t seed, std::uint64_t tag) {
  std::uint64_t x = seed + 0x9E3779B97F4A7C15ull * (tag + 1);
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

struct Welford {
  Vec mean, m2;
  int count = 0;
  void add(const Vec& x) {
    if (count == 0) {
      mean = Vec::Zero(x.size());
      m2 = Vec::Zero(x.size());
    }
    ++count;
    const Vec d = x - mean;
    mean += d / count;
    m2 += d.cwiseProduct(x - mean);
  }
  Vec variance() const {
    return count > 1 ? Vec(m2 / (count - 1)) : Vec(Vec::Zero(mean.size()));
  }
};

}  // namespace

MonteCarloReport monte_carlo(const McRun& run, int n_runs,
                             std::uint64_t base_seed,
                             const std::string& scenario_id, int channels,
                             int jobs, std::vector<Vec>* keep_samples) {
  if (n_runs < 1) throw std::invalid_argument("monte_carlo: n_runs < 1");
  const auto t0 = std::chrono::steady_clock::now();
  std::vector<std::optional<Vec>> results(n_runs);
  if (jobs <= 1) {
    for (int r = 0; r < n_runs; ++r) results[r] = run(base_seed + r);
  } else {
    std::atomic<int> next{0};
    auto worker = [&]() {
      for (;;) {
        const int r = next.fetch_add(1);
        if (r >= n_runs) return;
        results[r] = run(base_seed + r);
      }
    };
    std::vector<std::future<void>> pool;
    for (int j = 0; j < jobs; ++j)
      pool.push_back(std::async(std::launch::async, worker));
    for (auto& f : pool) f.get();
  }

  // fold in run order so the report is independent of scheduling
  Welford acc;
  int excluded = 0;
  for (const auto& r : results) {
    if (r.has_value()) {
      acc.add(*r);
      if (keep_samples) keep_samples->push_back(*r);
    } else {
      ++excluded;
    }
  }
  MonteCarloReport rep;
  rep.n_runs = n_runs;
  rep.successes = acc.count;
  rep.exclusions = excluded;
  rep.base_seed = base_seed;
  rep.scenario_id = scenario_id;
  rep.mu = acc.count ? acc.mean : Vec::Zero(channels);
  rep.sigma2 = acc.count ? acc.variance() : Vec::Zero(channels);
  const auto t1 = std::chrono::steady_clock::now();
  rep.seconds_per_run =
      std::chrono::duration<double>(t1 - t0).count() / std::max(n_runs, 1);
  return rep;
}

Vec steady_error(const FaultEstimateTrace& est, const Mat& fault_truth,
                 int window) {
  const Eigen::Index rows = est.f_hat.rows();
  const Eigen::Index w = std::min<Eigen::Index>(window, rows);
  Vec acc = Vec::Zero(est.f_hat.cols());
  for (Eigen::Index s = rows - w; s < rows; ++s)
    acc += est.f_hat.row(s).transpose() - fault_truth.col(s);
  return acc / static_cast<double>(w);
}

double timing_probe(const FilterRealization& filter, const IoDataset& data,
                    int min_samples) {
  std::vector<double> per_pass;
  int samples = 0;
  while (samples < min_samples) {
    const auto t0 = std::chrono::steady_clock::now();
    const ResidualTrace tr = run_residual(filter, data);
    const auto t1 = std::chrono::steady_clock::now();
    per_pass.push_back(std::chrono::duration<double>(t1 - t0).count() /
                       tr.norms.size());
    samples += static_cast<int>(tr.norms.size());
  }
  std::sort(per_pass.begin(), per_pass.end());
  return per_pass[per_pass.size() / 2];
}

// ---------------------------------------------------------------------------
// example 1: detection + isolation on the nonminimum-phase benchmark
// ---------------------------------------------------------------------------

namespace {

struct Ex1Config {
  double amp = 3.0;
  int T_id = 1000;
  int L = 12;
  int i = 2;
  int T_eval = 400;
  int fault_onset = 150;
  double fault_severity = 1.0;
  int calib_runs = 30;
  int calib_T = 400;
};

}  // namespace

Fdi4x2Result scenario_example1_fdi(std::uint64_t seed,
                                   const std::filesystem::path* out) {
  const Ex1Config cfg;
  const StateSpaceModel model = benchmark::nonmin_phase(0.1);
  const IndexSelection none({}, {}, model.l(), model.m());

  const Mat u_id = prbs(cfg.T_id, model.m(), cfg.amp, mix(seed, 1));
  const IoDataset id_data =
      simulate(model, u_id, FaultScenario::healthy(), true, mix(seed, 2)).data;
  const MarkovSequence markov = estimate_markov(id_data, cfg.L);
  const MEstimate m_est =
      estimate_M(build_gammas(id_data, markov, cfg.i, none), cfg.i, none);

  FilterSpec det_spec;
  det_spec.i = cfg.i;
  det_spec.sel = none;
  det_spec.kind = FilterKind::detection;
  det_spec.ar_poles = {0.3, 0.3, 0.26, 0.44};
  const FilterRealization det = synthesize_data_driven(markov, m_est, det_spec);

  auto iso_spec = [&](int channel) {
    FilterSpec s;
    s.i = cfg.i;
    s.sel = IndexSelection({}, {channel}, model.l(), model.m());
    s.kind = FilterKind::actuator_isolation;
    s.theta_seed = mix(seed, 40 + channel);
    return s;
  };
  const FilterRealization iso1 =
      synthesize_data_driven(markov, m_est, iso_spec(1));
  const FilterRealization iso2 =
      synthesize_data_driven(markov, m_est, iso_spec(2));

  auto healthy_run = [&](std::uint64_t s) {
    const Mat u = prbs(cfg.calib_T, model.m(), cfg.amp, mix(s, 7));
    return simulate(model, u, FaultScenario::healthy(), true, mix(s, 8)).data;
  };
  const Thresholds th_det =
      calibrate_thresholds(det, healthy_run, cfg.calib_runs, mix(seed, 100));
  const Thresholds th1 =
      calibrate_thresholds(iso1, healthy_run, cfg.calib_runs, mix(seed, 200));
  const Thresholds th2 =
      calibrate_thresholds(iso2, healthy_run, cfg.calib_runs, mix(seed, 300));

  FaultScenario fault;
  fault.actuator = {FaultSignal::step(cfg.fault_onset, cfg.fault_severity),
                    FaultSignal::none()};
  const Mat u_ev = prbs(cfg.T_eval, model.m(), cfg.amp, mix(seed, 3));
  const IoDataset faulty = simulate(model, u_ev, fault, true, mix(seed, 4)).data;

  const ResidualTrace r_det = run_residual(det, faulty);
  const ResidualTrace r1 = run_residual(iso1, faulty);
  const ResidualTrace r2 = run_residual(iso2, faulty);

  Fdi4x2Result res;
  res.m_est = m_est;
  res.detection_alarm_at = first_alarm(r_det, th_det, cfg.fault_onset - 20);
  res.isolation = isolate({r1, r2}, {th1, th2}, {1, 2}, cfg.fault_onset + 20,
                          cfg.fault_onset + 100);
  res.detection_reduced = reduce_filter(det);

  if (out) {
    std::filesystem::create_directories(*out);
    write_matrix_csv(*out / "M_hat.csv", m_est.M);
    write_filter_bundle(*out / "detection_filter", det);
    write_filter_bundle(*out / "detection_filter_reduced",
                        res.detection_reduced);
    write_filter_bundle(*out / "isolation_q1", iso1);
    write_filter_bundle(*out / "isolation_q2", iso2);
    write_dataset_csv(*out / "faulty_run.csv", faulty);
    write_residual_csv(*out / "residual_detection.csv", r_det);
    write_residual_csv(*out / "residual_q1.csv", r1);
    write_residual_csv(*out / "residual_q2.csv", r2);
    const char* verdict =
        res.isolation.verdict == IsolationVerdict::isolated
            ? (res.isolation.channel == 1 ? "actuator 1" : "actuator 2")
            : (res.isolation.verdict == IsolationVerdict::none ? "none"
                                                               : "ambiguous");
    write_verdict_json(*out / "verdict.json", "isolation_bank", verdict,
                       res.detection_alarm_at);
    Vec xs(r_det.windowed.size());
    for (Eigen::Index k = 0; k < xs.size(); ++k) xs(k) = k + cfg.i;
    Mat ys(r_det.windowed.size(), 3);
    ys.col(0) = r_det.windowed;
    ys.col(1) = r1.windowed;
    ys.col(2) = r2.windowed;
    write_line_svg(*out / "residual_norms.svg", xs, ys,
                   "windowed residual norms: detection, bank q=1, bank q=2");
  }
  return res;
}

// ---------------------------------------------------------------------------
// example 2: sensor estimation + tuning on the minimum-phase benchmark
// ---------------------------------------------------------------------------

namespace {

struct Ex2Config {
  double amp = 2.0;
  int T1 = 700;
  int T2 = 300;
  int L = 12;
  int i = 2;
  int T_eval = 500;
  int onset = 150;
  double severity = 2.0;
  int steady_window = 100;
};

}  // namespace

EstimationDemoResult scenario_example2_estimation(
    std::uint64_t seed, const std::filesystem::path* out) {
  const Ex2Config cfg;
  const StateSpaceModel model = benchmark::min_phase(0.1);
  const int T = cfg.T1 + cfg.T2;

  Mat u_rec(model.m(), T);
  u_rec.leftCols(cfg.T1) = prbs(cfg.T1, model.m(), cfg.amp, mix(seed, 1));
  u_rec.rightCols(cfg.T2) = benchmark::two_tone_input(cfg.T2);
  const IoDataset record =
      simulate(model, u_rec, FaultScenario::healthy(), true, mix(seed, 2)).data;
  auto [seg1, seg2] = split_data(record, 0.7);

  const MarkovSequence markov = estimate_markov(seg1, cfg.L);
  const IndexSelection none({}, {}, model.l(), model.m());
  const MEstimate m_est =
      estimate_M(build_gammas(seg1, markov, cfg.i, none), cfg.i, none);

  FilterSpec spec;
  spec.i = cfg.i;
  spec.sel = IndexSelection({2}, {}, model.l(), model.m());
  spec.kind = FilterKind::sensor_estimation;
  const FilterRealization base = synthesize_data_driven(markov, m_est, spec);

  const int lambda = choose_lambda(base.Ar, 1e-6, cfg.T2 - cfg.i - 2);
  const ErrorTrace err = build_error_trace(base, seg2);
  const ErrorDynamicsEstimate dyn =
      identify_error_dynamics(err, seg2, base, lambda);
  const TunedFilter tuned = tune_filter(base, dyn);

  FaultScenario fault;
  fault.sensor = {FaultSignal::none(), FaultSignal::step(cfg.onset, cfg.severity)};
  const Mat u_ev = benchmark::two_tone_input(cfg.T_eval);
  const IoDataset faulty = simulate(model, u_ev, fault, true, mix(seed, 4)).data;

  const FaultEstimateTrace unt = estimate_sensor_fault(base, faulty);
  const FaultEstimateTrace tun = run_tuned(tuned, faulty);

  Mat truth(model.l(), cfg.T_eval);
  for (int k = 0; k < cfg.T_eval; ++k)
    truth.col(k) = fault.sensor_at(k, model.l());
  const Vec e_unt = steady_error(unt, truth, cfg.steady_window);
  const Vec e_tun = steady_error(tun, truth, cfg.steady_window);

  EstimationDemoResult res;
  res.untuned_error_pct = std::abs(e_unt(1)) / cfg.severity * 100.0;
  res.tuned_error_pct = std::abs(e_tun(1)) / cfg.severity * 100.0;
  res.error_dyn = dyn;

  if (out) {
    std::filesystem::create_directories(*out);
    write_filter_bundle(*out / "sensor_filter", base);
    write_matrix_csv(*out / "M_hat.csv", m_est.M);
    write_matrix_csv(*out / "B_hat.csv", dyn.B_hat);
    write_matrix_csv(*out / "G1_hat.csv", dyn.G1_hat);
    write_estimates_csv(*out / "estimates_untuned.csv", unt);
    write_estimates_csv(*out / "estimates_tuned.csv", tun);
    Vec xs(unt.f_hat.rows());
    for (Eigen::Index k = 0; k < xs.size(); ++k) xs(k) = k;
    Mat ys(unt.f_hat.rows(), 2);
    ys.col(0) = unt.f_hat.col(1);
    ys.col(1) = tun.f_hat.col(1);
    write_line_svg(*out / "sensor2_estimates.svg", xs, ys,
                   "sensor-2 fault estimate: untuned vs tuned");
  }
  return res;
}

// ---------------------------------------------------------------------------
// Monte Carlo rows: tuned/untuned sensor and actuator estimators
// ---------------------------------------------------------------------------

namespace {

struct Table1Config {
  double amp = 5.0;
  int T1 = 700;
  int T2 = 300;
  int L = 12;
  int i = 2;
  int T_eval = 500;
  int onset = 150;
  int steady_window = 100;
};

// One end-to-end run; returns (untuned err1, err2, tuned err1, err2).
std::optional<Vec> table1_run(bool sensor_kind, double scale,
                              std::uint64_t seed) {
  const Table1Config cfg;
  const StateSpaceModel model = benchmark::min_phase(0.1);
  try {
    Mat u_rec(model.m(), cfg.T1 + cfg.T2);
    u_rec.leftCols(cfg.T1) = prbs(cfg.T1, model.m(), cfg.amp, mix(seed, 1));
    u_rec.rightCols(cfg.T2) = benchmark::two_tone_input(cfg.T2, scale);
    const IoDataset record =
        simulate(model, u_rec, FaultScenario::healthy(), true, mix(seed, 2))
            .data;
    auto [seg1, seg2] = split_data(record, 0.7);
    const MarkovSequence markov = estimate_markov(seg1, cfg.L);
    const IndexSelection none({}, {}, model.l(), model.m());
    const MEstimate m_est =
        estimate_M(build_gammas(seg1, markov, cfg.i, none), cfg.i, none);

    FilterSpec spec;
    spec.i = cfg.i;
    if (sensor_kind) {
      spec.sel = IndexSelection({1, 2}, {}, model.l(), model.m());
      spec.kind = FilterKind::sensor_estimation;
    } else {
      spec.sel = IndexSelection({}, {1, 2}, model.l(), model.m());
      spec.kind = FilterKind::actuator_estimation;
      spec.theta_seed = mix(seed, 3);
    }
    const FilterRealization base = synthesize_data_driven(markov, m_est, spec);
    const int lambda = choose_lambda(base.Ar, 1e-6, cfg.T2 - cfg.i - 2);
    const ErrorTrace err = build_error_trace(base, seg2);
    const ErrorDynamicsEstimate dyn =
        identify_error_dynamics(err, seg2, base, lambda);
    const TunedFilter tuned = tune_filter(base, dyn);

    FaultScenario fault;
    if (sensor_kind)
      fault.sensor = {FaultSignal::step(cfg.onset, -1.0),
                      FaultSignal::step(cfg.onset, 1.0)};
    else
      fault.actuator = {FaultSignal::step(cfg.onset, -1.0),
                        FaultSignal::step(cfg.onset, 1.0)};
    const Mat u_ev = benchmark::two_tone_input(cfg.T_eval, scale);
    const IoDataset faulty =
        simulate(model, u_ev, fault, true, mix(seed, 4)).data;

    Mat truth(2, cfg.T_eval);
    for (int k = 0; k < cfg.T_eval; ++k)
      truth.col(k) = sensor_kind ? fault.sensor_at(k, 2) : fault.actuator_at(k, 2);

    const FaultEstimateTrace unt = sensor_kind
                                       ? estimate_sensor_fault(base, faulty)
                                       : estimate_actuator_fault(base, faulty);
    const FaultEstimateTrace tun = run_tuned(tuned, faulty);
    const Vec e_unt = steady_error(unt, truth, cfg.steady_window);
    const Vec e_tun = steady_error(tun, truth, cfg.steady_window);
    Vec out(4);
    out << e_unt(0), e_unt(1), e_tun(0), e_tun(1);
    return out;
  } catch (const InfeasibleSynthesis&) {
    return std::nullopt;
  }
}

MonteCarloReport slice_report(const MonteCarloReport& src, int from,
                              const std::string& id) {
  MonteCarloReport r = src;
  r.scenario_id = id;
  r.mu = src.mu.segment(from, 2);
  r.sigma2 = src.sigma2.segment(from, 2);
  return r;
}

void write_report_files(const std::filesystem::path& dir,
                        const MonteCarloReport& rep) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream csv(dir / (rep.scenario_id + ".csv"));
    csv << "channel,mu,sigma2\n";
    for (Eigen::Index c = 0; c < rep.mu.size(); ++c)
      csv << (c + 1) << "," << rep.mu(c) << "," << rep.sigma2(c) << "\n";
  }
  nlohmann::json j;
  j["scenario"] = rep.scenario_id;
  j["n_runs"] = rep.n_runs;
  j["successes"] = rep.successes;
  j["exclusions"] = rep.exclusions;
  j["base_seed"] = rep.base_seed;
  j["seconds_per_run"] = rep.seconds_per_run;
  for (Eigen::Index c = 0; c < rep.mu.size(); ++c) {
    j["mu"].push_back(rep.mu(c));
    j["sigma2"].push_back(rep.sigma2(c));
  }
  std::ofstream js(dir / (rep.scenario_id + ".json"));
  js << j.dump(2) << "\n";
}

}  // namespace

Table1Report scenario_table1(int n_runs, std::uint64_t base_seed,
                             double input_scale, int jobs,
                             const std::filesystem::path* out) {
  std::vector<Vec> sensor_samples, act_samples;
  const auto sensor = monte_carlo(
      [&](std::uint64_t s) { return table1_run(true, input_scale, s); },
      n_runs, base_seed, "sensor_estimation_mc", 4, jobs, &sensor_samples);
  const auto act = monte_carlo(
      [&](std::uint64_t s) { return table1_run(false, input_scale, s); },
      n_runs, base_seed + 1000003, "actuator_estimation_mc", 4, jobs,
      &act_samples);

  Table1Report rep;
  rep.sensor_untuned = slice_report(sensor, 0, "sensor_untuned");
  rep.sensor_tuned = slice_report(sensor, 2, "sensor_tuned");
  rep.actuator_untuned = slice_report(act, 0, "actuator_untuned");
  rep.actuator_tuned = slice_report(act, 2, "actuator_tuned");
  if (out) {
    write_report_files(*out, rep.sensor_untuned);
    write_report_files(*out, rep.sensor_tuned);
    write_report_files(*out, rep.actuator_untuned);
    write_report_files(*out, rep.actuator_tuned);
    auto scatter = [&](const std::vector<Vec>& samples, int from,
                       const std::string& name) {
      Vec xs(samples.size()), ys(samples.size());
      for (size_t k = 0; k < samples.size(); ++k) {
        xs(k) = samples[k](from);
        ys(k) = samples[k](from + 1);
      }
      write_scatter_svg(*out / (name + ".svg"), xs, ys,
                        name + " per-run steady errors (ch1 vs ch2)");
    };
    scatter(sensor_samples, 2, "sensor_tuned_scatter");
    scatter(act_samples, 2, "actuator_tuned_scatter");
    scatter(sensor_samples, 0, "sensor_untuned_scatter");
    scatter(act_samples, 0, "actuator_untuned_scatter");
  }
  return rep;
}

// ---------------------------------------------------------------------------
// VTOL closed-loop comparative scenario
// ---------------------------------------------------------------------------

namespace {

struct VtolConfig {
  double id_amp = 15.0;
  int T1 = 1000;
  int T2 = 400;
  double dither_amp = 5.0;
  double ref_level = 15.0;
  int L = 80;
  int T_eval = 1500;
  int onset = 51;
  int steady_window = 1000;
  double lambda_tol = 1e-6;
};

struct VtolRunOut {
  Vec sensor_err;    // tuned, 2 channels
  Vec actuator_err;  // tuned, 2 channels
};

std::optional<VtolRunOut> vtol_run(std::uint64_t seed) {
  const VtolConfig cfg;
  const StateSpaceModel model = benchmark::vtol_discrete();
  const Mat Ky = benchmark::vtol().Ky;
  const int m = model.m(), l = model.l();
  try {
    Mat xi(m, cfg.T1 + cfg.T2);
    xi.leftCols(cfg.T1) = prbs(cfg.T1, m, cfg.id_amp, mix(seed, 1));
    xi.rightCols(cfg.T2) =
        Mat::Constant(m, cfg.T2, cfg.ref_level) +
        prbs(cfg.T2, m, cfg.dither_amp, mix(seed, 2));
    const IoDataset record =
        closed_loop_sim(model, Ky, xi, FaultScenario::healthy(), true,
                        mix(seed, 3))
            .data;
    auto [seg1, seg2] =
        split_data(record, static_cast<double>(cfg.T1) / (cfg.T1 + cfg.T2));
    const MarkovSequence markov = estimate_markov(seg1, cfg.L);
    const IndexSelection none({}, {}, l, m);

    const Mat xi_eval = Mat::Constant(m, cfg.T_eval, cfg.ref_level);
    VtolRunOut out;

    {  // sensor estimator: i = 2, p = {1,2}
      const int i = 2;
      const MEstimate m_est =
          estimate_M(build_gammas(seg1, markov, i, none), i, none);
      FilterSpec spec;
      spec.i = i;
      spec.sel = IndexSelection({1, 2}, {}, l, m);
      spec.kind = FilterKind::sensor_estimation;
      const FilterRealization base = synthesize_data_driven(markov, m_est, spec);
      const int lambda =
          choose_lambda(base.Ar, cfg.lambda_tol, cfg.T2 - i - 60);
      const ErrorTrace err = build_error_trace(base, seg2);
      TuningOptions topts;
      topts.zero_leading_feedthrough = true;  // eval reference is undithered
      const ErrorDynamicsEstimate dyn =
          identify_error_dynamics(err, seg2, base, lambda, topts);
      const TunedFilter tuned = tune_filter(base, dyn);

      FaultScenario fault;
      fault.sensor = {FaultSignal::sine(cfg.onset, 1.0, 0.1 * M_PI),
                      FaultSignal::step(cfg.onset, 1.0), FaultSignal::none(),
                      FaultSignal::none()};
      const IoDataset faulty =
          closed_loop_sim(model, Ky, xi_eval, fault, true, mix(seed, 9)).data;
      const FaultEstimateTrace tun = run_tuned(tuned, faulty);
      Mat truth(l, cfg.T_eval);
      for (int k = 0; k < cfg.T_eval; ++k) truth.col(k) = fault.sensor_at(k, l);
      out.sensor_err = steady_error(tun, truth, cfg.steady_window).head(2);
    }

    {  // actuator estimator: i = 3, q = {1,2}
      const int i = 3;
      const MEstimate m_est =
          estimate_M(build_gammas(seg1, markov, i, none), i, none);
      FilterSpec spec;
      spec.i = i;
      spec.sel = IndexSelection({}, {1, 2}, l, m);
      spec.kind = FilterKind::actuator_estimation;
      spec.theta_seed = mix(seed, 5);
      const FilterRealization base = synthesize_data_driven(markov, m_est, spec);
      const int lambda =
          choose_lambda(base.Ar, cfg.lambda_tol, cfg.T2 - i - 60);
      const ErrorTrace err = build_error_trace(base, seg2);
      TuningOptions topts;
      topts.zero_leading_feedthrough = true;
      const ErrorDynamicsEstimate dyn =
          identify_error_dynamics(err, seg2, base, lambda, topts);
      const TunedFilter tuned = tune_filter(base, dyn);

      FaultScenario fault;
      fault.actuator = {FaultSignal::sine(cfg.onset, 1.0, 0.1 * M_PI),
                        FaultSignal::step(cfg.onset, 1.0)};
      const IoDataset faulty =
          closed_loop_sim(model, Ky, xi_eval, fault, true, mix(seed, 9)).data;
      const FaultEstimateTrace tun = run_tuned(tuned, faulty);
      Mat truth(m, cfg.T_eval);
      for (int k = 0; k < cfg.T_eval; ++k)
        truth.col(k) = fault.actuator_at(k, m);
      out.actuator_err = steady_error(tun, truth, cfg.steady_window);
    }
    return out;
  } catch (const InfeasibleSynthesis&) {
    return std::nullopt;
  }
}

}  // namespace

VtolReport scenario_vtol(int n_runs, std::uint64_t base_seed, int jobs,
                         const std::filesystem::path* out) {
  std::vector<Vec> samples;
  const auto mc = monte_carlo(
      [&](std::uint64_t s) -> std::optional<Vec> {
        auto r = vtol_run(s);
        if (!r) return std::nullopt;
        Vec v(4);
        v << r->actuator_err(0), r->actuator_err(1), r->sensor_err(0),
            r->sensor_err(1);
        return v;
      },
      n_runs, base_seed, "vtol_comparative", 4, jobs, &samples);

  VtolReport rep;
  rep.actuator_tuned = slice_report(mc, 0, "vtol_actuator_tuned");
  rep.sensor_tuned = slice_report(mc, 2, "vtol_sensor_tuned");

  {  // per-sample runtime cost of the largest filter in the study
    const StateSpaceModel model = benchmark::vtol_discrete();
    const Mat Ky = benchmark::vtol().Ky;
    const IndexSelection none({}, {}, model.l(), model.m());
    const Mat xi = prbs(2000, model.m(), 15.0, mix(base_seed, 21));
    const IoDataset data =
        closed_loop_sim(model, Ky, xi, FaultScenario::healthy(), true,
                        mix(base_seed, 22))
            .data;
    const MarkovSequence markov = estimate_markov(data, 80);
    const int i = 3;
    const MEstimate m_est =
        estimate_M(build_gammas(data, markov, i, none), i, none);
    FilterSpec spec;
    spec.i = i;
    spec.sel = IndexSelection({}, {1, 2}, model.l(), model.m());
    spec.kind = FilterKind::actuator_estimation;
    spec.theta_seed = mix(base_seed, 23);
    const FilterRealization f = synthesize_data_driven(markov, m_est, spec);
    rep.seconds_per_sample = timing_probe(f, data);
  }

  if (out) {
    write_report_files(*out, rep.actuator_tuned);
    write_report_files(*out, rep.sensor_tuned);
    Vec xa(samples.size()), ya(samples.size()), xsn(samples.size()),
        ysn(samples.size());
    for (size_t k = 0; k < samples.size(); ++k) {
      xa(k) = samples[k](0);
      ya(k) = samples[k](1);
      xsn(k) = samples[k](2);
      ysn(k) = samples[k](3);
    }
    write_scatter_svg(*out / "actuator_errors.svg", xa, ya,
                      "per-run actuator estimation errors");
    write_scatter_svg(*out / "sensor_errors.svg", xsn, ysn,
                      "per-run sensor estimation errors");
  }
  return rep;
}

}  // namespace fdie
