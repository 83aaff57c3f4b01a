#include <iostream>

#include "fdie/config.hpp"
#include "fdie/csvio.hpp"

namespace fdie {

namespace {

std::uint64_t mix(std::uint64_t seed, std::uint64_t tag) {
  std::uint64_t x = seed + 0x9E3779B97F4A7C15ull * (tag + 1);
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

struct Pipeline {
  IoDataset record;
  MarkovSequence markov;
  std::map<std::string, FilterRealization> filters;
  std::map<std::string, MEstimate> m_by_depth_key;
};

IoDataset healthy_record(const RunConfig& cfg, std::uint64_t seed) {
  const auto& model = *cfg.model;
  if (cfg.feedback_gain) {
    const Mat xi = prbs(cfg.T, model.m(), cfg.amplitude, mix(seed, 1));
    return closed_loop_sim(model, *cfg.feedback_gain, xi,
                           FaultScenario::healthy(), true, mix(seed, 2))
        .data;
  }
  const Mat u = prbs(cfg.T, model.m(), cfg.amplitude, mix(seed, 1));
  return simulate(model, u, FaultScenario::healthy(), true, mix(seed, 2)).data;
}

int max_filter_depth(const RunConfig& cfg) {
  int i = 2;
  for (const auto& f : cfg.filters) i = std::max(i, f.i);
  return i;
}

int fir_order(const RunConfig& cfg) {
  return cfg.fir_order > 0 ? cfg.fir_order
                           : default_fir_order(max_filter_depth(cfg));
}

FilterSpec to_spec(const RunConfig& cfg, const FilterConfig& fc,
                   std::uint64_t seed) {
  FilterSpec spec;
  spec.i = fc.i;
  spec.sel = IndexSelection(fc.p, fc.q, cfg.model->l(), cfg.model->m());
  spec.kind = fc.kind;
  spec.ar_poles = fc.poles;
  spec.theta_seed = mix(seed, fnv1a_hash(fc.id));
  return spec;
}

Pipeline identify_and_synthesize(const RunConfig& cfg, bool quiet) {
  Pipeline p;
  p.record = healthy_record(cfg, cfg.seed);
  p.markov = estimate_markov(p.record, fir_order(cfg));
  if (!markov_tail_ok(p.markov) && !quiet)
    std::cerr << "note: Markov tail |H_L| >= 1% of |H_0|; consider a larger "
                 "identification.L\n";
  for (const auto& fc : cfg.filters) {
    const FilterSpec spec = to_spec(cfg, fc, cfg.seed);
    const IndexSelection eq_sel =
        spec.kind == FilterKind::sensor_estimation
            ? IndexSelection({}, {}, spec.sel.l(), spec.sel.m())
            : IndexSelection(spec.sel.p(), {}, spec.sel.l(), spec.sel.m());
    const std::string key =
        std::to_string(fc.i) + ":" + std::to_string(eq_sel.np());
    if (!p.m_by_depth_key.count(key))
      p.m_by_depth_key[key] = estimate_M(
          build_gammas(p.record, p.markov, fc.i, eq_sel), fc.i, eq_sel);
    p.filters.emplace(fc.id, synthesize_data_driven(
                                 p.markov, p.m_by_depth_key.at(key), spec));
  }
  return p;
}

IoDataset faulty_record(const RunConfig& cfg, std::uint64_t seed, int T) {
  const auto& model = *cfg.model;
  if (cfg.feedback_gain) {
    const Mat xi = prbs(T, model.m(), cfg.amplitude, mix(seed, 5));
    return closed_loop_sim(model, *cfg.feedback_gain, xi, cfg.scenario, true,
                           mix(seed, 6))
        .data;
  }
  const Mat u = prbs(T, model.m(), cfg.amplitude, mix(seed, 5));
  return simulate(model, u, cfg.scenario, true, mix(seed, 6)).data;
}

int cmd_simulate(const RunConfig& cfg, bool quiet) {
  const IoDataset data = faulty_record(cfg, cfg.seed, cfg.T);
  write_dataset_csv(cfg.out_dir / "dataset.csv", data);
  if (!quiet)
    std::cout << "simulate: wrote " << data.T() << " samples to "
              << (cfg.out_dir / "dataset.csv").string() << "\n";
  return 0;
}

int cmd_identify(const RunConfig& cfg, bool quiet) {
  const IoDataset record = healthy_record(cfg, cfg.seed);
  const MarkovSequence markov = estimate_markov(record, fir_order(cfg));
  write_dataset_csv(cfg.out_dir / "healthy.csv", record);
  write_markov_csv(cfg.out_dir / "markov.csv", markov);
  const IndexSelection none({}, {}, cfg.model->l(), cfg.model->m());
  const int i = max_filter_depth(cfg);
  const MEstimate m_est =
      estimate_M(build_gammas(record, markov, i, none), i, none);
  write_matrix_csv(cfg.out_dir / "M_hat.csv", m_est.M);
  if (!quiet)
    std::cout << "identify: L=" << markov.L() << " i=" << i
              << " rho(M)=" << m_est.rho
              << (m_est.stable ? "" : " (warning: near/above 1)") << "\n";
  return 0;
}

int cmd_synth(const RunConfig& cfg, bool quiet) {
  if (cfg.filters.empty())
    throw std::invalid_argument("synth: no [filter:...] sections in config");
  const Pipeline p = identify_and_synthesize(cfg, quiet);
  for (const auto& [id, f] : p.filters) {
    write_filter_bundle(cfg.out_dir / ("filter_" + id), f);
    if (!quiet)
      std::cout << "synth: " << id << " kind=" << to_string(f.spec.kind)
                << " rho=" << f.rho << "\n";
  }
  return 0;
}

int cmd_detect_isolate(const RunConfig& cfg, bool quiet, bool isolate_mode) {
  if (cfg.filters.empty())
    throw std::invalid_argument("detect/isolate: no filters configured");
  const Pipeline p = identify_and_synthesize(cfg, quiet);
  const int T_eval = std::max(400, cfg.T / 2);
  const IoDataset faulty = faulty_record(cfg, mix(cfg.seed, 77), T_eval);

  std::vector<ResidualTrace> traces;
  std::vector<Thresholds> ths;
  std::vector<int> channels;
  auto healthy = [&](std::uint64_t s) {
    RunConfig c2 = cfg;
    return healthy_record(c2, s);
  };
  for (const auto& fc : cfg.filters) {
    const auto& f = p.filters.at(fc.id);
    ths.push_back(calibrate_thresholds(
        f, healthy, std::max(10, cfg.n_runs / 10), mix(cfg.seed, 88)));
    traces.push_back(run_residual(f, faulty));
    traces.back().filter_id = fc.id;
    channels.push_back(fc.q.empty() ? 0 : fc.q.front());
    write_residual_csv(cfg.out_dir / ("residual_" + fc.id + ".csv"),
                       traces.back());
  }
  if (!isolate_mode) {
    const int alarm = first_alarm(traces.front(), ths.front(), 0);
    write_verdict_json(cfg.out_dir / "verdict.json", cfg.filters.front().id,
                       alarm >= 0 ? "faulty" : "healthy", alarm);
    if (!quiet)
      std::cout << "detect: " << (alarm >= 0 ? "alarm at k=" : "no alarm")
                << (alarm >= 0 ? std::to_string(alarm) : "") << "\n";
    return 0;
  }
  const IsolationResult iso =
      isolate(traces, ths, channels, T_eval / 2, T_eval - 1);
  std::string verdict = "none";
  if (iso.verdict == IsolationVerdict::isolated)
    verdict = "actuator " + std::to_string(iso.channel);
  else if (iso.verdict == IsolationVerdict::ambiguous)
    verdict = "ambiguous";
  write_verdict_json(cfg.out_dir / "verdict.json", "bank", verdict, -1);
  if (!quiet) std::cout << "isolate: verdict " << verdict << "\n";
  return 0;
}

const FilterConfig* find_estimator(const RunConfig& cfg, bool sensor) {
  for (const auto& fc : cfg.filters)
    if (fc.kind == (sensor ? FilterKind::sensor_estimation
                           : FilterKind::actuator_estimation))
      return &fc;
  return nullptr;
}

int cmd_estimate(const RunConfig& cfg, bool quiet, bool tuned) {
  const FilterConfig* fc = find_estimator(cfg, true);
  if (!fc) fc = find_estimator(cfg, false);
  if (!fc)
    throw std::invalid_argument(
        "estimate: config needs a sensor_estimation or actuator_estimation "
        "filter");
  const bool sensor = fc->kind == FilterKind::sensor_estimation;
  const Pipeline p = identify_and_synthesize(cfg, quiet);
  const auto& base = p.filters.at(fc->id);
  const IoDataset faulty = faulty_record(cfg, mix(cfg.seed, 99), cfg.T);

  FaultEstimateTrace trace;
  if (tuned) {
    auto [seg1, seg2] = split_data(p.record, cfg.split_ratio);
    const int lambda = choose_lambda(
        base.Ar, cfg.lambda_tol, seg2.T() - fc->i - 2);
    TuningOptions topts;
    topts.lambda_tol = cfg.lambda_tol;
    topts.ridge = cfg.ridge;
    const ErrorDynamicsEstimate dyn = identify_error_dynamics(
        build_error_trace(base, seg2), seg2, base, lambda, topts);
    const TunedFilter tf = tune_filter(base, dyn);
    trace = run_tuned(tf, faulty);
    write_matrix_csv(cfg.out_dir / "B_hat.csv", dyn.B_hat);
    write_matrix_csv(cfg.out_dir / "G1_hat.csv", dyn.G1_hat);
    if (!quiet && !dyn.rank_ok)
      std::cerr << "note: tuning regressor rank-deficient; correction is the "
                   "least-squares surrogate\n";
  } else {
    trace = sensor ? estimate_sensor_fault(base, faulty)
                   : estimate_actuator_fault(base, faulty);
  }
  write_estimates_csv(cfg.out_dir / "estimates.csv", trace);
  if (!quiet)
    std::cout << (tuned ? "tune" : "estimate") << ": wrote "
              << trace.f_hat.rows() << " estimates ("
              << (sensor ? "sensor" : "actuator") << " channels)\n";
  return 0;
}

int cmd_montecarlo(const RunConfig& cfg, bool quiet) {
  if (cfg.model_name == "vtol") {
    const VtolReport rep =
        scenario_vtol(cfg.n_runs, cfg.seed, cfg.jobs, &cfg.out_dir);
    if (!quiet)
      std::cout << "montecarlo (vtol): actuator mu = [" << rep.actuator_tuned.mu.transpose()
                << "], sensor mu = [" << rep.sensor_tuned.mu.transpose()
                << "], " << rep.actuator_tuned.exclusions +
                       rep.sensor_tuned.exclusions
                << " exclusions\n";
    return 0;
  }
  const Table1Report rep =
      scenario_table1(cfg.n_runs, cfg.seed, 1.0, cfg.jobs, &cfg.out_dir);
  if (!quiet)
    std::cout << "montecarlo: tuned sensor mu = ["
              << rep.sensor_tuned.mu.transpose() << "], tuned actuator mu = ["
              << rep.actuator_tuned.mu.transpose() << "]\n";
  return 0;
}

int cmd_repro(const RunConfig& cfg, bool quiet, const std::string& which) {
  if (which == "example1_fdi") {
    const auto res = scenario_example1_fdi(cfg.seed, &cfg.out_dir);
    if (!quiet) {
      std::string verdict = "none";
      if (res.isolation.verdict == IsolationVerdict::isolated)
        verdict = "actuator " + std::to_string(res.isolation.channel);
      else if (res.isolation.verdict == IsolationVerdict::ambiguous)
        verdict = "ambiguous";
      std::cout << "repro example1_fdi: alarm at k=" << res.detection_alarm_at
                << ", isolation verdict: " << verdict << "\n";
    }
    return 0;
  }
  if (which == "example2_estimation") {
    const auto res = scenario_example2_estimation(cfg.seed, &cfg.out_dir);
    if (!quiet)
      std::cout << "repro example2_estimation: untuned error "
                << res.untuned_error_pct << "%, tuned "
                << res.tuned_error_pct << "%\n";
    return 0;
  }
  if (which == "vtol_comparative") {
    const auto rep =
        scenario_vtol(cfg.n_runs, cfg.seed, cfg.jobs, &cfg.out_dir);
    if (!quiet)
      std::cout << "repro vtol_comparative: actuator mu = ["
                << rep.actuator_tuned.mu.transpose() << "], sensor mu = ["
                << rep.sensor_tuned.mu.transpose() << "], "
                << rep.seconds_per_sample << " s/sample\n";
    return 0;
  }
  std::cerr << "unknown repro scenario '" << which
            << "' (expected example1_fdi | example2_estimation | "
               "vtol_comparative)\n";
  return 2;
}

}  // namespace

int dispatch(const std::string& command, RunConfig cfg, bool quiet) {
  std::filesystem::create_directories(cfg.out_dir);
  try {
    int status = 0;
    if (command == "simulate") {
      status = cmd_simulate(cfg, quiet);
    } else if (command == "identify") {
      status = cmd_identify(cfg, quiet);
    } else if (command == "synth") {
      status = cmd_synth(cfg, quiet);
    } else if (command == "detect") {
      status = cmd_detect_isolate(cfg, quiet, false);
    } else if (command == "isolate") {
      status = cmd_detect_isolate(cfg, quiet, true);
    } else if (command == "estimate") {
      status = cmd_estimate(cfg, quiet, false);
    } else if (command == "tune") {
      status = cmd_estimate(cfg, quiet, true);
    } else if (command == "montecarlo") {
      status = cmd_montecarlo(cfg, quiet);
    } else if (command.rfind("repro", 0) == 0) {
      // handled by the CLI front end, which passes the scenario name
      const size_t sp = command.find(' ');
      status = cmd_repro(cfg, quiet,
                         sp == std::string::npos ? "" : command.substr(sp + 1));
    } else {
      std::cerr << "unknown subcommand '" << command << "'\n";
      return 2;
    }
    if (status == 0)
      write_manifest(cfg.out_dir / "manifest.json", cfg.raw_text, cfg.seed,
                     {command});
    return status;
  } catch (const InfeasibleSynthesis& e) {
    std::cerr << "infeasible: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace fdie
