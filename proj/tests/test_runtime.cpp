#include <doctest.h>

#include <cmath>

#include "fdie/runtime.hpp"
#include "fdie/systems.hpp"

using namespace fdie;

namespace {

FilterRealization exact_detection(const StateSpaceModel& sys,
                                  std::vector<double> poles = {0.3}) {
  FilterSpec spec;
  spec.i = 2;
  spec.sel = IndexSelection({}, {}, sys.l(), sys.m());
  spec.kind = FilterKind::detection;
  spec.ar_poles = std::move(poles);
  return synthesize_exact(sys, spec);
}

}  // namespace

TEST_SUITE_BEGIN("runtime");

TEST_CASE("healthy noise-free residual decays geometrically") {
  const StateSpaceModel sys = benchmark::min_phase();
  const FilterRealization f = exact_detection(sys);
  const Mat u = prbs(200, sys.m(), 1.0, 2);
  const IoDataset d = simulate(sys, u, FaultScenario::healthy(), false, 0).data;
  Vec eta0 = Vec::Ones(4);  // forced transient
  const ResidualTrace tr = run_residual(f, d, eta0);
  CHECK(tr.norms(150) < 1e-10);
  // decay rate bounded by the chosen pole
  for (int k = 5; k < 40; ++k)
    CHECK(tr.norms(k + 1) <= 0.35 * tr.norms(k) + 1e-14);
}

TEST_CASE("structural residual rows vanish under faults (diagonal, q empty)") {
  const StateSpaceModel sys = benchmark::min_phase();
  const FilterRealization f = exact_detection(sys);
  FaultScenario fault;
  fault.sensor = {FaultSignal::step(30, 1.5), FaultSignal::step(60, -0.7)};
  const Mat u = prbs(260, sys.m(), 1.0, 4);
  const IoDataset d = simulate(sys, u, fault, false, 0).data;
  const ResidualTrace tr = run_residual(f, d);
  const int lp = 2;  // first (i-1)l' rows
  for (int k = 120; k < tr.inner.rows(); ++k)
    CHECK(tr.inner.row(k).head(lp).norm() < 1e-8);
  // while the bottom rows do carry the faults
  CHECK(tr.inner.bottomRows(50).rightCols(lp).norm() > 0.1);
}

TEST_CASE("decoupled filter ignores faults on its own channel") {
  const StateSpaceModel sys = benchmark::nonmin_phase();
  FilterSpec spec;
  spec.i = 2;
  spec.sel = IndexSelection({}, {1}, sys.l(), sys.m());
  spec.kind = FilterKind::actuator_isolation;
  const FilterRealization f = synthesize_exact(sys, spec);

  const Mat u = prbs(300, sys.m(), 1.0, 6);
  FaultScenario own;
  own.actuator = {FaultSignal::step(100, 2.0), FaultSignal::none()};
  FaultScenario other;
  other.actuator = {FaultSignal::none(), FaultSignal::step(100, 2.0)};

  const auto r_healthy = run_residual(
      f, simulate(sys, u, FaultScenario::healthy(), false, 0).data);
  const auto r_own = run_residual(f, simulate(sys, u, own, false, 0).data);
  const auto r_other = run_residual(f, simulate(sys, u, other, false, 0).data);
  CHECK((r_own.monitored - r_healthy.monitored).norm() < 1e-8);
  CHECK((r_other.monitored - r_healthy.monitored).norm() > 1.0);
}

TEST_CASE("residual response is linear in the fault severity") {
  const StateSpaceModel sys = benchmark::min_phase();
  const FilterRealization f = exact_detection(sys);
  const Mat u = prbs(220, sys.m(), 1.0, 8);
  auto run_sev = [&](double sev) {
    FaultScenario fault;
    fault.actuator = {FaultSignal::step(80, sev), FaultSignal::none()};
    return run_residual(f, simulate(sys, u, fault, false, 0).data).inner;
  };
  const Mat base = run_sev(0.0);
  const Mat one = run_sev(1.0) - base;
  const Mat three = run_sev(3.0) - base;
  CHECK((three - 3.0 * one).norm() < 1e-8 * std::max(1.0, three.norm()));
}

TEST_CASE("sensor estimator converges to the injected bias") {
  const StateSpaceModel sys = benchmark::nonmin_phase();  // zeros outside
  FilterSpec spec;
  spec.i = 2;
  spec.sel = IndexSelection({1, 2}, {}, sys.l(), sys.m());
  spec.kind = FilterKind::sensor_estimation;
  const FilterRealization f = synthesize_exact(sys, spec);

  FaultScenario fault;
  fault.sensor = {FaultSignal::step(150, 0.7), FaultSignal::step(150, -1.3)};
  const Mat u = prbs(400, sys.m(), 1.0, 5);
  const IoDataset d = simulate(sys, u, fault, false, 0).data;
  const FaultEstimateTrace est = estimate_sensor_fault(f, d);
  CHECK(est.delay == 2);
  // onset alignment: estimates refer to the fault time itself
  CHECK(est.f_hat.row(149).norm() < 1e-6);
  CHECK(est.f_hat(160, 0) == doctest::Approx(0.7).epsilon(1e-4));
  Vec steady = est.f_hat.bottomRows(100).colwise().mean();
  CHECK(steady(0) == doctest::Approx(0.7).epsilon(1e-6));
  CHECK(steady(1) == doctest::Approx(-1.3).epsilon(1e-6));
}

TEST_CASE("actuator estimator converges to the injected bias") {
  const StateSpaceModel sys = benchmark::min_phase();
  FilterSpec spec;
  spec.i = 2;
  spec.sel = IndexSelection({}, {1, 2}, sys.l(), sys.m());
  spec.kind = FilterKind::actuator_estimation;
  const FilterRealization f = synthesize_exact(sys, spec);

  FaultScenario fault;
  fault.actuator = {FaultSignal::step(150, -1.0), FaultSignal::step(150, 1.0)};
  const Mat u = prbs(400, sys.m(), 1.0, 5);
  const IoDataset d = simulate(sys, u, fault, false, 0).data;
  const FaultEstimateTrace est = estimate_actuator_fault(f, d);
  Vec steady = est.f_hat.bottomRows(100).colwise().mean();
  CHECK(steady(0) == doctest::Approx(-1.0).epsilon(1e-6));
  CHECK(steady(1) == doctest::Approx(1.0).epsilon(1e-6));

  SUBCASE("healthy data estimates zero") {
    const IoDataset h =
        simulate(sys, u, FaultScenario::healthy(), false, 0).data;
    const FaultEstimateTrace e0 = estimate_actuator_fault(f, h);
    CHECK(e0.f_hat.bottomRows(50).norm() < 1e-8);
  }
  SUBCASE("kind mismatch throws") {
    CHECK_THROWS_AS(estimate_sensor_fault(f, d), std::invalid_argument);
  }
}

TEST_CASE("threshold calibration") {
  const StateSpaceModel sys = benchmark::min_phase(0.1);
  const FilterRealization f = exact_detection(sys);
  auto healthy_noise_free = [&](std::uint64_t s) {
    return simulate(sys, prbs(120, sys.m(), 1.0, s), FaultScenario::healthy(),
                    false, s)
        .data;
  };
  SUBCASE("noise-free runs give a vanishing band") {
    const Thresholds th = calibrate_thresholds(f, healthy_noise_free, 10, 3);
    CHECK(th.r_min >= 0.0);
    CHECK(th.r_max < 1e-8);
  }
  SUBCASE("quantile pair (0,1) is the observed min/max") {
    auto healthy = [&](std::uint64_t s) {
      return simulate(sys, prbs(120, sys.m(), 1.0, s),
                      FaultScenario::healthy(), true, s)
          .data;
    };
    const Thresholds th = calibrate_thresholds(f, healthy, 12, 3, 0.0, 1.0);
    std::vector<double> all;
    for (int r = 0; r < 12; ++r) {
      const auto tr = run_residual(f, healthy(3 + r));
      for (Eigen::Index k = tr.warmup; k < tr.windowed.size(); ++k)
        all.push_back(tr.windowed(k));
    }
    CHECK(th.r_min == doctest::Approx(*std::min_element(all.begin(), all.end())));
    CHECK(th.r_max == doctest::Approx(*std::max_element(all.begin(), all.end())));
  }
  SUBCASE("too few runs are refused") {
    CHECK_THROWS_AS(calibrate_thresholds(f, healthy_noise_free, 9, 3),
                    std::invalid_argument);
  }
}

TEST_CASE("isolation decision table is complete") {
  // synthetic traces: windowed norms either inside [0, 1] or far outside
  auto mk_trace = [](bool stays_in) {
    ResidualTrace tr;
    tr.i = 2;
    tr.warmup = 0;
    tr.windowed = Vec::Constant(100, stays_in ? 0.5 : 5.0);
    tr.norms = tr.windowed;
    return tr;
  };
  Thresholds th;
  th.r_min = 0.0;
  th.r_max = 1.0;

  SUBCASE("all in band: none") {
    auto r = isolate({mk_trace(true), mk_trace(true)}, {th, th}, {1, 2}, 10, 90);
    CHECK(r.verdict == IsolationVerdict::none);
  }
  SUBCASE("exactly one in band: isolated") {
    auto r = isolate({mk_trace(true), mk_trace(false)}, {th, th}, {1, 2}, 10, 90);
    CHECK(r.verdict == IsolationVerdict::isolated);
    CHECK(r.channel == 1);
  }
  SUBCASE("several in band: ambiguous") {
    auto r = isolate({mk_trace(true), mk_trace(true), mk_trace(false)},
                     {th, th, th}, {1, 2, 3}, 10, 90);
    CHECK(r.verdict == IsolationVerdict::ambiguous);
  }
  SUBCASE("none in band: ambiguous") {
    auto r = isolate({mk_trace(false), mk_trace(false)}, {th, th}, {1, 2}, 10, 90);
    CHECK(r.verdict == IsolationVerdict::ambiguous);
  }
  SUBCASE("empty bank throws") {
    CHECK_THROWS_AS(isolate({}, {}, {}, 0, 1), std::invalid_argument);
  }
}

TEST_CASE("band decision is a pure function of norm and thresholds") {
  std::mt19937_64 gen(17);
  std::uniform_real_distribution<double> u(0.0, 2.0);
  for (int rep = 0; rep < 200; ++rep) {
    Thresholds th;
    th.r_min = u(gen);
    th.r_max = th.r_min + u(gen);
    const double x = u(gen) * 2.0;
    const bool healthy = in_band(x, th);
    CHECK(healthy == (x >= th.r_min && x <= th.r_max));
  }
}

TEST_SUITE_END();
