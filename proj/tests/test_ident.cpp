#include <doctest.h>

#include "fdie/ident.hpp"
#include "fdie/systems.hpp"

using namespace fdie;

TEST_SUITE_BEGIN("ident");

TEST_CASE("noise-free FIR fit recovers the exact Markov parameters") {
  const StateSpaceModel sys = benchmark::min_phase();
  const Mat u = prbs(1200, sys.m(), 1.0, 21);
  const IoDataset data =
      simulate(sys, u, FaultScenario::healthy(), false, 0).data;
  const MarkovSequence est = estimate_markov(data, 20);
  const auto exact = sys.markov(21);
  for (int b = 0; b <= 20; ++b)
    CHECK((est.H[b] - exact[b]).norm() < 1e-8);
}

TEST_CASE("zero output gives zero Markov estimates") {
  Mat u = prbs(300, 2, 1.0, 5);
  Mat y = Mat::Zero(2, 300);
  const MarkovSequence est = estimate_markov(u, y, 8);
  for (const auto& h : est.H) CHECK(h.norm() == 0.0);
}

TEST_CASE("noisy leading Markov block lands near the true C*B") {
  const StateSpaceModel sys = benchmark::min_phase(0.1);
  const Mat u = prbs(1000, sys.m(), 1.0, 31);
  const IoDataset data =
      simulate(sys, u, FaultScenario::healthy(), true, 32).data;
  const MarkovSequence est = estimate_markov(data, 12);
  CHECK(est.H[0](0, 0) == doctest::Approx(0.781).epsilon(0.12));
}

TEST_CASE("persistent-excitation violation names the deficient lag") {
  Mat u = Mat::Ones(2, 400);  // constant input: rank 1 already at lag 0
  Mat y = Mat::Zero(2, 400);
  y.setRandom();
  CHECK_THROWS_WITH_AS(estimate_markov(u, y, 6),
                       doctest::Contains("deficient lag"), std::runtime_error);
}

TEST_CASE("gamma matrices: zeros, shift structure, deterministic rank") {
  const StateSpaceModel sys = benchmark::nonmin_phase();
  const IndexSelection none({}, {}, sys.l(), sys.m());
  const int i = 2;

  SUBCASE("zero data gives zero gammas") {
    Mat u = Mat::Zero(2, 60), y = Mat::Zero(2, 60);
    MarkovSequence mk = MarkovSequence::exact(sys, i + 1);
    auto g = build_gammas(u, y, mk, i, 40, none);
    CHECK(g.G0.norm() == 0.0);
    CHECK(g.G1.norm() == 0.0);
  }

  SUBCASE("first block rows of G1 equal last block rows of G0") {
    const Mat u = prbs(400, sys.m(), 1.0, 3);
    const IoDataset data =
        simulate(sys, u, FaultScenario::healthy(), true, 4).data;
    const MarkovSequence mk = estimate_markov(data, 10);
    auto g = build_gammas(data, mk, i, none);
    const int lp = none.lp();
    CHECK(
        (g.G1.topRows((i - 1) * lp) - g.G0.bottomRows((i - 1) * lp)).norm() ==
        0.0);
  }

  SUBCASE("noise-free row space is bounded by the state dimension") {
    const Mat u = prbs(400, sys.m(), 1.0, 3);
    const IoDataset data =
        simulate(sys, u, FaultScenario::healthy(), false, 4).data;
    const MarkovSequence mk = MarkovSequence::exact(sys, i + 1);
    const int i_big = 4;  // il' = 8 > n = 4
    const MarkovSequence mk_big = MarkovSequence::exact(sys, i_big + 1);
    auto g = build_gammas(data, mk_big, i_big, none);
    CHECK(numerical_rank(g.G0, 1e-8) <= sys.n());
  }
}

TEST_CASE("estimate_M reproduces the printed benchmark predictor") {
  const StateSpaceModel sys = benchmark::nonmin_phase(0.1);
  const IndexSelection none({}, {}, sys.l(), sys.m());
  const Mat u = prbs(1000, sys.m(), 3.0, 101);
  const IoDataset data =
      simulate(sys, u, FaultScenario::healthy(), true, 201).data;
  const MarkovSequence mk = estimate_markov(data, 12);
  const MEstimate est = estimate_M(build_gammas(data, mk, 2, none), 2, none);

  Mat expected(2, 4);
  expected << -0.30, 0.12, -0.51, 0.51, 0.28, -0.11, 0.31, -0.16;
  CHECK((est.M.bottomRows(2) - expected).cwiseAbs().maxCoeff() < 0.15);
  CHECK(est.structure_gap < 1e-6);
  CHECK((est.M.topRows(2) -
         (Mat(2, 4) << 0, 0, 1, 0, 0, 0, 0, 1).finished())
            .norm() == 0.0);
  CHECK(est.stable);
  CHECK(est.K1.rows() == 2);
  CHECK(est.K2.cols() == 2);
}

TEST_CASE("two-output one-kept-channel structure") {
  // l' = 1, i = 2: the predictor is 2x2 with first row (0, 1)
  const StateSpaceModel sys = benchmark::min_phase(0.1);
  const IndexSelection sel({2}, {}, sys.l(), sys.m());
  const Mat u = prbs(800, sys.m(), 1.0, 7);
  const IoDataset data =
      simulate(sys, u, FaultScenario::healthy(), true, 8).data;
  const MarkovSequence mk = estimate_markov(data, 12);
  const MEstimate est = estimate_M(build_gammas(data, mk, 2, sel), 2, sel);
  CHECK(est.M.rows() == 2);
  CHECK(est.M(0, 0) == 0.0);
  CHECK(est.M(0, 1) == 1.0);
}

TEST_CASE("noise-free estimate matches the exact predictor") {
  const StateSpaceModel sys = benchmark::min_phase();
  const IndexSelection none({}, {}, sys.l(), sys.m());
  const Mat u = prbs(900, sys.m(), 1.0, 5);
  const IoDataset data =
      simulate(sys, u, FaultScenario::healthy(), false, 0).data;
  const MarkovSequence mk = MarkovSequence::exact(sys, 3);
  const MEstimate est = estimate_M(build_gammas(data, mk, 2, none), 2, none);
  const Mat oracle = exact_M(sys, 2, none);
  CHECK((est.M - oracle).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("predictor accuracy does not degrade with longer trajectories") {
  const StateSpaceModel sys = benchmark::min_phase(0.1);
  const IndexSelection none({}, {}, sys.l(), sys.m());
  const Mat oracle = exact_M(sys, 2, none);
  // average Frobenius distance to the infinite-data limit is non-increasing
  // in j; compare against the large-j estimate rather than the noise-free
  // oracle (the noisy regression has its own limit)
  double err_small = 0.0, err_large = 0.0;
  const int seeds = 10;
  for (int s = 0; s < seeds; ++s) {
    const Mat u = prbs(1000, sys.m(), 1.0, 900 + s);
    const IoDataset data =
        simulate(sys, u, FaultScenario::healthy(), true, 950 + s).data;
    const MarkovSequence mk = estimate_markov(data, 12);
    auto eval_j = [&](int j) {
      const Mat& input = data.U;
      auto g = build_gammas(input, data.Y, mk, 2, j, none);
      return estimate_M(g, 2, none).M;
    };
    const Mat ref = eval_j(900);
    err_small += (eval_j(100) - ref).norm() / seeds;
    err_large += (eval_j(400) - ref).norm() / seeds;
  }
  CHECK(err_large < err_small);
}

TEST_SUITE_END();
