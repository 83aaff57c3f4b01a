#include "fdie/synth.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace fdie {

std::string to_string(FilterKind kind) {
  switch (kind) {
    case FilterKind::detection: return "detection";
    case FilterKind::actuator_isolation: return "actuator_isolation";
    case FilterKind::sensor_isolation: return "sensor_isolation";
    case FilterKind::sensor_estimation: return "sensor_estimation";
    case FilterKind::actuator_estimation: return "actuator_estimation";
  }
  return "?";
}

void FilterSpec::validate() const {
  if (i < 1) throw std::invalid_argument("FilterSpec: i must be >= 1");
  switch (kind) {
    case FilterKind::detection:
      if (sel.np() || sel.nq())
        throw std::invalid_argument("detection requires p and q empty");
      break;
    case FilterKind::sensor_estimation:
      if (sel.nq())
        throw std::invalid_argument("sensor_estimation requires q empty");
      break;
    case FilterKind::sensor_isolation:
      if (sel.nq())
        throw std::invalid_argument("sensor_isolation requires q empty");
      break;
    case FilterKind::actuator_isolation:
    case FilterKind::actuator_estimation:
      if (!sel.nq())
        throw std::invalid_argument(to_string(kind) + " requires nonempty q");
      break;
  }
}

int relative_degree(const MarkovSequence& markov, const IndexSelection& sel,
                    int i_max, double rank_decision_tol) {
  if (markov.L() < i_max)
    throw std::invalid_argument("relative_degree: not enough Markov blocks");
  const auto keep = block_offsets(sel.p_complement(), sel.l(), 1);
  const double scale = markov.H.empty() ? 0.0 : markov.H[0].norm();
  for (int tau = 0; tau <= i_max; ++tau) {
    bool leading_zero = true;
    for (int b = 0; b < tau && leading_zero; ++b)
      if (take_rows(markov.H[b], keep).norm() > rank_decision_tol * scale)
        leading_zero = false;
    if (!leading_zero) continue;
    // tau is the delay to the first nonzero restricted block
    if (take_rows(markov.H[tau], keep).norm() <= rank_decision_tol * scale)
      continue;
    Mat stacked((i_max - tau + 1) * sel.lp(), sel.m());
    for (int b = tau; b <= i_max; ++b)
      stacked.middleRows((b - tau) * sel.lp(), sel.lp()) =
          take_rows(markov.H[b], keep);
    if (numerical_rank(stacked, rank_decision_tol) == sel.m()) return tau;
  }
  throw std::runtime_error(
      "relative_degree: no delay up to " + std::to_string(i_max) +
      " yields a full-column-rank block stack");
}

int observability_index(const StateSpaceModel& model,
                        const IndexSelection& sel) {
  const auto keep = block_offsets(sel.p_complement(), model.l(), 1);
  const Mat c_rows = take_rows(model.C, keep);
  Mat stack(0, model.n());
  Mat cak = c_rows;
  for (int depth = 1; depth <= model.n(); ++depth) {
    Mat next(stack.rows() + c_rows.rows(), model.n());
    next << stack, cak;
    stack = next;
    if (numerical_rank(stack) == model.n()) return depth;
    cak = cak * model.A;
  }
  throw std::runtime_error("observability_index: pair not observable");
}

namespace {

// Output-injection gain via an iterated Riccati recursion for the pair
// (M, S) where S selects the coordinates the gain may use; columns outside
// `allowed` stay zero, so the result remains a valid column-zeroed gain.
Mat riccati_injection(const Mat& M, const std::vector<Eigen::Index>& allowed,
                      double weight) {
  const Eigen::Index d = M.rows();
  const Eigen::Index r = static_cast<Eigen::Index>(allowed.size());
  Mat Smat = Mat::Zero(r, d);
  for (Eigen::Index k = 0; k < r; ++k) Smat(k, allowed[k]) = 1.0;
  Mat P = Mat::Identity(d, d);
  const Mat Rw = weight * Mat::Identity(r, r);
  for (int it = 0; it < 5000; ++it) {
    const Mat SP = Smat * P;
    const Mat G = (SP * Smat.transpose() + Rw).ldlt().solve(SP);
    const Mat Pn =
        M * (P - SP.transpose() * G) * M.transpose() + Mat::Identity(d, d);
    const double delta = (Pn - P).norm();
    P = Pn;
    if (delta < 1e-12 * P.norm()) break;
  }
  const Mat gain = M * P * Smat.transpose() *
                   (Smat * P * Smat.transpose() + Rw).inverse();
  return gain * Smat;
}

Vec expand_poles(const std::vector<double>& poles, Eigen::Index dim) {
  Vec out(dim);
  if (poles.empty()) {
    out.setConstant(0.3);
    return out;
  }
  for (Eigen::Index k = 0; k < dim; ++k)
    out(k) = k < static_cast<Eigen::Index>(poles.size()) ? poles[k]
                                                         : poles.back();
  for (Eigen::Index k = 0; k < dim; ++k)
    if (std::abs(out(k)) >= 1.0)
      throw std::invalid_argument("requested pole outside the unit circle");
  return out;
}

/// Row/column selection the filter equations actually use. Sensor
/// estimators solve the full-width equations; their p only zeroes gain
/// columns and steers the output map.
IndexSelection equation_selection(const FilterSpec& spec) {
  if (spec.kind == FilterKind::sensor_estimation)
    return IndexSelection({}, {}, spec.sel.l(), spec.sel.m());
  return spec.sel;
}

FilterRealization solve_filter(const MarkovSequence& markov, const Mat& M,
                               const FilterSpec& spec, const SynthOptions& opts,
                               bool exact) {
  spec.validate();
  const IndexSelection eff = equation_selection(spec);
  const int i = spec.i, l = eff.l(), m = eff.m();
  if (markov.L() + 1 < i + 1)
    throw std::invalid_argument("solve_filter: need Markov blocks H0..H" +
                                std::to_string(i));
  const Eigen::Index d = static_cast<Eigen::Index>(i) * eff.lp();
  if (M.rows() != d || M.cols() != d)
    throw std::invalid_argument("solve_filter: M dimension mismatch");

  const BlockMatrixSet blocks = build_block_matrices(
      std::vector<Mat>(markov.H.begin(), markov.H.begin() + i), i - 1);
  const auto keep_p = block_offsets(eff.p_complement(), l, i);
  const Mat D_pm = take_rows(blocks.D, keep_p);
  const Mat cDp_pm = take_rows(blocks.curly_d_plus, keep_p);

  FilterRealization f;
  f.spec = spec;
  f.exact = exact;
  f.D_pm = D_pm;
  f.D_full = blocks.D;
  f.curly_d_plus_pm = cDp_pm;

  if (eff.nq() == 0) {
    const Vec poles = expand_poles(spec.ar_poles, d);
    Mat Lr = M - Mat(poles.asDiagonal());
    if (spec.kind == FilterKind::sensor_estimation && spec.sel.np() > 0) {
      for (Eigen::Index c : block_offsets(spec.sel.p(), l, i))
        Lr.col(c).setZero();
      Mat Ar = M - Lr;
      if (spectral_radius(Ar) >= 1.0 - 1e-9) {
        // The zero-column heuristic lost stability; fall back to a Riccati
        // output-injection gain restricted to the healthy-sensor columns.
        Lr = riccati_injection(
            M, block_offsets(spec.sel.p_complement(), l, i), opts.dare_weight);
        Ar = M - Lr;
        if (spectral_radius(Ar) >= 1.0 - 1e-9)
          throw InfeasibleSynthesis(
              "sensor filter: no Schur state matrix with the required zero "
              "columns",
              spectral_radius(Ar));
      }
      f.Ar = Ar;
    } else {
      f.Ar = Mat(poles.asDiagonal());
    }
    f.Lr = Lr;
  } else {
    // Decoupling from the q channels: base solution of the q+ equation plus
    // a randomized free term until the state matrix is Schur.
    const auto q_cols = block_offsets(eff.q(), m, i);
    const Mat Dq_plus = take_cols(D_pm, q_cols);
    const Mat cDq = take_cols(cDp_pm, block_offsets(eff.q(), m, 1));
    const Mat Inq =
        leading_selector(eff.nq(), static_cast<Eigen::Index>(i) * eff.nq());
    const Mat Dq_pinv = pinv_tol(Dq_plus, opts.rank_tol);
    const Mat base = cDq * Inq * Dq_pinv;
    const Mat proj = Mat::Identity(d, d) - Dq_plus * Dq_pinv;

    std::mt19937_64 gen(spec.theta_seed + 0x51D5ull);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    double best_rho = std::numeric_limits<double>::infinity();
    Mat best_Lr;
    const int total = static_cast<int>(opts.theta_gammas.size()) *
                      opts.theta_trials_per_gamma;
    for (int trial = 0; trial <= total; ++trial) {
      Mat theta = Mat::Zero(d, d);
      if (trial > 0) {
        const double g =
            opts.theta_gammas[(trial - 1) / opts.theta_trials_per_gamma];
        for (Eigen::Index r = 0; r < d; ++r)
          for (Eigen::Index c = 0; c < d; ++c) theta(r, c) = g * unif(gen);
      }
      const Mat Lr = base + theta * proj;
      const double rho = spectral_radius(M - Lr);
      if (rho < best_rho) {
        best_rho = rho;
        best_Lr = Lr;
      }
      if (trial == 0 && rho < 1.0 - 1e-9) break;
    }
    if (best_rho >= 1.0 - 1e-9)
      throw InfeasibleSynthesis(
          "decoupled synthesis infeasible for the q selection (subsystem has "
          "no stable inverse); best spectral radius " +
              std::to_string(best_rho),
          best_rho);
    f.Lr = best_Lr;
    f.Ar = M - best_Lr;
    f.eq_qplus_residual = (f.Lr * Dq_plus - cDq * Inq).norm();
  }

  const auto qc_cols = block_offsets(eff.q_complement(), m, i);
  const Mat Dq_minus = take_cols(D_pm, qc_cols);
  const Mat cDq_minus =
      take_cols(cDp_pm, block_offsets(eff.q_complement(), m, 1));
  if (eff.mp() > 0) {
    const Mat Imp =
        leading_selector(eff.mp(), static_cast<Eigen::Index>(i) * eff.mp());
    f.Br = cDq_minus * Imp - f.Lr * Dq_minus;
    f.eq_br_residual = (f.Br - (cDq_minus * Imp - f.Lr * Dq_minus)).norm();
  } else {
    f.Br = Mat(d, 0);
  }

  f.rho = spectral_radius(f.Ar);
  f.eq_sum_residual = (f.Ar + f.Lr - M).norm();
  return f;
}

}  // namespace

FilterRealization synthesize_exact(const StateSpaceModel& model,
                                   const FilterSpec& spec,
                                   const SynthOptions& opts) {
  spec.validate();
  const MarkovSequence markov = MarkovSequence::exact(model, spec.i + 2);
  const Mat M = exact_M(model, spec.i, equation_selection(spec), opts.rank_tol);
  return solve_filter(markov, M, spec, opts, /*exact=*/true);
}

FilterRealization synthesize_data_driven(const MarkovSequence& markov,
                                         const MEstimate& m_est,
                                         const FilterSpec& spec,
                                         const SynthOptions& opts) {
  spec.validate();
  if (m_est.i != spec.i)
    throw std::invalid_argument("synthesize_data_driven: M depth mismatch");
  const IndexSelection eff = equation_selection(spec);
  if (m_est.sel.np() != eff.np())
    throw std::invalid_argument(
        "synthesize_data_driven: M was estimated under a different p "
        "selection than the filter equations use");
  return solve_filter(markov, m_est.M, spec, opts, /*exact=*/false);
}

FilterRealization reduce_filter(const FilterRealization& filter) {
  const auto& spec = filter.spec;
  if (spec.sel.nq() != 0)
    throw std::invalid_argument(
        "reduce_filter: only q-empty filters admit the reduced form");
  Mat offdiag = filter.Ar;
  offdiag.diagonal().setZero();
  if (offdiag.norm() > 1e-12)
    throw std::invalid_argument("reduce_filter: state matrix not diagonal");

  const int lp = equation_selection(spec).lp();
  FilterRealization r = filter;
  r.reduced = true;
  r.Ar = filter.Ar.bottomRightCorner(lp, lp);
  r.Br = filter.Br.bottomRows(lp);
  r.Lr = filter.Lr.bottomRows(lp);
  r.rho = spectral_radius(r.Ar);
  return r;
}

}  // namespace fdie
