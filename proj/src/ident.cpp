#include "fdie/ident.hpp"

#include <stdexcept>

namespace fdie {

MarkovSequence MarkovSequence::exact(const StateSpaceModel& model, int L) {
  MarkovSequence seq;
  seq.H = model.markov(L + 1);
  seq.source = MarkovSource::exact;
  return seq;
}

int default_fir_order(int i) { return 4 * i + 4; }

bool markov_tail_ok(const MarkovSequence& seq, double ratio) {
  if (seq.H.size() < 2) return false;
  return seq.H.back().norm() < ratio * seq.H.front().norm();
}

MarkovSequence estimate_markov(const Mat& U, const Mat& Y, int L,
                               double rank_tol) {
  const int m = static_cast<int>(U.rows());
  const int l = static_cast<int>(Y.rows());
  const int T = static_cast<int>(U.cols());
  if (Y.cols() != T) throw std::invalid_argument("estimate_markov: U/Y length mismatch");
  const int p = (L + 1) * m;
  const int rows = T - (L + 1);
  if (rows < p)
    throw std::invalid_argument("estimate_markov: record too short for order " +
                                std::to_string(L));

  // Regressors are the delayed inputs u(k-1)..u(k-1-L); the model class has
  // no direct feedthrough, so delay zero is excluded.
  Mat phi(rows, p);
  Mat targ(rows, l);
  for (int r = 0; r < rows; ++r) {
    const int k = L + 1 + r;
    for (int b = 0; b <= L; ++b)
      phi.block(r, b * m, 1, m) = U.col(k - 1 - b).transpose();
    targ.row(r) = Y.col(k).transpose();
  }

  // Persistent-excitation check, reported lag-by-lag so a deficient input
  // is diagnosable.
  const Eigen::Index rank = numerical_rank(phi, rank_tol);
  if (rank < p) {
    int deficient_lag = L;
    for (int b = 0; b <= L; ++b) {
      const Eigen::Index r = numerical_rank(phi.leftCols((b + 1) * m), rank_tol);
      if (r < (b + 1) * m) {
        deficient_lag = b;
        break;
      }
    }
    throw std::runtime_error(
        "estimate_markov: input not persistently exciting (regressor rank " +
        std::to_string(rank) + " < " + std::to_string(p) +
        ", first deficient lag " + std::to_string(deficient_lag) + ")");
  }

  const Mat theta = phi.colPivHouseholderQr().solve(targ);
  MarkovSequence seq;
  seq.source = MarkovSource::estimated;
  seq.H.reserve(L + 1);
  for (int b = 0; b <= L; ++b)
    seq.H.push_back(theta.middleRows(b * m, m).transpose());
  return seq;
}

MarkovSequence estimate_markov(const IoDataset& data, int L, double rank_tol) {
  const Mat& input = data.reference.size() ? data.reference : data.U;
  return estimate_markov(input, data.Y, L, rank_tol);
}

GammaPair build_gammas(const Mat& U, const Mat& Y, const MarkovSequence& markov,
                       int i, int j, const IndexSelection& sel) {
  const int l = sel.l(), m = sel.m();
  if (markov.l() != l || markov.m() != m)
    throw std::invalid_argument("build_gammas: Markov dimensions mismatch");
  if (markov.L() + 1 < i)
    throw std::invalid_argument("build_gammas: need Markov blocks H0..H" +
                                std::to_string(i - 1));
  const int T = static_cast<int>(U.cols());
  if (j < 1 || i + j > T)
    throw std::invalid_argument("build_gammas: insufficient data for i=" +
                                std::to_string(i) + ", j=" + std::to_string(j));

  // Depth-i Toeplitz blocks: D maps U_i(k) into Y_i(k), D_shift into
  // Y_i(k+1). build_block_matrices at depth i-1 yields exactly those.
  const BlockMatrixSet blocks = build_block_matrices(
      std::vector<Mat>(markov.H.begin(), markov.H.begin() + i), i - 1);
  const auto keep_rows =
      block_offsets(sel.p_complement(), l, i);
  const Mat D_pm = take_rows(blocks.D, keep_rows);
  const Mat Dp_pm = take_rows(blocks.D_plus, keep_rows);

  StackWindow w0{i - 1, j - 1, 0};
  const Mat Yh0 = take_rows(build_hankel(Y, w0), keep_rows);
  StackWindow w1{i - 1, j - 1, 1};
  const Mat Yh1 = take_rows(build_hankel(Y, w1), keep_rows);
  const Mat Uh = build_hankel(U, w0);

  GammaPair g;
  g.G0 = Yh0 - D_pm * Uh;
  g.G1 = Yh1 - Dp_pm * Uh;
  return g;
}

GammaPair build_gammas(const IoDataset& data, const MarkovSequence& markov,
                       int i, const IndexSelection& sel) {
  const Mat& input = data.reference.size() ? data.reference : data.U;
  const int j = data.T() - i - 2;
  return build_gammas(input, data.Y, markov, i, j, sel);
}

MEstimate estimate_M(const GammaPair& gammas, int i, const IndexSelection& sel,
                     double rank_tol) {
  const int lp = sel.lp();
  const Eigen::Index d = gammas.G0.rows();
  if (d != static_cast<Eigen::Index>(i) * lp || gammas.G1.rows() != d)
    throw std::invalid_argument("estimate_M: gamma row count != i*l'");
  if (numerical_rank(gammas.G0, 1e-10) < d)
    throw std::runtime_error(
        "estimate_M: data matrix is row-rank deficient; increase the "
        "trajectory width j or use a richer excitation");

  MEstimate est;
  est.i = i;
  est.sel = sel;
  est.M = gammas.G1 * pinv_tol(gammas.G0, rank_tol);

  const Eigen::Index top = static_cast<Eigen::Index>(i - 1) * lp;
  Mat shift = Mat::Zero(top, d);
  shift.rightCols(top).setIdentity();
  est.structure_gap = (est.M.topRows(top) - shift).norm();
  est.M.topRows(top) = shift;  // structural rows hold exactly

  est.K1 = est.M.bottomRows(lp).leftCols(lp);
  est.K2 = est.M.bottomRows(lp).rightCols(d - lp);
  est.residual_norm = (gammas.G1 - est.M * gammas.G0).norm();
  est.rho = spectral_radius(est.M);
  est.stable = est.rho < 1.0 - 1e-6;
  return est;
}

Mat exact_M(const StateSpaceModel& model, int i, const IndexSelection& sel,
            double rank_tol) {
  const int l = model.l(), n = model.n();
  Mat obs(i * l, n), obs_shift(i * l, n);
  Mat cak = model.C;
  for (int r = 0; r < i; ++r) {
    obs.middleRows(r * l, l) = cak;
    cak = cak * model.A;
    obs_shift.middleRows(r * l, l) = cak;
  }
  const auto keep = block_offsets(sel.p_complement(), l, i);
  return take_rows(obs_shift, keep) * pinv_tol(take_rows(obs, keep), rank_tol);
}

}  // namespace fdie
