#ifndef FDIE_TUNING_HPP
#define FDIE_TUNING_HPP

#include "fdie/runtime.hpp"

namespace fdie {

/// Identified estimation-error dynamics of an estimation filter:
///   xi(k+1) = Ar xi(k) + B_hat z(k),  bias(k) = xi(k) + G1_hat u-part(k)
/// where z stacks the filter's input and output windows.
struct ErrorDynamicsEstimate {
  Mat B_hat;    // il' x (w_u + w_y)
  Mat G1_hat;   // il' x w_u feedthrough block (first block row is zero)
  int lambda = 0;
  double residual = 0.0;   // least-squares residual norm
  bool rank_ok = false;    // regressor had full row rank (consistent solve)
  bool used_pinv_route = false;  // full-rank two-stage route taken
  int w_u = 0;
  int w_y = 0;
};

/// Estimation filter with identified corrections folded into the input and
/// feedthrough matrices.
struct TunedFilter {
  Mat Ar;
  Mat B_tilde;   // [Br Lr] + B_hat
  Mat D_tilde;   // D + G1_hat
  FilterSpec spec;
  std::string base_filter_id;
};

struct TuningOptions {
  double lambda_tol = 1e-6;   // |Ar^lambda| threshold
  int lambda_cap_margin = 2;  // lambda <= segment - i - margin
  double ridge = 1e-2;        // relative Tikhonov damping of the solve
  double rank_tol = kDefaultRankTol;
  /// Force the leading block row of the feedthrough correction to zero
  /// (structurally exact for the lower-Toeplitz model class). Worth it when
  /// the tuning and evaluation references live on different manifolds;
  /// otherwise the fitted block is a legitimate in-class correction.
  bool zero_leading_feedthrough = false;
};

/// Contiguous prefix/suffix split at the ratio point. Refuses splits that
/// leave either side shorter than min_len.
std::pair<IoDataset, IoDataset> split_data(const IoDataset& data, double ratio,
                                           int min_len = 2);

/// Error realization from running an (untuned) estimator over healthy data:
/// keeps the raw inner-residual trace (the regression target) and the
/// negated estimate series (the visible bias).
struct ErrorTrace {
  Mat inner;      // (T-i) x il'
  Mat bias;       // (T-i) x channels, = -f_hat on healthy data
  int i = 0;
};

ErrorTrace build_error_trace(const FilterRealization& filter,
                             const IoDataset& segment2, const Vec& eta0 = Vec());

/// Smallest lambda with |Ar^lambda|_2 < tol, capped at `cap`.
int choose_lambda(const Mat& Ar, double tol = 1e-6, int cap = 1 << 20);

/// Solves the truncated-memory regression for (B, G1).
///
/// With a full-row-rank regressor the two-stage route applies: the block
/// coefficient matrix from one pseudo-inverse, then the stacked power-basis
/// solve. Otherwise the same objective is minimised directly in the
/// structured parameters (recursive feature propagation), with optional
/// Tikhonov damping. The feedthrough block's first block row is zero by
/// the Toeplitz structure and is enforced. Sensor kind removes the faulty
/// sensors' output columns before solving and re-inserts zero columns.
ErrorDynamicsEstimate identify_error_dynamics(const ErrorTrace& trace,
                                              const IoDataset& segment2,
                                              const FilterRealization& filter,
                                              int lambda,
                                              const TuningOptions& opts = {});

/// Folds the identified corrections into the base realization.
TunedFilter tune_filter(const FilterRealization& base,
                        const ErrorDynamicsEstimate& est);

/// Runs a tuned estimation filter; returns time-aligned fault estimates.
FaultEstimateTrace run_tuned(const TunedFilter& filter, const IoDataset& data,
                             const Vec& eta0 = Vec());

/// L2-gain error margin: sup over the unit circle of
/// |C (zI - Ar)^{-1} B_hat + G|_2 times the input-sequence norm.
double predict_error_bound(const ErrorDynamicsEstimate& est, const Mat& Ar,
                           double z_norm, int grid = 512);

}  // namespace fdie

#endif
