#include "fdie/tuning.hpp"

#include <cmath>
#include <complex>

namespace fdie {

namespace {

const Mat& tuning_input(const IoDataset& data) {
  return data.reference.size() ? data.reference : data.U;
}

struct ZLayout {
  std::vector<Eigen::Index> u_cols;  // stack offsets kept from U
  std::vector<Eigen::Index> y_rows;  // stack offsets kept from Y
  int w_u = 0;
  int w_y = 0;
};

// Regressor layout of the error-dynamics input z. The sensor constraint
// (zero columns against the faulty sensors) is imposed by dropping those
// columns here and re-inserting zeros after the solve.
ZLayout z_layout(const FilterRealization& filter) {
  const FilterSpec& spec = filter.spec;
  ZLayout z;
  if (spec.kind == FilterKind::sensor_estimation) {
    const IndexSelection all({}, {}, spec.sel.l(), spec.sel.m());
    z.u_cols = block_offsets(all.q_complement(), spec.sel.m(), spec.i);
    z.y_rows = block_offsets(spec.sel.p_complement(), spec.sel.l(), spec.i);
  } else {
    z.u_cols = block_offsets(spec.sel.q_complement(), spec.sel.m(), spec.i);
    z.y_rows = block_offsets(spec.sel.p_complement(), spec.sel.l(), spec.i);
  }
  z.w_u = static_cast<int>(z.u_cols.size());
  z.w_y = static_cast<int>(z.y_rows.size());
  return z;
}

Vec z_vector(const Mat& U, const Mat& Y, int t, int i, const ZLayout& z) {
  const int m = static_cast<int>(U.rows());
  const int l = static_cast<int>(Y.rows());
  Vec out(z.w_u + z.w_y);
  for (int k = 0; k < z.w_u; ++k) {
    const Eigen::Index off = z.u_cols[k];
    out(k) = U(off % m, t - i + off / m);
  }
  for (int k = 0; k < z.w_y; ++k) {
    const Eigen::Index off = z.y_rows[k];
    out(z.w_u + k) = Y(off % l, t - i + off / l);
  }
  return out;
}

}  // namespace

std::pair<IoDataset, IoDataset> split_data(const IoDataset& data, double ratio,
                                           int min_len) {
  const int T = data.T();
  const int T1 = static_cast<int>(std::llround(ratio * T));
  const int T2 = T - T1;
  if (T1 < min_len || T2 < min_len)
    throw std::invalid_argument(
        "split_data: ratio " + std::to_string(ratio) + " leaves segments " +
        std::to_string(T1) + "/" + std::to_string(T2) +
        ", below the minimum of " + std::to_string(min_len));
  auto slice = [&](int from, int len) {
    IoDataset d;
    d.U = data.U.middleCols(from, len);
    d.Y = data.Y.middleCols(from, len);
    if (data.reference.size())
      d.reference = data.reference.middleCols(from, len);
    d.seed = data.seed;
    return d;
  };
  return {slice(0, T1), slice(T1, T2)};
}

ErrorTrace build_error_trace(const FilterRealization& filter,
                             const IoDataset& segment2, const Vec& eta0) {
  const FilterKind kind = filter.spec.kind;
  if (kind != FilterKind::sensor_estimation &&
      kind != FilterKind::actuator_estimation)
    throw std::invalid_argument(
        "build_error_trace: needs an estimation-kind filter");
  ErrorTrace tr;
  tr.i = filter.spec.i;
  const ResidualTrace rt = run_residual(filter, segment2, eta0);
  tr.inner = rt.inner;
  if (kind == FilterKind::sensor_estimation) {
    tr.bias = tr.inner.leftCols(filter.spec.sel.l());
  } else {
    const Mat D_pinv = pinv_tol(filter.D_pm);
    tr.bias = (tr.inner * D_pinv.transpose()).leftCols(filter.spec.sel.m());
  }
  return tr;
}

int choose_lambda(const Mat& Ar, double tol, int cap) {
  Mat p = Ar;
  int lambda = 1;
  while (lambda < cap) {
    Eigen::BDCSVD<Mat> svd(p);
    if (svd.singularValues()(0) < tol) break;
    p = p * Ar;
    ++lambda;
  }
  return lambda;
}

ErrorDynamicsEstimate identify_error_dynamics(const ErrorTrace& trace,
                                              const IoDataset& segment2,
                                              const FilterRealization& filter,
                                              int lambda,
                                              const TuningOptions& opts) {
  const int i = filter.spec.i;
  const Mat& U = tuning_input(segment2);
  const Mat& Y = segment2.Y;
  const int T = static_cast<int>(U.cols());
  if (trace.i != i || trace.inner.rows() != T - i)
    throw std::invalid_argument("identify_error_dynamics: trace mismatch");
  if (i + lambda >= T)
    throw std::invalid_argument(
        "identify_error_dynamics: lambda exceeds the tuning segment");

  const ZLayout z = z_layout(filter);
  const int w = z.w_u + z.w_y;
  const Eigen::Index d = filter.Ar.rows();
  const int n_cols = T - (i + lambda);

  // Regressor of the two-stage route: columns [z(t-lambda); ...; z(t)].
  Mat Zm((lambda + 1) * w, n_cols);
  Mat Em(d, n_cols);
  for (int c = 0; c < n_cols; ++c) {
    const int t = i + lambda + c;
    for (int b = 0; b <= lambda; ++b)
      Zm.block(b * w, c, w, 1) = z_vector(U, Y, t - lambda + b, i, z);
    Em.col(c) = -trace.inner.row(t - i).transpose();
  }
  if (Zm.cwiseAbs().maxCoeff() == 0.0)
    throw std::invalid_argument("identify_error_dynamics: degenerate regressor");

  ErrorDynamicsEstimate est;
  est.lambda = lambda;
  est.w_u = z.w_u;
  est.w_y = z.w_y;
  est.rank_ok = numerical_rank(Zm, 1e-8) == Zm.rows();

  Mat B_hat, G1;
  if (est.rank_ok) {
    // Full-row-rank regressor: block coefficients from one pseudo-inverse,
    // then the power-basis stack solve.
    est.used_pinv_route = true;
    const Mat tau = Em * pinv_tol(Zm, opts.rank_tol);
    Mat stacked(lambda * d, w);
    Mat apow = Mat::Identity(d, d);
    Mat basis(lambda * d, d);
    for (int b = 0; b < lambda; ++b) {
      // tau block b holds the coefficient of z(t-lambda+b) = A^{lambda-1-b} B.
      stacked.middleRows((lambda - 1 - b) * d, d) = tau.middleCols(b * w, w);
      basis.middleRows(b * d, d) = apow;
      apow = apow * filter.Ar;
    }
    B_hat = pinv_tol(basis, opts.rank_tol) * stacked;
    G1 = tau.middleCols(lambda * w, w).leftCols(z.w_u);
    est.residual = (Em - tau * Zm).norm();
  } else {
    // Rank-deficient regressor: minimise the same objective directly in the
    // structured parameters. Features follow the recursion
    // G(t+1) = kron(z(t)', I) + Ar G(t); terms older than lambda carry
    // |Ar^lambda| < tol and are negligible by construction.
    const Eigen::Index nB = d * w;
    const Eigen::Index nG = d * z.w_u;
    Mat R(static_cast<Eigen::Index>(n_cols) * d, nB + nG);
    Vec target(static_cast<Eigen::Index>(n_cols) * d);
    Mat feat = Mat::Zero(d, nB);
    int row = 0;
    for (int t = i; t < T; ++t) {
      const Vec zt = z_vector(U, Y, t, i, z);
      if (t >= i + lambda) {
        R.middleRows(static_cast<Eigen::Index>(row) * d, d).setZero();
        R.block(static_cast<Eigen::Index>(row) * d, 0, d, nB) = feat;
        for (int j = 0; j < z.w_u; ++j)
          R.block(static_cast<Eigen::Index>(row) * d, nB + j * d, d, d) =
              zt(j) * Mat::Identity(d, d);
        target.segment(static_cast<Eigen::Index>(row) * d, d) =
            -trace.inner.row(t - i).transpose();
        ++row;
      }
      // shift the feature bank one step
      Mat next(d, nB);
      for (int j = 0; j < w; ++j)
        next.middleCols(static_cast<Eigen::Index>(j) * d, d) =
            zt(j) * Mat::Identity(d, d);
      feat = next + filter.Ar * feat;
    }
    const Mat sol = solve_ridge(R, target, opts.ridge, opts.rank_tol);
    B_hat = Mat(d, w);
    for (int j = 0; j < w; ++j)
      B_hat.col(j) = sol.block(static_cast<Eigen::Index>(j) * d, 0, d, 1);
    G1 = Mat::Zero(d, z.w_u);
    for (int j = 0; j < z.w_u; ++j)
      G1.col(j) = sol.block(nB + static_cast<Eigen::Index>(j) * d, 0, d, 1);
    est.residual = (R * sol - target).norm();
  }

  if (opts.zero_leading_feedthrough && G1.rows() > 0) {
    // no instantaneous feedthrough exists in the lower-Toeplitz model class
    const int lead = static_cast<int>(d) / i;
    G1.topRows(lead).setZero();
  }

  // Sensor kind: re-insert zero columns against the faulty sensors so the
  // corrected input matrix stays insensitive to them.
  if (filter.spec.kind == FilterKind::sensor_estimation &&
      filter.spec.sel.np() > 0) {
    const int l = filter.spec.sel.l();
    Mat full = Mat::Zero(d, z.w_u + static_cast<Eigen::Index>(i) * l);
    full.leftCols(z.w_u) = B_hat.leftCols(z.w_u);
    int src = 0;
    for (Eigen::Index off : z.y_rows)
      full.col(z.w_u + off) = B_hat.col(z.w_u + src++);
    est.B_hat = full;
    est.w_y = i * l;
  } else {
    est.B_hat = B_hat;
  }
  est.G1_hat = G1;
  return est;
}

TunedFilter tune_filter(const FilterRealization& base,
                        const ErrorDynamicsEstimate& est) {
  const FilterSpec& spec = base.spec;
  if (spec.kind != FilterKind::sensor_estimation &&
      spec.kind != FilterKind::actuator_estimation)
    throw std::invalid_argument("tune_filter: needs an estimation-kind filter");
  const Eigen::Index d = base.Ar.rows();
  if (est.B_hat.rows() != d)
    throw std::invalid_argument("tune_filter: estimate/base dimension mismatch");
  Mat base_input(d, base.Br.cols() + base.Lr.cols());
  base_input << base.Br, base.Lr;
  if (base_input.cols() != est.B_hat.cols())
    throw std::invalid_argument("tune_filter: correction width mismatch");

  TunedFilter t;
  t.Ar = base.Ar;
  t.spec = spec;
  t.B_tilde = base_input + est.B_hat;

  // Feedthrough correction: expand over the q columns that carry no
  // correction, then add to the restricted Toeplitz block.
  const int i = spec.i, m = spec.sel.m();
  Mat g_full = Mat::Zero(d, static_cast<Eigen::Index>(i) * m);
  if (est.G1_hat.cols() > 0) {
    const auto u_cols = block_offsets(spec.sel.q_complement(), m, i);
    for (size_t k = 0; k < u_cols.size(); ++k)
      g_full.col(u_cols[k]) = est.G1_hat.col(k);
  }
  const Mat& base_d = spec.kind == FilterKind::sensor_estimation
                          ? base.D_full
                          : base.D_pm;
  t.D_tilde = base_d + g_full;
  return t;
}

FaultEstimateTrace run_tuned(const TunedFilter& filter, const IoDataset& data,
                             const Vec& eta0) {
  const FilterSpec& spec = filter.spec;
  const Mat& U = data.reference.size() ? data.reference : data.U;
  const Mat& Y = data.Y;
  const int i = spec.i;
  const int T = static_cast<int>(U.cols());
  const int l = spec.sel.l(), m = spec.sel.m();
  const Eigen::Index d = filter.Ar.rows();
  const bool sensor = spec.kind == FilterKind::sensor_estimation;

  // z consumed by the state recursion
  std::vector<Eigen::Index> z_u, z_y;
  if (sensor) {
    z_u = block_offsets(IndexSelection({}, {}, l, m).q_complement(), m, i);
    z_y = block_offsets(IndexSelection({}, {}, l, m).p_complement(), l, i);
  } else {
    z_u = block_offsets(spec.sel.q_complement(), m, i);
    z_y = block_offsets(spec.sel.p_complement(), l, i);
  }
  const auto out_rows =
      sensor ? block_offsets(IndexSelection({}, {}, l, m).p_complement(), l, i)
             : block_offsets(spec.sel.p_complement(), l, i);

  Mat D_pinv;
  if (!sensor) D_pinv = pinv_tol(filter.D_tilde);

  Vec eta = eta0.size() ? eta0 : Vec::Zero(d);
  FaultEstimateTrace est;
  est.delay = i;
  est.f_hat = Mat(T - i, sensor ? l : m);

  Vec us(static_cast<Eigen::Index>(i) * m);
  Vec ys(static_cast<Eigen::Index>(out_rows.size()));
  for (int t = i; t < T; ++t) {
    for (int b = 0; b < i; ++b)
      us.segment(static_cast<Eigen::Index>(b) * m, m) = U.col(t - i + b);
    for (size_t r = 0; r < out_rows.size(); ++r) {
      const Eigen::Index off = out_rows[r];
      ys(r) = Y(off % l, t - i + off / l);
    }
    const Vec inner = eta - ys + filter.D_tilde * us;
    if (sensor) {
      est.f_hat.row(t - i) = -inner.head(l).transpose();
    } else {
      est.f_hat.row(t - i) = -(D_pinv * inner).head(m).transpose();
    }
    Vec zz(static_cast<Eigen::Index>(z_u.size() + z_y.size()));
    for (size_t k = 0; k < z_u.size(); ++k) zz(k) = us(z_u[k]);
    for (size_t k = 0; k < z_y.size(); ++k) {
      const Eigen::Index off = z_y[k];
      zz(z_u.size() + k) = Y(off % l, t - i + off / l);
    }
    eta = filter.Ar * eta + filter.B_tilde * zz;
  }
  return est;
}

double predict_error_bound(const ErrorDynamicsEstimate& est, const Mat& Ar,
                           double z_norm, int grid) {
  const Eigen::Index d = Ar.rows();
  if (est.B_hat.size() == 0) return 0.0;
  Mat G = Mat::Zero(d, est.B_hat.cols());
  if (est.G1_hat.cols() > 0) G.leftCols(est.G1_hat.cols()) = est.G1_hat;
  using CMat = Eigen::MatrixXcd;
  double peak = 0.0;
  for (int g = 0; g < grid; ++g) {
    const double th = 2.0 * M_PI * g / grid;
    const std::complex<double> zc(std::cos(th), std::sin(th));
    CMat zi = zc * CMat::Identity(d, d) - Ar.cast<std::complex<double>>();
    CMat tf = zi.partialPivLu().solve(est.B_hat.cast<std::complex<double>>()) +
              G.cast<std::complex<double>>();
    Eigen::BDCSVD<CMat> svd(tf);
    peak = std::max(peak, svd.singularValues()(0));
  }
  return peak * z_norm;
}

}  // namespace fdie
