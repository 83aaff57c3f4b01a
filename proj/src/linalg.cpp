#include "fdie/linalg.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

namespace fdie {

Mat pinv_tol(const Mat& a, double rank_tolerance) {
  if (a.size() == 0) return Mat(a.cols(), a.rows());
  Eigen::BDCSVD<Mat> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& s = svd.singularValues();
  if (s.size() == 0 || s(0) <= 0.0) return Mat::Zero(a.cols(), a.rows());
  const double cut = rank_tolerance * s(0);
  Vec inv = Vec::Zero(s.size());
  for (Eigen::Index k = 0; k < s.size(); ++k)
    if (s(k) > cut) inv(k) = 1.0 / s(k);
  return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
}

Mat solve_ridge(const Mat& a, const Mat& b, double rel_ridge,
                double rank_tolerance) {
  if (a.size() == 0) return Mat(a.cols(), b.cols());
  Eigen::BDCSVD<Mat> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& s = svd.singularValues();
  if (s.size() == 0 || s(0) <= 0.0) return Mat::Zero(a.cols(), b.cols());
  const double cut = rank_tolerance * s(0);
  const double mu = rel_ridge * s(0);
  Vec d = Vec::Zero(s.size());
  for (Eigen::Index k = 0; k < s.size(); ++k)
    if (s(k) > cut) d(k) = s(k) / (s(k) * s(k) + mu * mu);
  return svd.matrixV() * d.asDiagonal() * (svd.matrixU().transpose() * b);
}

double spectral_radius(const Mat& a) {
  if (a.size() == 0) return 0.0;
  Eigen::EigenSolver<Mat> es(a, /*computeEigenvectors=*/false);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

Mat leading_selector(Eigen::Index rows, Eigen::Index total_cols) {
  Mat s = Mat::Zero(rows, total_cols);
  s.leftCols(rows).setIdentity();
  return s;
}

Eigen::Index numerical_rank(const Mat& a, double rel_tol) {
  if (a.size() == 0) return 0;
  Eigen::BDCSVD<Mat> svd(a);
  const auto& s = svd.singularValues();
  if (s.size() == 0 || s(0) <= 0.0) return 0;
  const double cut = rel_tol * s(0);
  Eigen::Index r = 0;
  for (Eigen::Index k = 0; k < s.size(); ++k)
    if (s(k) > cut) ++r;
  return r;
}

double power_norm(const Mat& a, int power) {
  Mat p = Mat::Identity(a.rows(), a.cols());
  for (int k = 0; k < power; ++k) p = p * a;
  Eigen::BDCSVD<Mat> svd(p);
  return svd.singularValues().size() ? svd.singularValues()(0) : 0.0;
}

}  // namespace fdie
