#ifndef FDIE_LINALG_HPP
#define FDIE_LINALG_HPP

#include <Eigen/Dense>

namespace fdie {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

/// Default relative singular-value cutoff for pseudo-inverses.
/// Identification noise floors sit far above machine epsilon.
inline constexpr double kDefaultRankTol = 1e-10;

/// Moore-Penrose pseudo-inverse with singular values below
/// rank_tolerance * sigma_max treated as zero. A zero matrix maps to a
/// zero pseudo-inverse.
Mat pinv_tol(const Mat& a, double rank_tolerance = kDefaultRankTol);

/// Tikhonov-damped least-squares solve: minimises |a x - b|^2 + mu^2 |x|^2
/// with mu = rel_ridge * sigma_max(a). rel_ridge = 0 reduces to pinv_tol.
Mat solve_ridge(const Mat& a, const Mat& b, double rel_ridge,
                double rank_tolerance = kDefaultRankTol);

double spectral_radius(const Mat& a);

/// Leading-rows selector [I_rows 0], rows x total_cols.
Mat leading_selector(Eigen::Index rows, Eigen::Index total_cols);

/// Numerical rank against rel_tol * sigma_max.
Eigen::Index numerical_rank(const Mat& a, double rel_tol = 1e-8);

/// 2-norm of a^power (power >= 0).
double power_norm(const Mat& a, int power);

}  // namespace fdie

#endif
