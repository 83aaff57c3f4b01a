#ifndef FDIE_STRUCTMAT_HPP
#define FDIE_STRUCTMAT_HPP

#include <stdexcept>
#include <string>
#include <vector>

#include "fdie/linalg.hpp"

namespace fdie {

/// Channel subsets steering which outputs (p) and inputs (q) a filter
/// consumes. Channels are 1-based, matching the usual control-literature
/// convention; conversion to 0-based offsets happens internally.
class IndexSelection {
 public:
  IndexSelection() = default;
  IndexSelection(std::vector<int> p, std::vector<int> q, int l, int m);

  const std::vector<int>& p() const { return p_; }
  const std::vector<int>& q() const { return q_; }
  int l() const { return l_; }
  int m() const { return m_; }
  int np() const { return static_cast<int>(p_.size()); }
  int nq() const { return static_cast<int>(q_.size()); }
  int lp() const { return l_ - np(); }  // l' = l - n_p
  int mp() const { return m_ - nq(); }  // m' = m - n_q

  std::vector<int> p_complement() const;  // ~p, 1-based
  std::vector<int> q_complement() const;  // ~q, 1-based

 private:
  std::vector<int> p_, q_;
  int l_ = 0, m_ = 0;

  static void validate(const std::vector<int>& s, int bound, const char* name);
};

/// Stacking window: depth i block rows starting at sample k0; j trajectory
/// columns for Hankel forms.
struct StackWindow {
  int i = 1;
  int j = 1;
  int k0 = 0;
};

/// Block-Toeplitz bundle built from Markov parameters at depth i:
///   D       ((i+1)l x (i+1)m)  strictly lower, H0 on the first subdiagonal
///   D_plus  ((i+1)l x (i+1)m)  lower, H0 on the main block diagonal
///   curly_d ((i)l   x m)       column stack [0; H1; ...; H_{i-1}]
///   curly_d_plus ((i+1)l x m)  column stack [H0; ...; H_i]
struct BlockMatrixSet {
  Mat D;
  Mat D_plus;
  Mat curly_d;
  Mat curly_d_plus;
  int i = 0;
  int l = 0;
  int m = 0;
};

enum class SelectMode {
  rows_drop_p,
  rows_keep_p,
  cols_drop_q,
  cols_keep_q,
  rows_drop_q,
  rows_keep_q,
};

/// Stacks series samples g(k0), g(k0+1), ..., g(k0+i) into one column
/// (i+1 blocks); with plus, appends g(k0+i+1).
Vec stack_signal(const Mat& series, const StackWindow& window,
                 bool plus = false);

/// Block Hankel whose column c is stack_signal started at k0+c,
/// c = 0..j. Dimensions ((i+1)*dim) x (j+1).
Mat build_hankel(const Mat& series, const StackWindow& window);

/// Builds the Toeplitz bundle from Markov blocks H0..H_i (all l x m).
BlockMatrixSet build_block_matrices(const std::vector<Mat>& markov, int depth);

/// Blockwise channel selection: expands the 1-based channel set over the
/// first `depth` blocks of size l (rows) or m (cols) and drops or keeps
/// those rows/columns.
Mat select(const Mat& matrix, const IndexSelection& sel, SelectMode mode,
           int depth);

/// 0-based row/col offsets of `channels` (1-based) over `depth` blocks of
/// size `block`.
std::vector<Eigen::Index> block_offsets(const std::vector<int>& channels,
                                        int block, int depth);

Mat take_rows(const Mat& m, const std::vector<Eigen::Index>& rows);
Mat take_cols(const Mat& m, const std::vector<Eigen::Index>& cols);

}  // namespace fdie

#endif
