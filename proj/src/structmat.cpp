#include "fdie/structmat.hpp"

#include <algorithm>
#include <set>

namespace fdie {

void IndexSelection::validate(const std::vector<int>& s, int bound,
                              const char* name) {
  int prev = 0;
  for (int ch : s) {
    if (ch < 1 || ch > bound)
      throw std::invalid_argument(std::string(name) + " channel " +
                                  std::to_string(ch) + " outside 1.." +
                                  std::to_string(bound));
    if (ch <= prev)
      throw std::invalid_argument(std::string(name) +
                                  " channels must be strictly increasing");
    prev = ch;
  }
}

IndexSelection::IndexSelection(std::vector<int> p, std::vector<int> q, int l,
                               int m)
    : p_(std::move(p)), q_(std::move(q)), l_(l), m_(m) {
  if (l_ < 1 || m_ < 1)
    throw std::invalid_argument("IndexSelection: l and m must be positive");
  std::sort(p_.begin(), p_.end());
  std::sort(q_.begin(), q_.end());
  validate(p_, l_, "p");
  validate(q_, m_, "q");
}

std::vector<int> IndexSelection::p_complement() const {
  std::vector<int> out;
  std::set<int> in(p_.begin(), p_.end());
  for (int ch = 1; ch <= l_; ++ch)
    if (!in.count(ch)) out.push_back(ch);
  return out;
}

std::vector<int> IndexSelection::q_complement() const {
  std::vector<int> out;
  std::set<int> in(q_.begin(), q_.end());
  for (int ch = 1; ch <= m_; ++ch)
    if (!in.count(ch)) out.push_back(ch);
  return out;
}

Vec stack_signal(const Mat& series, const StackWindow& window, bool plus) {
  const int samples = window.i + 1 + (plus ? 1 : 0);
  if (window.i < 0 || window.k0 < 0 ||
      window.k0 + samples > series.cols())
    throw std::out_of_range("stack_signal: window exceeds series length");
  const Eigen::Index dim = series.rows();
  Vec out(samples * dim);
  for (int r = 0; r < samples; ++r)
    out.segment(r * dim, dim) = series.col(window.k0 + r);
  return out;
}

Mat build_hankel(const Mat& series, const StackWindow& window) {
  if (window.j < 0) throw std::out_of_range("build_hankel: negative width");
  if (window.k0 + window.i + window.j + 1 > series.cols())
    throw std::out_of_range("build_hankel: insufficient samples");
  const Eigen::Index dim = series.rows();
  Mat out((window.i + 1) * dim, window.j + 1);
  for (int c = 0; c <= window.j; ++c) {
    StackWindow w{window.i, 1, window.k0 + c};
    out.col(c) = stack_signal(series, w, false);
  }
  return out;
}

BlockMatrixSet build_block_matrices(const std::vector<Mat>& markov,
                                    int depth) {
  if (depth < 0) throw std::invalid_argument("build_block_matrices: depth < 0");
  if (static_cast<int>(markov.size()) < depth + 1)
    throw std::invalid_argument(
        "build_block_matrices: need Markov blocks H0..H" +
        std::to_string(depth) + ", got " + std::to_string(markov.size()));
  const Eigen::Index l = markov[0].rows();
  const Eigen::Index m = markov[0].cols();
  for (const Mat& h : markov)
    if (h.rows() != l || h.cols() != m)
      throw std::invalid_argument("build_block_matrices: ragged Markov blocks");

  BlockMatrixSet s;
  s.i = depth;
  s.l = static_cast<int>(l);
  s.m = static_cast<int>(m);
  const int nb = depth + 1;
  s.D = Mat::Zero(nb * l, nb * m);
  s.D_plus = Mat::Zero(nb * l, nb * m);
  for (int r = 0; r < nb; ++r) {
    for (int c = 0; c < nb; ++c) {
      if (r > c) s.D.block(r * l, c * m, l, m) = markov[r - c - 1];
      if (r >= c) s.D_plus.block(r * l, c * m, l, m) = markov[r - c];
    }
  }
  s.curly_d = Mat::Zero(std::max(depth, 0) * l, m);
  for (int r = 1; r < depth; ++r)
    s.curly_d.block(r * l, 0, l, m) = markov[r];
  s.curly_d_plus = Mat::Zero(nb * l, m);
  for (int r = 0; r < nb; ++r)
    s.curly_d_plus.block(r * l, 0, l, m) = markov[r];
  return s;
}

std::vector<Eigen::Index> block_offsets(const std::vector<int>& channels,
                                        int block, int depth) {
  std::vector<Eigen::Index> out;
  out.reserve(channels.size() * depth);
  for (int b = 0; b < depth; ++b)
    for (int ch : channels) out.push_back(b * block + ch - 1);
  return out;
}

Mat take_rows(const Mat& m, const std::vector<Eigen::Index>& rows) {
  Mat out(static_cast<Eigen::Index>(rows.size()), m.cols());
  for (size_t k = 0; k < rows.size(); ++k) out.row(k) = m.row(rows[k]);
  return out;
}

Mat take_cols(const Mat& m, const std::vector<Eigen::Index>& cols) {
  Mat out(m.rows(), static_cast<Eigen::Index>(cols.size()));
  for (size_t k = 0; k < cols.size(); ++k) out.col(k) = m.col(cols[k]);
  return out;
}

Mat select(const Mat& matrix, const IndexSelection& sel, SelectMode mode,
           int depth) {
  const bool on_rows = mode == SelectMode::rows_drop_p ||
                       mode == SelectMode::rows_keep_p ||
                       mode == SelectMode::rows_drop_q ||
                       mode == SelectMode::rows_keep_q;
  const bool on_p =
      mode == SelectMode::rows_drop_p || mode == SelectMode::rows_keep_p;
  const bool keep = mode == SelectMode::rows_keep_p ||
                    mode == SelectMode::cols_keep_q ||
                    mode == SelectMode::rows_keep_q;
  const int block = on_p ? sel.l() : sel.m();
  const Eigen::Index extent = on_rows ? matrix.rows() : matrix.cols();
  if (depth < 1 || extent != static_cast<Eigen::Index>(block) * depth)
    throw std::invalid_argument(
        "select: dimension " + std::to_string(extent) +
        " is not depth*block = " + std::to_string(depth) + "*" +
        std::to_string(block));
  const std::vector<int>& chosen = on_p ? sel.p() : sel.q();
  const std::vector<int> complement =
      on_p ? sel.p_complement() : sel.q_complement();
  const auto idx = block_offsets(keep ? chosen : complement, block, depth);
  return on_rows ? take_rows(matrix, idx) : take_cols(matrix, idx);
}

}  // namespace fdie
