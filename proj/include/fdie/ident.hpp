#ifndef FDIE_IDENT_HPP
#define FDIE_IDENT_HPP

#include <optional>
#include <vector>

#include "fdie/sim.hpp"
#include "fdie/structmat.hpp"

namespace fdie {

enum class MarkovSource { exact, estimated };

/// Ordered impulse-response blocks H_0..H_L, each l x m.
struct MarkovSequence {
  std::vector<Mat> H;
  MarkovSource source = MarkovSource::estimated;

  int L() const { return static_cast<int>(H.size()) - 1; }
  int l() const { return H.empty() ? 0 : static_cast<int>(H[0].rows()); }
  int m() const { return H.empty() ? 0 : static_cast<int>(H[0].cols()); }

  static MarkovSequence exact(const StateSpaceModel& model, int L);
};

/// One-step predictor matrix estimated from the shifted/unshifted data
/// equations, with the structural [0 I] top rows enforced.
struct MEstimate {
  Mat M;                // il' x il'
  int i = 0;
  IndexSelection sel;
  Mat K1;               // l' x l'
  Mat K2;               // l' x (i-1)l'
  double residual_norm = 0.0;       // |G1 - M G0|_F after the solve
  double structure_gap = 0.0;       // pre-enforcement distance from [0 I]
  double rho = 0.0;                 // spectral radius
  bool stable = false;              // rho < 1 - 1e-6
};

struct IdentOptions {
  double rank_tol = kDefaultRankTol;
};

/// Least-squares FIR fit y(k) ~ sum_b H_b u(k-1-b), b = 0..L, over all
/// admissible k. Throws when the input is not persistently exciting enough,
/// naming the first deficient lag.
MarkovSequence estimate_markov(const Mat& U, const Mat& Y, int L,
                               double rank_tol = 1e-8);
MarkovSequence estimate_markov(const IoDataset& data, int L,
                               double rank_tol = 1e-8);

/// Default FIR order 4i+4 for a filter depth i.
int default_fir_order(int i);

/// Tail decay check |H_L| < ratio * |H_0|; advisory for choosing L.
bool markov_tail_ok(const MarkovSequence& seq, double ratio = 0.01);

/// Data matrices of the unshifted/shifted regression at depth i over j
/// columns, rows restricted to channels ~p.
struct GammaPair {
  Mat G0;  // il' x j
  Mat G1;  // il' x j
};

GammaPair build_gammas(const Mat& U, const Mat& Y, const MarkovSequence& markov,
                       int i, int j, const IndexSelection& sel);
GammaPair build_gammas(const IoDataset& data, const MarkovSequence& markov,
                       int i, const IndexSelection& sel);  // j = T - i - 2

/// M = G1 pinv(G0) with the top (i-1)l' rows overwritten by [0 I].
/// Warns (stable=false) when the spectral radius reaches 1 - 1e-6.
MEstimate estimate_M(const GammaPair& gammas, int i, const IndexSelection& sel,
                     double rank_tol = kDefaultRankTol);

/// Exact counterpart from model matrices: stack of C A^r rows (r = 0..i-1,
/// channels ~p), shifted stack times pinv. Used by oracles and tests.
Mat exact_M(const StateSpaceModel& model, int i, const IndexSelection& sel,
            double rank_tol = kDefaultRankTol);

}  // namespace fdie

#endif
