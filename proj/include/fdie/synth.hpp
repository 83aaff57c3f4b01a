#ifndef FDIE_SYNTH_HPP
#define FDIE_SYNTH_HPP

#include <cstdint>
#include <optional>
#include <string>

#include "fdie/ident.hpp"

namespace fdie {

enum class FilterKind {
  detection,
  actuator_isolation,
  sensor_isolation,
  sensor_estimation,
  actuator_estimation,
};

std::string to_string(FilterKind kind);

/// Design request for one filter: window depth, channel selections, kind,
/// and the requested eigenvalues for the free diagonal state matrix.
struct FilterSpec {
  int i = 2;
  IndexSelection sel;
  FilterKind kind = FilterKind::detection;
  std::vector<double> ar_poles;  // broadcast if fewer than il' entries
  std::uint64_t theta_seed = 0;  // randomized search seed (q != empty path)

  void validate() const;
};

/// Synthesized filter realization
///   eta(k+1) = Ar eta(k) + Br U^{q-}(k-i) + Lr Y^{p-}(k-i)
/// plus the restricted Toeplitz blocks the runtime needs.
struct FilterRealization {
  Mat Ar;        // il' x il'
  Mat Br;        // il' x im'
  Mat Lr;        // il' x il'   (sensor kinds: columns p,...,ip are zero)
  Mat D_pm;      // il' x im    rows ~p of the depth-i Toeplitz
  Mat D_full;    // il  x im    unrestricted (sensor estimators run on it)
  Mat curly_d_plus_pm;  // il' x m
  FilterSpec spec;
  bool reduced = false;
  bool exact = false;
  double rho = 0.0;

  // residuals of the defining identities, recorded at synthesis
  double eq_sum_residual = 0.0;     // |Ar + Lr - M|
  double eq_qplus_residual = 0.0;   // |Lr D^{q+} - curlyD+^{q+} I|
  double eq_br_residual = 0.0;      // |Br - (curlyD+^{q-} I - Lr D^{q-})|

  int state_dim() const { return static_cast<int>(Ar.rows()); }
};

struct SynthOptions {
  double rank_tol = kDefaultRankTol;
  int theta_trials_per_gamma = 200;
  std::vector<double> theta_gammas = {0.1, 0.5, 1.0};
  /// Riccati measurement weight for the sensor-kind stabilizing fallback.
  double dare_weight = 1e-4;
  double rank_decision_tol = 1e-6;  // relative, for rank tests on H blocks
};

/// Smallest tau with H_{beta,p-} = 0 for beta < tau and the stacked
/// H_{tau..i_max} blocks full column rank. Throws when no tau qualifies.
int relative_degree(const MarkovSequence& markov, const IndexSelection& sel,
                    int i_max, double rank_decision_tol = 1e-6);

/// Observability index of (C^{~p}, A): smallest depth with full-rank stack.
int observability_index(const StateSpaceModel& model, const IndexSelection& sel);

/// Exact-model synthesis: builds the observability stacks from the model,
/// forms M exactly, and runs the shared downstream solve. Oracle for the
/// data-driven path.
FilterRealization synthesize_exact(const StateSpaceModel& model,
                                   const FilterSpec& spec,
                                   const SynthOptions& opts = {});

/// Data-driven synthesis from estimated Markov parameters and M.
///
/// q empty: Ar = diag(poles), Lr = M - Ar; sensor kinds zero the columns
/// p,...,ip of Lr first and re-derive Ar = M - Lr (with a Riccati fallback
/// gain on the remaining columns when that matrix is not Schur).
/// q nonempty: Lr from the q+ data equation with a randomized free-term
/// search until Ar = M - Lr is Schur; throws with the best spectral radius
/// found when the search budget is exhausted (infeasible subsystem).
FilterRealization synthesize_data_driven(const MarkovSequence& markov,
                                         const MEstimate& m_est,
                                         const FilterSpec& spec,
                                         const SynthOptions& opts = {});

/// Slices the l'-state filter (last block row) out of a q-empty diagonal
/// realization. Refuses q != empty.
FilterRealization reduce_filter(const FilterRealization& filter);

/// Error raised when the q+ equation admits no Schur state matrix.
class InfeasibleSynthesis : public std::runtime_error {
 public:
  InfeasibleSynthesis(const std::string& what, double best_rho)
      : std::runtime_error(what), best_rho(best_rho) {}
  double best_rho;
};

}  // namespace fdie

#endif
