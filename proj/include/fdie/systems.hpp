#ifndef FDIE_SYSTEMS_HPP
#define FDIE_SYSTEMS_HPP

#include "fdie/sim.hpp"

namespace fdie::benchmark {

/// 4-state, 2-input, 2-output discrete system with a transmission zero
/// outside the unit circle. Inversion-based actuator estimation over both
/// input channels is infeasible for it; detection and single-channel
/// isolation are not.
StateSpaceModel nonmin_phase(double noise_var = 0.1);

/// 4-state, 2-input, 2-output discrete system with both transmission zeros
/// inside the unit circle; the standard estimation benchmark here.
StateSpaceModel min_phase(double noise_var = 0.1);

/// Linearized VTOL aircraft, continuous time. Discretise with
/// zoh_discretize(dt = 0.5). Open loop is unstable; runs closed loop.
struct VtolPlant {
  Mat Ac, Bc, Cc;
  Mat Ky;        // stabilizing static output feedback
  double dt = 0.5;
  Mat Q, R;      // process / measurement noise covariances
};
VtolPlant vtol();

/// Discretised VTOL as a StateSpaceModel (open loop).
StateSpaceModel vtol_discrete();

/// Two-tone high-amplitude test input [20 + 20 sin(5k); 30 + 30 cos(7k)],
/// optionally scaled.
Mat two_tone_input(int T, double scale = 1.0);

}  // namespace fdie::benchmark

#endif
