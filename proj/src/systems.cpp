#include "fdie/systems.hpp"

#include <cmath>

namespace fdie::benchmark {

StateSpaceModel nonmin_phase(double noise_var) {
  StateSpaceModel s;
  s.A = Mat(4, 4);
  s.A << 0, 0, 0, -0.01,
         1, 0, 0,  0.08,
         0, 1, 0, -0.27,
         0, 0, 1, -0.54;
  s.B = Mat(4, 2);
  s.B << 1, -0.3,
         0,  3.82,
         0,  1.55,
         0, -0.61;
  s.C = Mat(2, 4);
  s.C << 1.58, 0.725, -0.60,  0.31,
         2.4, -0.08,   0.42, -0.05;
  s.Q = noise_var * Mat::Identity(4, 4);
  s.R = noise_var * Mat::Identity(2, 2);
  s.S = Mat::Zero(4, 2);
  return s;
}

StateSpaceModel min_phase(double noise_var) {
  StateSpaceModel s;
  s.A = Mat(4, 4);
  s.A << -0.05, -0.40,  0.00, -0.08,
         -0.29, -0.11,  0.05, -0.03,
         -0.06,  0.18, -0.43,  0.36,
          0.28,  0.18, -0.43,  0.36;
  s.B = Mat(4, 2);
  s.B << -0.15, -0.99,
          0.00,  0.00,
         -0.68,  0.07,
         -0.96, -0.20;
  s.C = Mat(2, 4);
  s.C << -2.08,  0.00, -0.69, 0.00,
          0.00, -0.84,  0.20, 0.89;
  s.Q = noise_var * Mat::Identity(4, 4);
  s.R = noise_var * Mat::Identity(2, 2);
  s.S = Mat::Zero(4, 2);
  return s;
}

VtolPlant vtol() {
  VtolPlant p;
  p.Ac = Mat(4, 4);
  p.Ac << -0.036,  0.027, 0.018, -0.455,
           0.048, -1.010, 0.002, -4.020,
           0.100,  0.368, -0.707, 1.420,
           0.000,  0.000,  1.000, 0.000;
  p.Bc = Mat(4, 2);
  p.Bc <<  0.44,  0.17,
           3.54, -7.59,
          -5.52,  4.49,
           0.00,  0.00;
  p.Cc = Mat(4, 4);
  p.Cc << 1, 0, 0, 0,
          0, 1, 0, 0,
          0, 0, 1, 0,
          0, 1, 1, 1;
  p.Ky = Mat(2, 4);
  p.Ky << 0, 0, -0.5,  0.0,
          0, 0, -0.1, -0.1;
  p.dt = 0.5;
  p.Q = 0.16 * Mat::Identity(4, 4);
  p.R = 0.64 * Mat::Identity(4, 4);
  return p;
}

StateSpaceModel vtol_discrete() {
  const VtolPlant p = vtol();
  auto [A, B] = zoh_discretize(p.Ac, p.Bc, p.dt);
  StateSpaceModel s;
  s.A = A;
  s.B = B;
  s.C = p.Cc;
  s.Q = p.Q;
  s.R = p.R;
  s.S = Mat::Zero(4, 4);
  return s;
}

Mat two_tone_input(int T, double scale) {
  Mat u(2, T);
  for (int k = 0; k < T; ++k) {
    u(0, k) = scale * (20.0 + 20.0 * std::sin(5.0 * k));
    u(1, k) = scale * (30.0 + 30.0 * std::cos(7.0 * k));
  }
  return u;
}

}  // namespace fdie::benchmark
