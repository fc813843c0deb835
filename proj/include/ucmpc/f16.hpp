#ifndef UCMPC_F16_HPP_
#define UCMPC_F16_HPP_

#include "ucmpc/tightening.hpp"

namespace ucmpc {

/// Longitudinal F-16 model (flight path angle, pitch rate, angle of attack;
/// elevator and flaperon inputs), with the baseline feedback gain and the
/// state/input constraint boxes. Angles in degrees.
PlantSpec f16_plant();

/// The matched/unmatched uncertainty pair used in the case study:
/// f(t,x) = [-1.44 sin(0.4 pi t) - 0.18 a^2, 0.18 - 0.36 a], w = sin(0.6 pi t),
/// with closed-form bound and Lipschitz functions of max |alpha| over a box.
UncertaintySpec f16_uncertainty(bool with_unmatched = true);

/// Uncertainty-free spec with the given channel count (f = 0, w = 0).
UncertaintySpec zero_uncertainty(Eigen::Index channels);

}  // namespace ucmpc

#endif
