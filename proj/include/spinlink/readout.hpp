#ifndef SPINLINK_READOUT_HPP
#define SPINLINK_READOUT_HPP

#include "spinlink/pulse.hpp"

// Optical qubit-readout figures of merit: reflection-intensity contrast and
// interferometric phase (z-basis) readout.

namespace spinlink {

struct ReadoutReport {
    double p_reflect_state0 = 0.0;  // pulse-averaged |r_0|^2
    double p_reflect_state1 = 0.0;  // pulse-averaged |r_1|^2
    double contrast = 0.0;
    // phase readout: probability of exiting port p for qubit state k
    double port_probs[2][2] = {{0.0, 0.0}, {0.0, 0.0}};
    double readout_error = 0.0;  // 1 - min_k P(correct port | k)
};

// Per-state reflection probabilities integral(|r_k|^2 |u|^2) and contrast.
// Requires a three-level node.
ReadoutReport intensity_readout(const NodeParams& params, const PulseSpec& pulse,
                                int grid_points = 1 << 12);

// Mach-Zehnder z-basis readout in the long-pulse (v0 ~ u) limit: port
// amplitudes (rho_k +- 1)/2 with rho_k the pulse-averaged reflection of
// state k. Correct port is a for state 0 and b for state 1.
ReadoutReport phase_readout(const NodeParams& params, const PulseSpec& pulse,
                            int grid_points = 1 << 12);

}  // namespace spinlink

#endif
