#ifndef SPINLINK_PROTOCOL_HPP
#define SPINLINK_PROTOCOL_HPP

#include "spinlink/pulse.hpp"

// Mach-Zehnder protocol observables: Bell-channel amplitudes, per-port
// detection probabilities, exact and perturbative fidelities, encoding
// classification, phase-error fidelity.

namespace spinlink {

enum class Port { a, b };

enum class BellState { phi_plus, phi_minus, psi_plus, psi_minus };

// A click on port a heralds |Phi->, on port b |Psi->.
BellState heralded_state(Port port);

const char* to_string(Port port);
const char* to_string(BellState state);

// The photonic amplitude functions of the pre-detection state, expressed with
// the node average/difference transfer functions 2 r_s^± = r_s^A ± r_s^B:
//   (Phi+ + Psi+):  r_+^+ u  on port a,   r_+^- u  on port b
//   Phi-:           r_-^+ u  on port a,   r_-^- u  on port b
//   Psi-:           r_-^- u  on port a,   r_-^+ u  on port b
struct BellChannelAmplitudes {
    Spectrum u;
    Spectrum r_plus_avg;    // r_+^+ u
    Spectrum r_plus_diff;   // r_+^- u
    Spectrum r_minus_avg;   // r_-^+ u
    Spectrum r_minus_diff;  // r_-^- u

    const Spectrum& amplitude(BellState state, Port port) const;
};

BellChannelAmplitudes bell_amplitudes(const NodeParams& node_a,
                                      const NodeParams& node_b,
                                      const Spectrum& u);
// Synthetic variant for idealized transfer functions.
BellChannelAmplitudes bell_amplitudes(std::span<const TransferEval> evals_a,
                                      std::span<const TransferEval> evals_b,
                                      const Spectrum& u);

// Pulse-averaged node factor integral(R_p |u|^2) with
// R_a = |r_-^+|^2 + |r_-^-|^2 + 2|r_+^+|^2 and r_+^- in place of r_+^+ for b.
double node_factor(const BellChannelAmplitudes& amps, Port port);

// P_p = (eta/2) integral(R_p |u|^2); bounded by eta.
double detection_probability(const BellChannelAmplitudes& amps, Port port,
                             double eta);

// F_p = integral(|r_-^+|^2 |u|^2) / integral(R_p |u|^2), the fidelity toward
// heralded_state(port). Throws NoSignal when the port never clicks.
double fidelity_exact(const BellChannelAmplitudes& amps, Port port);

struct ProtocolOutcome {
    double P_a = 0.0;
    double P_b = 0.0;
    double F_a = 0.0;
    double F_b = 0.0;
    double R_a = 0.0;  // pulse-averaged node factors (eta-independent)
    double R_b = 0.0;
    BellState target_a = BellState::phi_minus;
    BellState target_b = BellState::psi_minus;
    BellChannelAmplitudes amplitudes;
};

ProtocolOutcome run_protocol(const NodeParams& node_a, const NodeParams& node_b,
                             const PulseSpec& pulse, const SetupParams& setup,
                             int grid_points = 1 << 12);

// Second-order-in-sigma_u fidelity for a Gaussian pulse centered at Delta,
// built from transfer values and finite-difference second derivatives at Delta.
double fidelity_taylor(const NodeParams& node_a, const NodeParams& node_b,
                       const GaussianPulse& pulse, Port port);

// Closed-form perturbative fidelities for three-level nodes around the
// resonant reference configuration. Port a additionally requires the
// phase-encoding ratio kappa1/kappa = (C+1)/(C+2) on the reference node.
double fidelity_nv_perturbative(double C, double kappa, double kappa1,
                                double gamma, const NodeDeviation& dev,
                                double sigma_u, Port port);

// Fidelity under an uncompensated interferometer phase error phi (identical
// nodes assumed):
//   F = cos^2(phi/2) |a0m|^2 / (|a0m|^2 + 2 sin^2(phi/2)(|a0p|^2 + |a1p|^2)).
double phase_error_fidelity(double phi, const ModeDecomposition& modes);

enum class Encoding { phase, intensity, generic };
const char* to_string(Encoding encoding);

// Phase if |r_+|^2 < tol on the pulse support, intensity if |r_1|^2 < tol
// there, generic otherwise. Support: |u|^2 > 1e-6 * peak.
Encoding classify_encoding(const NodeParams& node, const Spectrum& u,
                           double tol = 1e-3);

}  // namespace spinlink

#endif
