#ifndef SPINLINK_MODEL_HPP
#define SPINLINK_MODEL_HPP

#include <array>

#include "spinlink/errors.hpp"

// Physical parameter types for a spin-cavity node. All rates and frequencies
// are dimensionless in units of a global reference gamma_ref (the spontaneous
// decay rate of transition 0 of node A); time is in units of 1/gamma_ref.

namespace spinlink {

// One optical transition |k> <-> |e_k>: coupling g_k to the cavity mode,
// spontaneous decay gamma_k, and detuning delta_k from the cavity resonance.
struct TransitionParams {
    double g = 0.0;
    double gamma = 1.0;
    double delta = 0.0;
};

// A two-transition node behind a two-sided cavity. kappa1 is the front-mirror
// (channel) rate, kappa2 lumps the remaining cavity losses. Three-level nodes
// (NV-like) are encoded by g=0 on transition 1.
struct NodeParams {
    double kappa1 = 1.0;
    double kappa2 = 0.0;
    std::array<TransitionParams, 2> transitions{};

    double kappa() const { return kappa1 + kappa2; }
    double cooperativity(int k) const {
        const TransitionParams& t = transitions.at(static_cast<std::size_t>(k));
        return 4.0 * t.g * t.g / (kappa() * t.gamma);
    }
    bool three_level() const { return transitions[1].g == 0.0; }
};

// Four-level (SiV-like) template: both transitions share g, gamma and are
// split symmetrically by zeta around the common detuning delta.
struct FourLevelConfig {
    double kappa1 = 1.0;
    double kappa2 = 0.0;
    double g = 0.0;
    double gamma = 1.0;
    double zeta = 0.0;
    double delta = 0.0;
};

// Additive offsets of node B from the reference node, plus independent
// transition detunings delta_A, delta_B (static spectral diffusion).
struct NodeDeviation {
    double eps_C = 0.0;
    double eps_kappa = 0.0;
    double eps_kappa1 = 0.0;
    double eps_gamma = 0.0;
    double delta_A = 0.0;
    double delta_B = 0.0;
};

struct SetupParams {
    double eta = 1.0;  // photon transmittivity, in (0, 1]
    double phi = 0.0;  // interferometer phase error (radians)
};

// Checks all invariants and returns the input unchanged. Throws
// NonPhysicalParameter naming the offending field.
NodeParams validate_node(const NodeParams& params);

void validate_setup(const SetupParams& setup);

// delta_k = delta - (-1)^k zeta/2, identical g and gamma on both transitions.
NodeParams expand_four_level(const FourLevelConfig& cfg);

// Three-level helper: transition 0 gets g from the requested cooperativity
// C = 4 g^2 / (kappa gamma); transition 1 is decoupled (g=0).
NodeParams make_three_level(double C, double kappa, double kappa1_ratio,
                            double gamma = 1.0, double delta = 0.0);

// Applies the deviation: node A keeps the reference parameters with its
// transition detuned by delta_A; node B gets C+eps_C, kappa+eps_kappa,
// kappa1+eps_kappa1, gamma+eps_gamma and delta_B, with g re-derived from the
// deviated (C, kappa, gamma).
struct NodePair {
    NodeParams a;
    NodeParams b;
};
NodePair apply_deviation(const NodeParams& reference, const NodeDeviation& dev);

}  // namespace spinlink

#endif
