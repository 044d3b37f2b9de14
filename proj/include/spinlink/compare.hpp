#ifndef SPINLINK_COMPARE_HPP
#define SPINLINK_COMPARE_HPP

#include "spinlink/protocol.hpp"

// Success probabilities of emission-based protocols and a head-to-head
// comparison with the reflection protocol.

namespace spinlink {

// On-resonance single-emission outcoupling P_em = kappa1/(kappa+gamma) * C/(C+1).
double emission_probability(double C, double kappa, double kappa1, double gamma);

// Two-round (Barrett-Kok style) success probability eta * P_em^2 / 2.
double barrett_kok_success(double p_em, double eta);

// Single-click emission scheme: 2 sqrt(eta) sin^2(theta_prep) P_em; the
// formula is only meaningful for theta_prep << 1.
double single_click_success(double p_em, double eta, double theta_prep);

struct ComparisonReport {
    double p_em = 0.0;
    double p_barrett_kok = 0.0;
    double p_single_click = 0.0;
    double p_reflection_single_port = 0.0;  // P_b
    double p_reflection_two_port = 0.0;     // P_a + P_b (phase encoding)
    bool regime_gamma_small = false;        // gamma << kappa
    bool regime_narrow_pulse = false;       // sigma_u << (C+1) gamma
    bool single_click_regime_ok = true;     // formula stayed in [0, 1]
    bool matches_barrett_kok = false;       // |eta Pem^2/2 - P_b| / P_b < 5%
    double barrett_kok_gap = 0.0;
};

ComparisonReport compare_protocols(const NodeParams& node, const PulseSpec& pulse,
                                   double eta, double theta_prep = 0.1,
                                   int grid_points = 1 << 12);

}  // namespace spinlink

#endif
