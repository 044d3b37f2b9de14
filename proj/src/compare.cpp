#include "spinlink/compare.hpp"

#include <cmath>

namespace spinlink {

double emission_probability(double C, double kappa, double kappa1, double gamma) {
    if (!(kappa > 0.0) || !(kappa1 > 0.0) || !(gamma > 0.0) || !(C >= 0.0)) {
        throw PreconditionViolated("emission_probability: rates must be positive");
    }
    return kappa1 / (kappa + gamma) * C / (C + 1.0);
}

double barrett_kok_success(double p_em, double eta) {
    if (p_em < 0.0 || p_em > 1.0 || eta < 0.0 || eta > 1.0) {
        throw PreconditionViolated("barrett_kok_success: inputs must be in [0, 1]");
    }
    return eta * p_em * p_em / 2.0;
}

double single_click_success(double p_em, double eta, double theta_prep) {
    if (p_em < 0.0 || p_em > 1.0 || eta < 0.0 || eta > 1.0) {
        throw PreconditionViolated("single_click_success: inputs must be in [0, 1]");
    }
    const double s = std::sin(theta_prep);
    return 2.0 * std::sqrt(eta) * s * s * p_em;
}

ComparisonReport compare_protocols(const NodeParams& node, const PulseSpec& pulse,
                                   double eta, double theta_prep, int grid_points) {
    validate_node(node);
    ComparisonReport report;

    const double C = node.cooperativity(0);
    const double kappa = node.kappa();
    const double gamma = node.transitions[0].gamma;
    const double sigma = pulse_sigma(pulse);

    report.p_em = emission_probability(C, kappa, node.kappa1, gamma);
    report.p_barrett_kok = barrett_kok_success(report.p_em, eta);
    report.p_single_click = single_click_success(report.p_em, eta, theta_prep);
    report.single_click_regime_ok = report.p_single_click <= 1.0;

    const ProtocolOutcome outcome =
        run_protocol(node, node, pulse, SetupParams{eta, 0.0}, grid_points);
    report.p_reflection_single_port = outcome.P_b;
    report.p_reflection_two_port = outcome.P_a + outcome.P_b;

    report.regime_gamma_small = gamma < 0.05 * kappa;
    report.regime_narrow_pulse = sigma < 0.05 * (C + 1.0) * gamma;
    report.barrett_kok_gap =
        std::abs(report.p_barrett_kok - report.p_reflection_single_port) /
        report.p_reflection_single_port;
    report.matches_barrett_kok = report.regime_gamma_small &&
                                 report.regime_narrow_pulse &&
                                 report.barrett_kok_gap < 0.05;
    return report;
}

}  // namespace spinlink
