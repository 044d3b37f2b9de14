#include "spinlink/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace spinlink {

complexd reflection(const NodeParams& params, int transition, double omega) {
    const TransitionParams& t = params.transitions.at(static_cast<std::size_t>(transition));
    const double kappa = params.kappa();
    const complexd atom(1.0, -2.0 * (omega - t.delta) / t.gamma);
    const complexd cav(1.0, -2.0 * omega / kappa);
    const double C = params.cooperativity(transition);
    return 1.0 - 2.0 * (params.kappa1 / kappa) * atom / (atom * cav + C);
}

TransferEval transfer_pair(const NodeParams& params, double omega) {
    TransferEval out;
    out.omega = omega;
    out.r0 = reflection(params, 0, omega);
    out.r1 = reflection(params, 1, omega);
    out.r_plus = 0.5 * (out.r0 + out.r1);
    out.r_minus = 0.5 * (out.r0 - out.r1);
    return out;
}

std::vector<TransferEval> transfer_on_grid(const NodeParams& params,
                                           std::span<const double> omegas) {
    std::vector<TransferEval> out;
    out.reserve(omegas.size());
    for (double w : omegas) out.push_back(transfer_pair(params, w));
    return out;
}

double resonant_peak(const NodeParams& params) {
    if (params.transitions[1].g != 0.0) {
        throw PreconditionViolated("resonant_peak: requires a three-level node (g1 = 0)");
    }
    if (params.transitions[0].delta != 0.0) {
        throw PreconditionViolated("resonant_peak: requires delta0 = 0");
    }
    const double ratio = params.kappa1 / params.kappa();
    const double C = params.cooperativity(0);
    const double frac = C / (C + 1.0);
    return ratio * ratio * frac * frac;
}

double modsq_component(const NodeParams& params, TransferComponent which,
                       double omega) {
    const TransferEval ev = transfer_pair(params, omega);
    switch (which) {
        case TransferComponent::r_minus: return std::norm(ev.r_minus);
        case TransferComponent::r_plus: return std::norm(ev.r_plus);
        case TransferComponent::r0: return std::norm(ev.r0);
        case TransferComponent::r1: return std::norm(ev.r1);
    }
    return 0.0;
}

double d2_modsq(const NodeParams& params, TransferComponent which, double omega,
                double h) {
    if (h == 0.0) h = 1e-4 * std::max(1.0, std::abs(omega) + 1.0);
    const double h_min = 64.0 * std::numeric_limits<double>::epsilon() *
                         std::max(1.0, std::abs(omega));
    if (h < h_min) {
        throw StepTooSmall("d2_modsq: step " + std::to_string(h) +
                           " below round-off floor");
    }
    const double f_m = modsq_component(params, which, omega - h);
    const double f_0 = modsq_component(params, which, omega);
    const double f_p = modsq_component(params, which, omega + h);
    return (f_p - 2.0 * f_0 + f_m) / (h * h);
}

double purcell_width(const NodeParams& params) {
    double w = 0.0;
    for (int k = 0; k < 2; ++k) {
        const TransitionParams& t = params.transitions[static_cast<std::size_t>(k)];
        w = std::max(w, t.gamma * (params.cooperativity(k) + 1.0) + std::abs(t.delta));
    }
    return w;
}

}  // namespace spinlink
