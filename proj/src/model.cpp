#include "spinlink/model.hpp"

#include <cmath>
#include <string>

namespace spinlink {

NodeParams validate_node(const NodeParams& params) {
    if (!(params.kappa1 > 0.0) || !std::isfinite(params.kappa1)) {
        throw NonPhysicalParameter("kappa1", "front-mirror rate must be > 0");
    }
    if (!(params.kappa2 >= 0.0) || !std::isfinite(params.kappa2)) {
        throw NonPhysicalParameter("kappa2", "loss-mirror rate must be >= 0");
    }
    for (int k = 0; k < 2; ++k) {
        const TransitionParams& t = params.transitions[static_cast<std::size_t>(k)];
        const std::string suffix = std::to_string(k);
        if (!(t.gamma > 0.0) || !std::isfinite(t.gamma)) {
            throw NonPhysicalParameter("gamma" + suffix, "decay rate must be > 0");
        }
        if (!(t.g >= 0.0) || !std::isfinite(t.g)) {
            throw NonPhysicalParameter("g" + suffix, "coupling must be >= 0");
        }
        if (!std::isfinite(t.delta)) {
            throw NonPhysicalParameter("delta" + suffix, "detuning must be finite");
        }
    }
    return params;
}

void validate_setup(const SetupParams& setup) {
    if (!(setup.eta > 0.0) || !(setup.eta <= 1.0)) {
        throw NonPhysicalParameter("eta", "transmittivity must be in (0, 1]");
    }
    if (!std::isfinite(setup.phi)) {
        throw NonPhysicalParameter("phi", "phase must be finite");
    }
}

NodeParams expand_four_level(const FourLevelConfig& cfg) {
    if (!(cfg.zeta >= 0.0)) {
        throw NonPhysicalParameter("zeta", "transition splitting must be >= 0");
    }
    NodeParams node;
    node.kappa1 = cfg.kappa1;
    node.kappa2 = cfg.kappa2;
    node.transitions[0] = {cfg.g, cfg.gamma, cfg.delta - cfg.zeta / 2.0};
    node.transitions[1] = {cfg.g, cfg.gamma, cfg.delta + cfg.zeta / 2.0};
    return validate_node(node);
}

NodeParams make_three_level(double C, double kappa, double kappa1_ratio,
                            double gamma, double delta) {
    if (!(kappa > 0.0)) {
        throw NonPhysicalParameter("kappa", "total cavity rate must be > 0");
    }
    if (!(kappa1_ratio > 0.0) || !(kappa1_ratio <= 1.0)) {
        throw NonPhysicalParameter("kappa1_ratio", "must be in (0, 1]");
    }
    if (!(C >= 0.0)) {
        throw NonPhysicalParameter("C", "cooperativity must be >= 0");
    }
    NodeParams node;
    node.kappa1 = kappa1_ratio * kappa;
    node.kappa2 = kappa - node.kappa1;
    node.transitions[0] = {std::sqrt(C * kappa * gamma / 4.0), gamma, delta};
    node.transitions[1] = {0.0, gamma, 0.0};
    return validate_node(node);
}

NodePair apply_deviation(const NodeParams& reference, const NodeDeviation& dev) {
    validate_node(reference);
    if (!reference.three_level()) {
        throw PreconditionViolated(
            "apply_deviation: deviation coordinates are defined for three-level "
            "references");
    }

    NodeParams a = reference;
    a.transitions[0].delta += dev.delta_A;

    const double C = reference.cooperativity(0);
    const double C_b = C + dev.eps_C;
    const double kappa_b = reference.kappa() + dev.eps_kappa;
    const double kappa1_b = reference.kappa1 + dev.eps_kappa1;
    const double gamma_b = reference.transitions[0].gamma + dev.eps_gamma;
    if (!(kappa1_b > 0.0)) {
        throw NonPhysicalParameter("eps_kappa1", "deviated kappa1 must stay > 0");
    }
    if (!(kappa_b >= kappa1_b)) {
        throw NonPhysicalParameter("eps_kappa", "deviated kappa must stay >= kappa1");
    }
    if (!(gamma_b > 0.0)) {
        throw NonPhysicalParameter("eps_gamma", "deviated gamma must stay > 0");
    }
    if (!(C_b >= 0.0)) {
        throw NonPhysicalParameter("eps_C", "deviated cooperativity must stay >= 0");
    }

    NodeParams b = reference;
    b.kappa1 = kappa1_b;
    b.kappa2 = kappa_b - kappa1_b;
    b.transitions[0].g = std::sqrt(C_b * kappa_b * gamma_b / 4.0);
    b.transitions[0].gamma = gamma_b;
    b.transitions[0].delta = reference.transitions[0].delta + dev.delta_B;
    return {validate_node(a), validate_node(b)};
}

}  // namespace spinlink
