#include "spinlink/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

namespace spinlink {

BellState heralded_state(Port port) {
    return port == Port::a ? BellState::phi_minus : BellState::psi_minus;
}

const char* to_string(Port port) { return port == Port::a ? "a" : "b"; }

const char* to_string(BellState state) {
    switch (state) {
        case BellState::phi_plus: return "phi_plus";
        case BellState::phi_minus: return "phi_minus";
        case BellState::psi_plus: return "psi_plus";
        case BellState::psi_minus: return "psi_minus";
    }
    return "?";
}

const char* to_string(Encoding encoding) {
    switch (encoding) {
        case Encoding::phase: return "phase";
        case Encoding::intensity: return "intensity";
        case Encoding::generic: return "generic";
    }
    return "?";
}

const Spectrum& BellChannelAmplitudes::amplitude(BellState state, Port port) const {
    switch (state) {
        case BellState::phi_plus:
        case BellState::psi_plus:
            return port == Port::a ? r_plus_avg : r_plus_diff;
        case BellState::phi_minus:
            return port == Port::a ? r_minus_avg : r_minus_diff;
        case BellState::psi_minus:
            return port == Port::a ? r_minus_diff : r_minus_avg;
    }
    return r_plus_avg;
}

BellChannelAmplitudes bell_amplitudes(std::span<const TransferEval> evals_a,
                                      std::span<const TransferEval> evals_b,
                                      const Spectrum& u) {
    if (evals_a.size() != u.values.size() || evals_b.size() != u.values.size()) {
        throw GridMismatch("transfer evaluations do not match the pulse grid");
    }
    const std::size_t n = u.values.size();
    BellChannelAmplitudes out;
    out.u = u;
    out.r_plus_avg = {u.grid, std::vector<std::complex<double>>(n)};
    out.r_plus_diff = {u.grid, std::vector<std::complex<double>>(n)};
    out.r_minus_avg = {u.grid, std::vector<std::complex<double>>(n)};
    out.r_minus_diff = {u.grid, std::vector<std::complex<double>>(n)};
    for (std::size_t i = 0; i < n; ++i) {
        const std::complex<double> ui = u.values[i];
        out.r_plus_avg.values[i] = 0.5 * (evals_a[i].r_plus + evals_b[i].r_plus) * ui;
        out.r_plus_diff.values[i] = 0.5 * (evals_a[i].r_plus - evals_b[i].r_plus) * ui;
        out.r_minus_avg.values[i] = 0.5 * (evals_a[i].r_minus + evals_b[i].r_minus) * ui;
        out.r_minus_diff.values[i] = 0.5 * (evals_a[i].r_minus - evals_b[i].r_minus) * ui;
    }
    return out;
}

BellChannelAmplitudes bell_amplitudes(const NodeParams& node_a,
                                      const NodeParams& node_b,
                                      const Spectrum& u) {
    validate_node(node_a);
    validate_node(node_b);
    const std::vector<double> omegas = u.grid.omegas();
    const auto evals_a = transfer_on_grid(node_a, omegas);
    const auto evals_b = transfer_on_grid(node_b, omegas);
    return bell_amplitudes(evals_a, evals_b, u);
}

double node_factor(const BellChannelAmplitudes& amps, Port port) {
    const double minus_avg = norm(amps.r_minus_avg);
    const double minus_diff = norm(amps.r_minus_diff);
    const double plus =
        port == Port::a ? norm(amps.r_plus_avg) : norm(amps.r_plus_diff);
    return minus_avg * minus_avg + minus_diff * minus_diff + 2.0 * plus * plus;
}

double detection_probability(const BellChannelAmplitudes& amps, Port port,
                             double eta) {
    const double p = 0.5 * eta * node_factor(amps, port);
    if (p < -1e-12 || p > eta + 1e-9) {
        throw Error("detection probability " + std::to_string(p) +
                    " outside [0, eta]");
    }
    return std::clamp(p, 0.0, eta);
}

double fidelity_exact(const BellChannelAmplitudes& amps, Port port) {
    const double denom = node_factor(amps, port);
    if (denom < 1e-15) {
        throw NoSignal("no detection amplitude on port " +
                       std::string(to_string(port)));
    }
    const double signal = norm(amps.r_minus_avg);
    return signal * signal / denom;
}

ProtocolOutcome run_protocol(const NodeParams& node_a, const NodeParams& node_b,
                             const PulseSpec& pulse, const SetupParams& setup,
                             int grid_points) {
    validate_setup(setup);
    const FrequencyGrid grid = default_grid_for(pulse, node_a, node_b, grid_points);
    const Spectrum u = spectrum_of(pulse, grid);
    ProtocolOutcome out;
    out.amplitudes = bell_amplitudes(node_a, node_b, u);
    out.R_a = node_factor(out.amplitudes, Port::a);
    out.R_b = node_factor(out.amplitudes, Port::b);
    out.P_a = detection_probability(out.amplitudes, Port::a, setup.eta);
    out.P_b = detection_probability(out.amplitudes, Port::b, setup.eta);
    out.F_a = fidelity_exact(out.amplitudes, Port::a);
    out.F_b = fidelity_exact(out.amplitudes, Port::b);
    return out;
}

namespace {

double fd_second(const std::function<double(double)>& f, double x, double h) {
    return (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h);
}

}  // namespace

double fidelity_taylor(const NodeParams& node_a, const NodeParams& node_b,
                       const GaussianPulse& pulse, Port port) {
    validate_node(node_a);
    validate_node(node_b);
    const double delta = pulse.delta;
    const double sig2 = pulse.sigma_u * pulse.sigma_u;

    // background: 2|r_+^{+/-}|^2 + |r_-^-|^2, signal: |r_-^+|^2
    const auto background = [&](double w) {
        const TransferEval a = transfer_pair(node_a, w);
        const TransferEval b = transfer_pair(node_b, w);
        const std::complex<double> plus =
            port == Port::a ? 0.5 * (a.r_plus + b.r_plus)
                            : 0.5 * (a.r_plus - b.r_plus);
        const std::complex<double> minus_diff = 0.5 * (a.r_minus - b.r_minus);
        return 2.0 * std::norm(plus) + std::norm(minus_diff);
    };
    const auto signal = [&](double w) {
        const TransferEval a = transfer_pair(node_a, w);
        const TransferEval b = transfer_pair(node_b, w);
        return std::norm(0.5 * (a.r_minus + b.r_minus));
    };

    const double h = 1e-4 * std::max(1.0, std::abs(delta) + 1.0);
    const double bg = background(delta);
    const double sg = signal(delta);
    const double d2_bg = fd_second(background, delta, h);
    const double d2_sg = fd_second(signal, delta, h);

    return 1.0 - bg / sg - 0.25 * sig2 * d2_bg / sg +
           0.25 * sig2 * d2_sg * bg / (sg * sg);
}

double fidelity_nv_perturbative(double C, double kappa, double kappa1,
                                double gamma, const NodeDeviation& dev,
                                double sigma_u, Port port) {
    if (!(C > 0.0) || !(kappa > 0.0) || !(kappa1 > 0.0) || !(gamma > 0.0)) {
        throw PreconditionViolated("fidelity_nv_perturbative: rates must be > 0");
    }
    const double c1 = C + 1.0;
    const double dd = dev.delta_A - dev.delta_B;
    const double mismatch_sq = 3.0 * dev.eps_C * dev.eps_C / (4.0 * C * C * c1 * c1);
    const double kappa_coeff = (3.0 * C * C + 8.0 * C + 8.0) / (4.0 * C * C);
    const double cross_coeff = dev.eps_C * (C + 4.0) / (2.0 * C * C * c1);

    if (port == Port::a) {
        const double ratio_target = c1 / (C + 2.0);
        if (std::abs(kappa1 / kappa - ratio_target) > 1e-9) {
            throw PreconditionViolated(
                "fidelity_nv_perturbative: port a requires kappa1/kappa = (C+1)/(C+2)");
        }
        const double bandwidth = 1.0 / gamma - (C * C + 2.0 * C + 2.0) / (C * kappa);
        const double x = dev.eps_kappa / kappa -
                         dev.eps_kappa1 * (C + 2.0) / (kappa * c1);
        return 1.0 - 4.0 * sigma_u * sigma_u * bandwidth * bandwidth / (c1 * c1) -
               (3.0 * dd * dd + 8.0 * dev.delta_A * dev.delta_B) / (gamma * gamma * c1 * c1) -
               mismatch_sq - cross_coeff * x - kappa_coeff * x * x;
    }
    const double x = dev.eps_kappa / kappa - dev.eps_kappa1 / kappa1;
    return 1.0 - 3.0 * dd * dd / (gamma * gamma * c1 * c1) - mismatch_sq -
           cross_coeff * x - kappa_coeff * x * x;
}

double phase_error_fidelity(double phi, const ModeDecomposition& modes) {
    const double a0m = std::norm(modes.alpha_v0_minus);
    const double a_plus = std::norm(modes.alpha_v0_plus) + std::norm(modes.alpha_v1_plus);
    const double c = std::cos(phi / 2.0);
    const double s = std::sin(phi / 2.0);
    return c * c * a0m / (a0m + 2.0 * s * s * a_plus);
}

Encoding classify_encoding(const NodeParams& node, const Spectrum& u, double tol) {
    validate_node(node);
    double peak = 0.0;
    for (const auto& v : u.values) peak = std::max(peak, std::norm(v));
    const double support_floor = 1e-6 * peak;

    double max_plus = 0.0;
    double max_minus = 0.0;
    double max_r1 = 0.0;
    for (std::size_t i = 0; i < u.values.size(); ++i) {
        if (std::norm(u.values[i]) <= support_floor) continue;
        const TransferEval ev = transfer_pair(node, u.grid.omega(static_cast<int>(i)));
        max_plus = std::max(max_plus, std::norm(ev.r_plus));
        max_minus = std::max(max_minus, std::norm(ev.r_minus));
        max_r1 = std::max(max_r1, std::norm(ev.r1));
    }
    // phase encoding needs a usable conditional channel, not just r_+ ~ 0
    if (max_plus < tol && max_minus >= tol) return Encoding::phase;
    if (max_r1 < tol) return Encoding::intensity;
    return Encoding::generic;
}

}  // namespace spinlink
