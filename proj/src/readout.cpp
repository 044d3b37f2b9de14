#include "spinlink/readout.hpp"

#include <algorithm>
#include <cmath>

namespace spinlink {

namespace {

Spectrum pulse_on_default_grid(const NodeParams& params, const PulseSpec& pulse,
                               int grid_points) {
    return spectrum_of(pulse, default_grid_for(pulse, params, grid_points));
}

}  // namespace

ReadoutReport intensity_readout(const NodeParams& params, const PulseSpec& pulse,
                                int grid_points) {
    validate_node(params);
    if (!params.three_level()) {
        throw PreconditionViolated("intensity_readout: requires a three-level node");
    }
    const Spectrum u = pulse_on_default_grid(params, pulse, grid_points);
    const auto evals = transfer_on_grid(params, u.grid.omegas());

    std::vector<double> w0(evals.size()), w1(evals.size());
    for (std::size_t i = 0; i < evals.size(); ++i) {
        w0[i] = std::norm(evals[i].r0);
        w1[i] = std::norm(evals[i].r1);
    }
    ReadoutReport report;
    report.p_reflect_state0 = overlap_integral(u, w0);
    report.p_reflect_state1 = overlap_integral(u, w1);
    report.contrast = std::abs(report.p_reflect_state0 - report.p_reflect_state1);
    return report;
}

ReadoutReport phase_readout(const NodeParams& params, const PulseSpec& pulse,
                            int grid_points) {
    validate_node(params);
    const Spectrum u = pulse_on_default_grid(params, pulse, grid_points);
    const auto evals = transfer_on_grid(params, u.grid.omegas());

    ReadoutReport report;
    // pulse-averaged complex reflection per qubit state
    for (int k = 0; k < 2; ++k) {
        Spectrum refl{u.grid, std::vector<std::complex<double>>(u.values.size())};
        for (std::size_t i = 0; i < u.values.size(); ++i) {
            const auto rk = k == 0 ? evals[i].r0 : evals[i].r1;
            refl.values[i] = rk * u.values[i];
        }
        const std::complex<double> rho = inner_product(u, refl);
        const double p_a = 0.25 * std::norm(rho + 1.0);
        const double p_b = 0.25 * std::norm(rho - 1.0);
        report.port_probs[k][0] = p_a;
        report.port_probs[k][1] = p_b;
        if (k == 0) {
            report.p_reflect_state0 = std::norm(rho);
        } else {
            report.p_reflect_state1 = std::norm(rho);
        }
    }
    report.contrast = std::abs(report.p_reflect_state0 - report.p_reflect_state1);
    const double correct0 = report.port_probs[0][0];
    const double correct1 = report.port_probs[1][1];
    report.readout_error = 1.0 - std::min(correct0, correct1);
    return report;
}

}  // namespace spinlink
