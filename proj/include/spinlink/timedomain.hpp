#ifndef SPINLINK_TIMEDOMAIN_HPP
#define SPINLINK_TIMEDOMAIN_HPP

#include <array>
#include <optional>
#include <string>

#include "spinlink/protocol.hpp"

// Virtual-cavity ODE integration of the single-excitation amplitudes: an
// independent time-domain check of the frequency-domain reflection solution.

namespace spinlink {

struct TimeGrid {
    double t0 = 0.0;
    double dt = 0.0;
    int points = 0;
    double t(int i) const { return t0 + i * dt; }
    double t_end() const { return t(points - 1); }
};

// Uniform complex time samples with O(h^4) interpolation and a cumulative
// |value|^2 integral (used by the time-dependent virtual-cavity couplings).
class SampledMode {
  public:
    SampledMode() = default;
    SampledMode(TimeGrid grid, std::vector<std::complex<double>> values);

    std::complex<double> value(double t) const;
    double prefix(double t) const;  // integral of |value|^2 over [t0, t]
    double total() const { return prefix_.empty() ? 0.0 : prefix_.back(); }
    const TimeGrid& grid() const { return grid_; }
    const std::vector<std::complex<double>>& values() const { return values_; }

  private:
    TimeGrid grid_;
    std::vector<std::complex<double>> values_;
    std::vector<double> prefix_;
};

// Inverse transform of a spectrum onto a uniform time grid covering the full
// FFT window 2*pi/dw, sampled at least as finely as dt_max.
SampledMode spectrum_to_time(const Spectrum& s, double dt_max);

// Virtual-cavity couplings. Denominators are clamped at eps_reg = 1e-10.
std::complex<double> input_coupling(const SampledMode& u, double t);
std::complex<double> output_coupling(const SampledMode& mode, double t);

// The second output mode as seen after scattering off the first virtual
// cavity: v1'(t) = v1 - v0 * (prefix overlap)/(prefix norm). Requires v0, v1
// orthonormal; keeps unit norm.
SampledMode scattered_mode_overlap(const SampledMode& v0, const SampledMode& v1);

// Output modes for a single node and pulse: the protocol modes where defined,
// otherwise the single mode carried by r_+ u (identical transitions). Also
// carries the frequency-domain final amplitudes (initial alpha_u = 1/sqrt(2)).
struct ScatteringModes {
    Spectrum u;
    std::optional<Spectrum> v0;
    std::optional<Spectrum> v1;
    std::array<std::complex<double>, 2> alpha_v0_freq{};
    std::array<std::complex<double>, 2> alpha_v1_freq{};
};

ScatteringModes scattering_modes(const NodeParams& node, const Spectrum& u,
                                 std::complex<double> alpha_u0);

struct BranchAmplitudes {
    std::complex<double> alpha_u;
    std::complex<double> alpha_c;
    std::complex<double> alpha_e;
    std::complex<double> alpha_v0;
    std::complex<double> alpha_v1;
};

struct TrajectoryState {
    double t = 0.0;
    std::array<BranchAmplitudes, 2> branch{};
    double norm_sq() const;
};

struct StepControl {
    double abs_tol = 1e-10;
    double rel_tol = 1e-10;
    double max_step = 0.0;  // 0: unrestricted
};

struct TimeSpan {
    double t_start = 0.0;
    double t_end = 0.0;
};

struct ScatteringResult {
    std::vector<TrajectoryState> trajectory;
    ScatteringModes modes;
    std::array<std::complex<double>, 2> alpha_v0_final{};
    std::array<std::complex<double>, 2> alpha_v1_final{};
    double norm_final = 0.0;
    long steps_accepted = 0;
    long steps_rejected = 0;
};

// Integrates the mode-matched single-excitation dynamics (both qubit branches,
// initial alpha_u = 1/sqrt(2)) with an adaptive embedded Runge-Kutta 5(4)
// scheme. The virtual-cavity equations are integrated in their dissipative
// form: the mode-matching residual l(t) enters as -g_v l, which vanishes on
// the matched solution and damps numerical drift off it.
ScatteringResult integrate_scattering(const NodeParams& node, const PulseSpec& pulse,
                                      std::optional<TimeSpan> span = std::nullopt,
                                      const StepControl& ctrl = {},
                                      int grid_points = 1 << 12);

// Relative L2 distance between the reconstructed output spectrum
// alpha_v0 v0 + alpha_v1 v1 and r_k(w) alpha_u(0) u(w) for one branch.
double reconstruction_error_l2(const ScatteringResult& result,
                               const NodeParams& node, int branch);

// Frequency-domain cavity/excited-state amplitudes for each branch.
struct BranchSpectra {
    Spectrum alpha_c;
    Spectrum alpha_e;
};
std::array<BranchSpectra, 2> frequency_domain_amplitudes(
    const NodeParams& node, const Spectrum& u,
    std::complex<double> alpha_u0 = {0.70710678118654752440, 0.0});

// CSV dump, columns t,branch,re_alpha_u,im_alpha_u,...,im_alpha_v1.
void write_trajectory_csv(const std::string& path,
                          const std::vector<TrajectoryState>& trajectory);

// Slowest amplitude-decay rate of the node response (from the poles of the
// cavity-emitter response); bounds the ring-down time.
double slowest_decay_rate(const NodeParams& node);

}  // namespace spinlink

#endif
