#include "spinlink/timedomain.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>

#include "spinlink/fft.hpp"

namespace spinlink {

namespace {

constexpr double kEpsReg = 1e-10;
constexpr std::complex<double> kI{0.0, 1.0};

// 4-point Lagrange interpolation on a uniform grid, u in [0, 1] between p1, p2.
template <typename T>
T cubic4(const T& p0, const T& p1, const T& p2, const T& p3, double u) {
    const double c0 = -u * (u - 1.0) * (u - 2.0) / 6.0;
    const double c1 = (u + 1.0) * (u - 1.0) * (u - 2.0) / 2.0;
    const double c2 = -(u + 1.0) * u * (u - 2.0) / 2.0;
    const double c3 = (u + 1.0) * u * (u - 1.0) / 6.0;
    return p0 * c0 + p1 * c1 + p2 * c2 + p3 * c3;
}

template <typename T>
T sample_cubic(const std::vector<T>& v, const TimeGrid& g, double t) {
    const double s = (t - g.t0) / g.dt;
    const int n = static_cast<int>(v.size());
    if (s <= 0.0) return v.front();
    if (s >= n - 1) return v.back();
    int i = static_cast<int>(std::floor(s));
    i = std::clamp(i, 1, n - 3);
    const double u = s - i;
    return cubic4(v[static_cast<std::size_t>(i - 1)], v[static_cast<std::size_t>(i)],
                  v[static_cast<std::size_t>(i + 1)], v[static_cast<std::size_t>(i + 2)], u);
}

// Cumulative quadrature with 4-point panels: int_{t_i}^{t_i+1} f ~
// dt (-f_{i-1} + 13 f_i + 13 f_{i+1} - f_{i+2}) / 24.
template <typename T>
std::vector<T> cumulative_integral(const std::vector<T>& f, double dt) {
    const std::size_t n = f.size();
    std::vector<T> out(n);
    if (n == 0) return out;
    out[0] = T{};
    auto at = [&](std::ptrdiff_t i) {
        i = std::clamp<std::ptrdiff_t>(i, 0, static_cast<std::ptrdiff_t>(n) - 1);
        return f[static_cast<std::size_t>(i)];
    };
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const std::ptrdiff_t k = static_cast<std::ptrdiff_t>(i);
        const T panel = (at(k - 1) * -1.0 + at(k) * 13.0 + at(k + 1) * 13.0 +
                         at(k + 2) * -1.0) *
                        (dt / 24.0);
        out[i + 1] = out[i] + panel;
    }
    return out;
}

}  // namespace

SampledMode::SampledMode(TimeGrid grid, std::vector<std::complex<double>> values)
    : grid_(grid), values_(std::move(values)) {
    std::vector<double> magsq(values_.size());
    for (std::size_t i = 0; i < values_.size(); ++i) magsq[i] = std::norm(values_[i]);
    prefix_ = cumulative_integral(magsq, grid_.dt);
    for (auto& p : prefix_) p = std::max(p, 0.0);
}

std::complex<double> SampledMode::value(double t) const {
    return sample_cubic(values_, grid_, t);
}

double SampledMode::prefix(double t) const {
    if (t <= grid_.t0) return 0.0;
    if (t >= grid_.t_end()) return prefix_.back();
    return std::max(sample_cubic(prefix_, grid_, t), 0.0);
}

SampledMode spectrum_to_time(const Spectrum& s, double dt_max) {
    const int n = s.grid.points;
    const double dw = s.grid.step();
    const double window = 2.0 * std::numbers::pi / dw;
    std::size_t n_t = next_power_of_two(static_cast<std::size_t>(
        std::max<double>(n, std::ceil(window / dt_max))));
    n_t = std::min<std::size_t>(n_t, std::size_t{1} << 22);

    const double t0 = -0.5 * window;
    std::vector<std::complex<double>> work(n_t, 0.0);
    for (int j = 0; j < n; ++j) {
        // pre-phase puts the window start at t0
        work[static_cast<std::size_t>(j)] =
            s.values[static_cast<std::size_t>(j)] *
            std::exp(-kI * (static_cast<double>(j) * dw * t0));
    }
    fft_inplace(work, false);

    const double dt = window / static_cast<double>(n_t);
    const double scale = dw / std::sqrt(2.0 * std::numbers::pi);
    std::vector<std::complex<double>> out(n_t);
    for (std::size_t m = 0; m < n_t; ++m) {
        const double t = t0 + static_cast<double>(m) * dt;
        out[m] = scale * std::exp(-kI * (s.grid.omega_min * t)) * work[m];
    }
    return SampledMode({t0, dt, static_cast<int>(n_t)}, std::move(out));
}

std::complex<double> input_coupling(const SampledMode& u, double t) {
    const double remaining = std::max(u.total() - u.prefix(t), kEpsReg);
    return std::conj(u.value(t)) / std::sqrt(remaining);
}

std::complex<double> output_coupling(const SampledMode& mode, double t) {
    const double filled = std::max(mode.prefix(t), kEpsReg);
    return -std::conj(mode.value(t)) / std::sqrt(filled);
}

SampledMode scattered_mode_overlap(const SampledMode& v0, const SampledMode& v1) {
    if (v0.grid().points != v1.grid().points ||
        std::abs(v0.grid().t0 - v1.grid().t0) > 1e-9 ||
        std::abs(v0.grid().dt - v1.grid().dt) > 1e-12) {
        throw GridMismatch("scattered_mode_overlap: modes on different time grids");
    }
    const std::size_t n = v0.values().size();
    std::vector<std::complex<double>> cross(n);
    for (std::size_t i = 0; i < n; ++i) {
        cross[i] = std::conj(v0.values()[i]) * v1.values()[i];
    }
    const auto c01 = cumulative_integral(cross, v0.grid().dt);
    if (std::abs(c01.back()) > 1e-6) {
        throw PreconditionViolated("scattered_mode_overlap: modes not orthogonal");
    }
    std::vector<std::complex<double>> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double c00 = v0.prefix(v0.grid().t(static_cast<int>(i)));
        if (c00 >= kEpsReg) {
            out[i] = v1.values()[i] - v0.values()[i] * c01[i] / c00;
        } else {
            // early-time limit: pointwise projection
            const double m = std::norm(v0.values()[i]);
            out[i] = m > 0.0 ? v1.values()[i] -
                                   v0.values()[i] * (cross[i] / m)
                             : v1.values()[i];
        }
    }
    return SampledMode(v0.grid(), std::move(out));
}

ScatteringModes scattering_modes(const NodeParams& node, const Spectrum& u,
                                 std::complex<double> alpha_u0) {
    const auto evals = transfer_on_grid(node, u.grid.omegas());
    ScatteringModes out;
    out.u = u;
    try {
        ModeDecomposition dec = decompose_modes(u, evals);
        out.v0 = std::move(dec.v0);
        if (dec.v1) out.v1 = std::move(*dec.v1);
    } catch (const DegenerateAntisymmetric&) {
        // identical transitions: the full output lives in r_+ u
        Spectrum b{u.grid, std::vector<std::complex<double>>(u.values.size())};
        for (std::size_t i = 0; i < u.values.size(); ++i) {
            b.values[i] = evals[i].r_plus * u.values[i];
        }
        const double bn = norm(b);
        if (bn >= 1e-12) {
            for (auto& v : b.values) v /= bn;
            out.v0 = std::move(b);
        }
    }
    for (int k = 0; k < 2; ++k) {
        Spectrum target{u.grid, std::vector<std::complex<double>>(u.values.size())};
        for (std::size_t i = 0; i < u.values.size(); ++i) {
            const auto rk = k == 0 ? evals[i].r0 : evals[i].r1;
            target.values[i] = rk * u.values[i] * alpha_u0;
        }
        if (out.v0) out.alpha_v0_freq[static_cast<std::size_t>(k)] = inner_product(*out.v0, target);
        if (out.v1) out.alpha_v1_freq[static_cast<std::size_t>(k)] = inner_product(*out.v1, target);
    }
    return out;
}

double TrajectoryState::norm_sq() const {
    double s = 0.0;
    for (const auto& br : branch) {
        s += std::norm(br.alpha_u) + std::norm(br.alpha_c) + std::norm(br.alpha_e) +
             std::norm(br.alpha_v0) + std::norm(br.alpha_v1);
    }
    return s;
}

double slowest_decay_rate(const NodeParams& node) {
    double rate = std::numeric_limits<double>::infinity();
    const double kappa = node.kappa();
    for (int k = 0; k < 2; ++k) {
        const TransitionParams& t = node.transitions[static_cast<std::size_t>(k)];
        // poles of the branch response: (w + i kappa/2)(w - delta + i gamma/2) = g^2
        const std::complex<double> bsum = -t.delta + kI * (kappa + t.gamma) / 2.0;
        const std::complex<double> prod =
            (kI * kappa / 2.0) * (-t.delta + kI * t.gamma / 2.0) -
            t.g * t.g;
        const std::complex<double> disc = std::sqrt(bsum * bsum - 4.0 * prod);
        const std::complex<double> r1 = 0.5 * (-bsum + disc);
        const std::complex<double> r2 = 0.5 * (-bsum - disc);
        rate = std::min({rate, -r1.imag(), -r2.imag()});
    }
    return std::max(rate, 1e-9);
}

namespace {

// Gaussian pulses get exact time-domain values; sampled pulses go through the
// same FFT path as the output modes.
struct PulseTime {
    bool analytic = false;
    GaussianPulse gauss;
    SampledMode sampled;
    double t_start = 0.0, t_end = 0.0;  // support window

    std::complex<double> value(double t) const {
        if (!analytic) return sampled.value(t);
        const double amp = std::pow(gauss.sigma_u * gauss.sigma_u / std::numbers::pi, 0.25);
        return amp * std::exp(-0.5 * gauss.sigma_u * gauss.sigma_u * t * t) *
               std::exp(-kI * (gauss.delta * t));
    }
    double consumed(double t) const {  // integral of |u|^2 up to t
        if (!analytic) return sampled.prefix(t);
        return 0.5 * (1.0 + std::erf(gauss.sigma_u * t));
    }
    std::complex<double> g_u(double t) const {
        const double remaining = std::max(1.0 - consumed(t), kEpsReg);
        return std::conj(value(t)) / std::sqrt(remaining);
    }
};

struct State {
    std::array<std::complex<double>, 10> y{};
};

State axpy(const State& a, double h, const State& d) {
    State out = a;
    for (std::size_t i = 0; i < out.y.size(); ++i) out.y[i] += h * d.y[i];
    return out;
}

}  // namespace

ScatteringResult integrate_scattering(const NodeParams& node, const PulseSpec& pulse,
                                      std::optional<TimeSpan> span,
                                      const StepControl& ctrl, int grid_points) {
    validate_node(node);
    const double sigma = pulse_sigma(pulse);
    const double center = pulse_center(pulse);
    const double ring_rate = slowest_decay_rate(node);
    const double t_pulse = 6.0 / sigma;
    TimeSpan ts = span.value_or(
        TimeSpan{-t_pulse, t_pulse + std::min(45.0 / ring_rate, 400.0)});

    // Sampled pulses keep their own grid (resampling costs accuracy); the FFT
    // window 2 pi / dw must cover the integration span, so refine as needed.
    FrequencyGrid grid;
    if (const auto* s = std::get_if<Spectrum>(&pulse)) {
        grid = s->grid;
    } else {
        grid = default_grid_for(pulse, node, grid_points);
    }
    const double needed = 2.05 * std::max(std::abs(ts.t_start), std::abs(ts.t_end));
    while (2.0 * std::numbers::pi / grid.step() < needed && grid.points < (1 << 20)) {
        grid.points = 2 * grid.points - 1;  // halves the spacing, keeps nodes
    }
    const Spectrum u = spectrum_of(pulse, grid);

    const std::complex<double> alpha_u0{1.0 / std::sqrt(2.0), 0.0};
    ScatteringModes modes = scattering_modes(node, u, alpha_u0);

    // time sampling fine enough for the fastest spectral feature
    const double omega_eff = std::max({std::abs(center) + 8.0 * sigma, node.kappa(),
                                       purcell_width(node)});
    const double dt_fine = 0.05 / omega_eff;

    PulseTime ut;
    if (const auto* g = std::get_if<GaussianPulse>(&pulse)) {
        ut.analytic = true;
        ut.gauss = *g;
    } else {
        ut.sampled = spectrum_to_time(u, dt_fine);
    }

    std::optional<SampledMode> v0t, v1t;
    if (modes.v0) v0t = spectrum_to_time(*modes.v0, dt_fine);
    if (modes.v1) {
        SampledMode raw = spectrum_to_time(*modes.v1, dt_fine);
        v1t = scattered_mode_overlap(*v0t, raw);
    }

    const double kappa = node.kappa();
    const double sqrt_k1 = std::sqrt(node.kappa1);

    auto rhs = [&](double t, const State& s) {
        const std::complex<double> gu = ut.g_u(t);
        // exact formal solution of the input-mode equation:
        // g_u*(t) alpha_u(t) = alpha_u(0) u(t), free of the clamped tail
        const std::complex<double> drive = alpha_u0 * ut.value(t);
        const std::complex<double> gv0 = v0t ? output_coupling(*v0t, t) : 0.0;
        const std::complex<double> gv1 = v1t ? output_coupling(*v1t, t) : 0.0;
        State d;
        for (int k = 0; k < 2; ++k) {
            const TransitionParams& tr = node.transitions[static_cast<std::size_t>(k)];
            const std::size_t o = static_cast<std::size_t>(5 * k);
            const auto au = s.y[o + 0], ac = s.y[o + 1], ae = s.y[o + 2];
            const auto av0 = s.y[o + 3], av1 = s.y[o + 4];
            const std::complex<double> ell = drive + sqrt_k1 * ac +
                                             std::conj(gv0) * av0 +
                                             std::conj(gv1) * av1;
            d.y[o + 0] = -0.5 * std::norm(gu) * au;
            d.y[o + 1] = -kI * tr.g * ae - sqrt_k1 * drive - 0.5 * kappa * ac;
            d.y[o + 2] = -kI * tr.delta * ae - kI * tr.g * ac - 0.5 * tr.gamma * ae;
            d.y[o + 3] = 0.5 * std::norm(gv0) * av0 + gv0 * std::conj(gv1) * av1 -
                         gv0 * ell;
            d.y[o + 4] = 0.5 * std::norm(gv1) * av1 - gv1 * ell;
        }
        return d;
    };

    // Dormand-Prince 5(4)
    static const double A[7][6] = {
        {},
        {1.0 / 5},
        {3.0 / 40, 9.0 / 40},
        {44.0 / 45, -56.0 / 15, 32.0 / 9},
        {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729},
        {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656},
        {35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84}};
    static const double C[7] = {0, 1.0 / 5, 3.0 / 10, 4.0 / 5, 8.0 / 9, 1.0, 1.0};
    static const double E[7] = {71.0 / 57600, 0.0, -71.0 / 16695, 71.0 / 1920,
                                -17253.0 / 339200, 22.0 / 525, -1.0 / 40};

    State y;
    y.y[0] = alpha_u0;
    y.y[5] = alpha_u0;

    ScatteringResult result;
    result.modes = std::move(modes);
    result.trajectory.push_back({ts.t_start,
                                 {BranchAmplitudes{y.y[0], y.y[1], y.y[2], y.y[3], y.y[4]},
                                  BranchAmplitudes{y.y[5], y.y[6], y.y[7], y.y[8], y.y[9]}},
                                });

    double t = ts.t_start;
    const double span_len = ts.t_end - ts.t_start;
    double h = std::min(1e-3 * span_len, 0.1 / omega_eff);
    if (ctrl.max_step > 0.0) h = std::min(h, ctrl.max_step);
    const double h_floor = 1e-12 * span_len;
    double norm_prev = 1.0;

    std::array<State, 7> k;
    while (t < ts.t_end) {
        h = std::min(h, ts.t_end - t);
        k[0] = rhs(t, y);
        for (int stage = 1; stage < 7; ++stage) {
            State arg = y;
            for (int j = 0; j < stage; ++j) {
                if (A[stage][j] != 0.0) arg = axpy(arg, h * A[stage][j], k[j]);
            }
            k[stage] = rhs(t + C[stage] * h, arg);
        }
        // A[6] holds the 5th-order weights b1..b6; b7 = 0
        State y_next = y;
        for (int stage = 0; stage < 6; ++stage) {
            if (A[6][stage] != 0.0) {
                y_next = axpy(y_next, h * A[6][stage], k[stage]);
            }
        }
        double err = 0.0;
        for (std::size_t i = 0; i < y.y.size(); ++i) {
            std::complex<double> e{};
            for (int stage = 0; stage < 7; ++stage) e += E[stage] * k[stage].y[i];
            e *= h;
            const double scale =
                ctrl.abs_tol + ctrl.rel_tol * std::max(std::abs(y.y[i]), std::abs(y_next.y[i]));
            err = std::max(err, std::abs(e) / scale);
        }
        if (err <= 1.0) {
            t += h;
            y = y_next;
            TrajectoryState st{t,
                               {BranchAmplitudes{y.y[0], y.y[1], y.y[2], y.y[3], y.y[4]},
                                BranchAmplitudes{y.y[5], y.y[6], y.y[7], y.y[8], y.y[9]}}};
            const double n = st.norm_sq();
            if (n > norm_prev + 1e-9) {
                throw NormViolation("single-excitation norm grew by " +
                                    std::to_string(n - norm_prev) + " in one step");
            }
            norm_prev = n;
            result.trajectory.push_back(st);
            ++result.steps_accepted;
        } else {
            ++result.steps_rejected;
        }
        const double factor = std::clamp(0.9 * std::pow(err > 0 ? err : 1e-16, -0.2), 0.2, 5.0);
        h *= factor;
        if (ctrl.max_step > 0.0) h = std::min(h, ctrl.max_step);
        if (h < h_floor) {
            throw StepSizeUnderflow("integrate_scattering: step size underflow at t = " +
                                    std::to_string(t));
        }
    }

    const TrajectoryState& last = result.trajectory.back();
    for (int br = 0; br < 2; ++br) {
        result.alpha_v0_final[static_cast<std::size_t>(br)] =
            last.branch[static_cast<std::size_t>(br)].alpha_v0;
        result.alpha_v1_final[static_cast<std::size_t>(br)] =
            last.branch[static_cast<std::size_t>(br)].alpha_v1;
    }
    result.norm_final = last.norm_sq();
    return result;
}

double reconstruction_error_l2(const ScatteringResult& result,
                               const NodeParams& node, int branch) {
    const Spectrum& u = result.modes.u;
    const auto evals = transfer_on_grid(node, u.grid.omegas());
    const std::complex<double> alpha_u0{1.0 / std::sqrt(2.0), 0.0};
    const std::size_t br = static_cast<std::size_t>(branch);

    Spectrum target{u.grid, std::vector<std::complex<double>>(u.values.size())};
    Spectrum recon{u.grid, std::vector<std::complex<double>>(u.values.size())};
    for (std::size_t i = 0; i < u.values.size(); ++i) {
        const auto rk = branch == 0 ? evals[i].r0 : evals[i].r1;
        target.values[i] = rk * u.values[i] * alpha_u0;
        std::complex<double> v = 0.0;
        if (result.modes.v0) {
            v += result.alpha_v0_final[br] * result.modes.v0->values[i];
        }
        if (result.modes.v1) {
            v += result.alpha_v1_final[br] * result.modes.v1->values[i];
        }
        recon.values[i] = v;
    }
    Spectrum diff{u.grid, std::vector<std::complex<double>>(u.values.size())};
    for (std::size_t i = 0; i < u.values.size(); ++i) {
        diff.values[i] = recon.values[i] - target.values[i];
    }
    const double t_norm = norm(target);
    if (t_norm < 1e-12) return norm(diff);
    return norm(diff) / t_norm;
}

std::array<BranchSpectra, 2> frequency_domain_amplitudes(
    const NodeParams& node, const Spectrum& u, std::complex<double> alpha_u0) {
    validate_node(node);
    std::array<BranchSpectra, 2> out;
    const double kappa = node.kappa();
    for (int k = 0; k < 2; ++k) {
        const TransitionParams& tr = node.transitions[static_cast<std::size_t>(k)];
        BranchSpectra& bs = out[static_cast<std::size_t>(k)];
        bs.alpha_c = {u.grid, std::vector<std::complex<double>>(u.values.size())};
        bs.alpha_e = {u.grid, std::vector<std::complex<double>>(u.values.size())};
        for (std::size_t i = 0; i < u.values.size(); ++i) {
            const double w = u.grid.omega(static_cast<int>(i));
            const std::complex<double> atom = (w - tr.delta) + kI * tr.gamma / 2.0;
            const std::complex<double> den =
                kI * w - kappa / 2.0 - kI * tr.g * tr.g / atom;
            const std::complex<double> ac =
                std::sqrt(node.kappa1) * alpha_u0 * u.values[i] / den;
            bs.alpha_c.values[i] = ac;
            bs.alpha_e.values[i] = tr.g * ac / atom;
        }
    }
    return out;
}

void write_trajectory_csv(const std::string& path,
                          const std::vector<TrajectoryState>& trajectory) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot open for writing: " + path);
    out << "t,branch,re_alpha_u,im_alpha_u,re_alpha_c,im_alpha_c,re_alpha_e,"
           "im_alpha_e,re_alpha_v0,im_alpha_v0,re_alpha_v1,im_alpha_v1\n";
    char buf[512];
    for (const auto& st : trajectory) {
        for (int k = 0; k < 2; ++k) {
            const BranchAmplitudes& b = st.branch[static_cast<std::size_t>(k)];
            std::snprintf(buf, sizeof buf,
                          "%.17g,%d,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,"
                          "%.17g,%.17g\n",
                          st.t, k, b.alpha_u.real(), b.alpha_u.imag(), b.alpha_c.real(),
                          b.alpha_c.imag(), b.alpha_e.real(), b.alpha_e.imag(),
                          b.alpha_v0.real(), b.alpha_v0.imag(), b.alpha_v1.real(),
                          b.alpha_v1.imag());
            out << buf;
        }
    }
}

}  // namespace spinlink
