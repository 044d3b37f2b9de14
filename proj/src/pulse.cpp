#include "spinlink/pulse.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cerrno>
#include <fstream>
#include <numbers>
#include <sstream>

#include "spinlink/fft.hpp"

namespace spinlink {

namespace {

// Kahan-compensated trapezoidal sum of samples f_i with spacing dw.
double trapezoid(std::span<const double> f, double dw) {
    double sum = 0.0, c = 0.0;
    const std::size_t n = f.size();
    for (std::size_t i = 0; i < n; ++i) {
        const double w = (i == 0 || i + 1 == n) ? 0.5 : 1.0;
        const double y = w * f[i] - c;
        const double t = sum + y;
        c = (t - sum) - y;
        sum = t;
    }
    return sum * dw;
}

std::complex<double> trapezoid_c(std::span<const std::complex<double>> f, double dw) {
    double re_sum = 0.0, re_c = 0.0, im_sum = 0.0, im_c = 0.0;
    const std::size_t n = f.size();
    for (std::size_t i = 0; i < n; ++i) {
        const double w = (i == 0 || i + 1 == n) ? 0.5 : 1.0;
        const double yr = w * f[i].real() - re_c;
        const double tr = re_sum + yr;
        re_c = (tr - re_sum) - yr;
        re_sum = tr;
        const double yi = w * f[i].imag() - im_c;
        const double ti = im_sum + yi;
        im_c = (ti - im_sum) - yi;
        im_sum = ti;
    }
    return {re_sum * dw, im_sum * dw};
}

void check_grids(const Spectrum& f, const Spectrum& g) {
    if (!f.grid.same_as(g.grid) || f.values.size() != g.values.size()) {
        throw GridMismatch("spectra live on different frequency grids");
    }
}

}  // namespace

std::vector<double> FrequencyGrid::omegas() const {
    std::vector<double> out(static_cast<std::size_t>(points));
    for (int i = 0; i < points; ++i) out[static_cast<std::size_t>(i)] = omega(i);
    return out;
}

bool FrequencyGrid::same_as(const FrequencyGrid& other, double tol) const {
    const double scale = std::max({1.0, std::abs(omega_min), std::abs(omega_max)});
    return points == other.points &&
           std::abs(omega_min - other.omega_min) < tol * scale &&
           std::abs(omega_max - other.omega_max) < tol * scale;
}

std::complex<double> inner_product(const Spectrum& f, const Spectrum& g) {
    check_grids(f, g);
    std::vector<std::complex<double>> prod(f.values.size());
    for (std::size_t i = 0; i < prod.size(); ++i) {
        prod[i] = std::conj(f.values[i]) * g.values[i];
    }
    return trapezoid_c(prod, f.grid.step());
}

double norm(const Spectrum& f) {
    std::vector<double> mag(f.values.size());
    for (std::size_t i = 0; i < mag.size(); ++i) mag[i] = std::norm(f.values[i]);
    return std::sqrt(trapezoid(mag, f.grid.step()));
}

double overlap_integral(const Spectrum& f, std::span<const double> weight) {
    if (weight.size() != f.values.size()) {
        throw GridMismatch("weight samples do not match the spectrum grid");
    }
    std::vector<double> integrand(f.values.size());
    for (std::size_t i = 0; i < integrand.size(); ++i) {
        integrand[i] = weight[i] * std::norm(f.values[i]);
    }
    return trapezoid(integrand, f.grid.step());
}

FrequencyGrid default_grid(const GaussianPulse& pulse, double feature_width,
                           int min_points) {
    if (!(pulse.sigma_u > 0.0)) {
        throw NonPhysicalParameter("sigma_u", "pulse linewidth must be > 0");
    }
    // transfer features much wider than the pulse are flat over the support
    // and need no extra window
    const double w_extra = 5.0 * std::min(feature_width, 2000.0 * pulse.sigma_u);
    const double lo = pulse.delta - 8.0 * pulse.sigma_u - w_extra;
    const double hi = pulse.delta + 8.0 * pulse.sigma_u + w_extra;
    // Keep the pulse resolved: at least ~24 samples per sigma_u.
    const double span = hi - lo;
    std::size_t wanted = static_cast<std::size_t>(
        std::max<double>(min_points, std::ceil(24.0 * span / pulse.sigma_u)));
    std::size_t n = next_power_of_two(wanted);
    n = std::min<std::size_t>(n, std::size_t{1} << 20);
    if (static_cast<double>(n) * pulse.sigma_u / span < 8.0) {
        throw GridTooNarrow("default_grid: sigma_u too small to resolve on a 2^20 grid");
    }
    return {lo, hi, static_cast<int>(n)};
}

double pulse_sigma(const PulseSpec& pulse) {
    if (const auto* g = std::get_if<GaussianPulse>(&pulse)) return g->sigma_u;
    // amplitude-width convention: sqrt(2) * std of |u|^2 (equals sigma_u for
    // a Gaussian)
    const Spectrum& s = std::get<Spectrum>(pulse);
    double m0 = 0.0, m1 = 0.0, m2 = 0.0;
    for (std::size_t i = 0; i < s.values.size(); ++i) {
        const double w = s.grid.omega(static_cast<int>(i));
        const double p = std::norm(s.values[i]);
        m0 += p;
        m1 += p * w;
        m2 += p * w * w;
    }
    const double mean = m1 / m0;
    return std::sqrt(2.0 * std::max(m2 / m0 - mean * mean, 0.0));
}

double pulse_center(const PulseSpec& pulse) {
    if (const auto* g = std::get_if<GaussianPulse>(&pulse)) return g->delta;
    const Spectrum& s = std::get<Spectrum>(pulse);
    double m0 = 0.0, m1 = 0.0;
    for (std::size_t i = 0; i < s.values.size(); ++i) {
        const double p = std::norm(s.values[i]);
        m0 += p;
        m1 += p * s.grid.omega(static_cast<int>(i));
    }
    return m1 / m0;
}

FrequencyGrid default_grid_for(const PulseSpec& pulse, const NodeParams& node,
                               int min_points) {
    const GaussianPulse proxy{pulse_sigma(pulse), pulse_center(pulse)};
    return default_grid(proxy, purcell_width(node), min_points);
}

FrequencyGrid default_grid_for(const PulseSpec& pulse, const NodeParams& node_a,
                               const NodeParams& node_b, int min_points) {
    const GaussianPulse proxy{pulse_sigma(pulse), pulse_center(pulse)};
    const double width = std::max(purcell_width(node_a), purcell_width(node_b));
    return default_grid(proxy, width, min_points);
}

Spectrum spectrum_of(const PulseSpec& pulse, const FrequencyGrid& grid) {
    if (grid.points < (1 << 10)) {
        throw GridTooNarrow("grid needs at least 2^10 points");
    }
    Spectrum out;
    out.grid = grid;
    out.values.resize(static_cast<std::size_t>(grid.points));

    if (const auto* g = std::get_if<GaussianPulse>(&pulse)) {
        if (!(g->sigma_u > 0.0)) {
            throw NonPhysicalParameter("sigma_u", "pulse linewidth must be > 0");
        }
        if (grid.omega_min > g->delta - 8.0 * g->sigma_u ||
            grid.omega_max < g->delta + 8.0 * g->sigma_u) {
            throw GridTooNarrow("grid does not cover Delta +- 8 sigma_u");
        }
        const double amp = std::pow(std::numbers::pi * g->sigma_u * g->sigma_u, -0.25);
        for (int i = 0; i < grid.points; ++i) {
            const double x = (grid.omega(i) - g->delta) / g->sigma_u;
            out.values[static_cast<std::size_t>(i)] = amp * std::exp(-0.5 * x * x);
        }
    } else {
        const Spectrum& s = std::get<Spectrum>(pulse);
        const double n0 = norm(s);
        if (std::abs(n0 - 1.0) > 1e-9) {
            throw NotNormalized("sampled spectrum norm " + std::to_string(n0) +
                                " is not 1 within 1e-9");
        }
        if (s.grid.same_as(grid)) {
            out.values = s.values;
        } else {
            // 4-point Lagrange resampling, O(dw^4)
            auto cubic = [&](double pos) -> std::complex<double> {
                const int n = s.grid.points;
                if (pos < 0.0 || pos > n - 1) return 0.0;
                int j = std::clamp(static_cast<int>(std::floor(pos)), 1, n - 3);
                const double t = pos - j;
                const std::complex<double> p0 = s.values[static_cast<std::size_t>(j - 1)];
                const std::complex<double> p1 = s.values[static_cast<std::size_t>(j)];
                const std::complex<double> p2 = s.values[static_cast<std::size_t>(j + 1)];
                const std::complex<double> p3 = s.values[static_cast<std::size_t>(j + 2)];
                return p0 * (-t * (t - 1.0) * (t - 2.0) / 6.0) +
                       p1 * ((t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0) +
                       p2 * (-(t + 1.0) * t * (t - 2.0) / 2.0) +
                       p3 * ((t + 1.0) * t * (t - 1.0) / 6.0);
            };
            for (int i = 0; i < grid.points; ++i) {
                const double pos = (grid.omega(i) - s.grid.omega_min) / s.grid.step();
                out.values[static_cast<std::size_t>(i)] = cubic(pos);
            }
        }
    }

    const double n = norm(out);
    if (!(n > 0.0)) throw NotNormalized("pulse has zero norm on the grid");
    for (auto& v : out.values) v /= n;
    return out;
}

ModeDecomposition decompose_modes(const Spectrum& u,
                                  std::span<const TransferEval> node_evals) {
    if (node_evals.size() != u.values.size()) {
        throw GridMismatch("transfer evaluations do not match the pulse grid");
    }
    const std::size_t n = u.values.size();

    Spectrum a{u.grid, std::vector<std::complex<double>>(n)};  // r_- u
    Spectrum b{u.grid, std::vector<std::complex<double>>(n)};  // r_+ u
    for (std::size_t i = 0; i < n; ++i) {
        a.values[i] = node_evals[i].r_minus * u.values[i];
        b.values[i] = node_evals[i].r_plus * u.values[i];
    }

    ModeDecomposition out;
    const double a_norm = norm(a);
    if (a_norm < 1e-12) {
        throw DegenerateAntisymmetric(
            "r_- vanishes on the pulse support; heralding mode undefined");
    }
    out.alpha_v0_minus = a_norm;
    out.v0 = a;
    for (auto& v : out.v0.values) v /= a_norm;

    out.alpha_v0_plus = inner_product(out.v0, b);

    Spectrum residual{u.grid, std::vector<std::complex<double>>(n)};
    for (std::size_t i = 0; i < n; ++i) {
        residual.values[i] = b.values[i] - out.alpha_v0_plus * out.v0.values[i];
    }
    const double r_norm = norm(residual);
    out.alpha_v1_plus = r_norm;
    if (r_norm >= 1e-12) {
        out.v1 = residual;
        for (auto& v : out.v1->values) v /= r_norm;
    }
    return out;
}

Spectrum load_spectrum_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open spectrum file: " + path);
    std::string line;
    if (!std::getline(in, line)) throw ConfigError("empty spectrum file: " + path);
    // tolerate whitespace and a UTF-8 BOM in the header
    std::string header = line;
    std::erase_if(header, [](char c) { return std::isspace(static_cast<unsigned char>(c)); });
    if (header.size() >= 3 && header.compare(0, 3, "\xEF\xBB\xBF") == 0) header.erase(0, 3);
    if (header != "omega,re,im") {
        throw ConfigError("spectrum file must start with header 'omega,re,im'");
    }
    // strtod tolerates sub-normal magnitudes where std::stod throws
    auto parse = [&](const std::string& cell) {
        const char* begin = cell.c_str();
        char* end = nullptr;
        errno = 0;
        const double v = std::strtod(begin, &end);
        if (end == begin) throw ConfigError("bad spectrum value: " + cell);
        return v;
    };
    std::vector<double> omegas;
    std::vector<std::complex<double>> values;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string cell;
        double col[3] = {0, 0, 0};
        for (int c = 0; c < 3; ++c) {
            if (!std::getline(ss, cell, ',')) {
                throw ConfigError("bad spectrum row: " + line);
            }
            col[c] = parse(cell);
        }
        omegas.push_back(col[0]);
        values.emplace_back(col[1], col[2]);
    }
    if (omegas.size() < 2) throw ConfigError("spectrum needs at least 2 rows");
    const double dw = omegas[1] - omegas[0];
    for (std::size_t i = 1; i < omegas.size(); ++i) {
        if (std::abs(omegas[i] - omegas[i - 1] - dw) > 1e-9 * std::max(1.0, std::abs(dw))) {
            throw GridMismatch("spectrum grid is not uniform");
        }
    }
    Spectrum s;
    s.grid = {omegas.front(), omegas.back(), static_cast<int>(omegas.size())};
    s.values = std::move(values);
    return s;
}

void save_spectrum_csv(const std::string& path, const Spectrum& s) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot open for writing: " + path);
    out << "omega,re,im\n";
    char buf[128];
    for (std::size_t i = 0; i < s.values.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n",
                      s.grid.omega(static_cast<int>(i)), s.values[i].real(),
                      s.values[i].imag());
        out << buf;
    }
}

}  // namespace spinlink
