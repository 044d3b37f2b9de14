#ifndef SPINLINK_PULSE_HPP
#define SPINLINK_PULSE_HPP

#include <complex>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "spinlink/spectral.hpp"

// Photon pulse representation, spectral quadrature and output temporal-mode
// decomposition.

namespace spinlink {

struct FrequencyGrid {
    double omega_min = 0.0;
    double omega_max = 0.0;
    int points = 0;

    double step() const { return (omega_max - omega_min) / (points - 1); }
    double omega(int i) const { return omega_min + i * step(); }
    std::vector<double> omegas() const;
    bool same_as(const FrequencyGrid& other, double tol = 1e-9) const;
};

// Complex-valued samples on a uniform frequency grid with an L2 inner product.
struct Spectrum {
    FrequencyGrid grid;
    std::vector<std::complex<double>> values;
};

// Gaussian input pulse u~(w) = (pi sigma_u^2)^(-1/4) exp(-(w-Delta)^2 / 2 sigma_u^2).
struct GaussianPulse {
    double sigma_u = 1.0;
    double delta = 0.0;
};

using PulseSpec = std::variant<GaussianPulse, Spectrum>;

// Trapezoidal L2 machinery (compensated summation).
std::complex<double> inner_product(const Spectrum& f, const Spectrum& g);
double norm(const Spectrum& f);

// Quadrature of weight(w) |f(w)|^2 over the grid. Throws GridMismatch if the
// weight sampling does not match the grid.
double overlap_integral(const Spectrum& f, std::span<const double> weight);

// Default analysis grid: [Delta - 8 sigma - W, Delta + 8 sigma + W] with
// W = 5 * feature_width. The point count grows beyond min_points when needed
// to keep >= 24 samples per sigma_u (power of two, capped at 2^20).
FrequencyGrid default_grid(const GaussianPulse& pulse, double feature_width,
                           int min_points = 1 << 12);
FrequencyGrid default_grid_for(const PulseSpec& pulse, const NodeParams& node,
                               int min_points = 1 << 12);
FrequencyGrid default_grid_for(const PulseSpec& pulse, const NodeParams& node_a,
                               const NodeParams& node_b, int min_points = 1 << 12);

double pulse_sigma(const PulseSpec& pulse);
double pulse_center(const PulseSpec& pulse);

// Samples the pulse on the grid, normalized to unit L2 norm on that grid.
// Gaussian pulses require the grid to cover Delta +- 8 sigma (GridTooNarrow);
// sampled spectra must arrive normalized within 1e-9 (NotNormalized) and are
// linearly resampled when the grids differ.
Spectrum spectrum_of(const PulseSpec& pulse, const FrequencyGrid& grid);

// Orthonormal output modes of the interfered reflection and their amplitudes:
//   alpha_v0_minus v0 = r_- u,   alpha_v0_plus v0 + alpha_v1_plus v1 = r_+ u.
// v1 is materialized only when alpha_v1_plus >= 1e-12. The global phases make
// alpha_v0_minus and alpha_v1_plus real-positive.
struct ModeDecomposition {
    std::complex<double> alpha_v0_minus;
    std::complex<double> alpha_v0_plus;
    std::complex<double> alpha_v1_plus;
    Spectrum v0;
    std::optional<Spectrum> v1;
};

ModeDecomposition decompose_modes(const Spectrum& u,
                                  std::span<const TransferEval> node_evals);

// CSV import/export, columns `omega,re,im`, header required.
Spectrum load_spectrum_csv(const std::string& path);
void save_spectrum_csv(const std::string& path, const Spectrum& s);

}  // namespace spinlink

#endif
