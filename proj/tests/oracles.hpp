#ifndef SPINLINK_TESTS_ORACLES_HPP
#define SPINLINK_TESTS_ORACLES_HPP

#include <complex>
#include <cstdint>
#include <functional>

// Independent reference implementations used only by tests. These avoid the
// library's evaluation path: explicit three-level closed forms, composite
// Simpson quadrature on analytic Gaussians, Richardson-extrapolated
// derivatives, and a separately coded Gram-Schmidt step.

namespace oracle {

// Explicit three-level combined transfer functions (resonant reference form
// with the qubit transition at detuning `delta`).
std::complex<double> r_minus_three_level(double C, double kappa, double kappa1,
                                         double gamma, double delta, double omega);
std::complex<double> r_plus_three_level(double C, double kappa, double kappa1,
                                        double gamma, double delta, double omega);

// Single-transition reflection through the unreduced route
// 1 - kappa1 / (kappa/2 - i w + g^2 (i(w-delta) + gamma/2)/((w-delta)^2 + gamma^2/4)),
// algebraically independent of the cooperativity-normalized form.
std::complex<double> reflection_unreduced(double kappa1, double kappa2, double g,
                                          double gamma, double delta, double omega);

// Exact d^2 |r_-|^2 / d omega^2 at omega = delta = 0 for a three-level node.
double d2_rminus_sq_resonant(double C, double kappa, double kappa1, double gamma);

// Richardson-extrapolated central second derivative (O(h^4)).
double richardson_d2(const std::function<double(double)>& f, double x, double h);

// Composite Simpson of weight(w) * |u~(w)|^2 for a Gaussian pulse.
double simpson_weighted_gaussian(const std::function<double(double)>& weight,
                                 double sigma_u, double delta, double lo, double hi,
                                 int intervals);

// Composite Simpson of an arbitrary real integrand.
double simpson(const std::function<double(double)>& f, double lo, double hi,
               int intervals);

// Gram-Schmidt amplitudes of (r_- u, r_+ u) for a three-level node on a
// Simpson-weighted fine grid, independent of the library decomposition.
struct ModeAmplitudes {
    double alpha_v0_minus = 0.0;
    std::complex<double> alpha_v0_plus;
    double alpha_v1_plus = 0.0;
};
ModeAmplitudes refined_gram_schmidt(double C, double kappa, double kappa1,
                                    double gamma, double node_delta, double sigma_u,
                                    double pulse_delta, int intervals);

// Deterministic uniform double from a raw 64-bit generator draw.
double uniform(std::uint64_t raw, double lo, double hi);

}  // namespace oracle

#endif
