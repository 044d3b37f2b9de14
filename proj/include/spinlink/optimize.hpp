#ifndef SPINLINK_OPTIMIZE_HPP
#define SPINLINK_OPTIMIZE_HPP

#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "spinlink/spectral.hpp"

// Closed-form and numerical parameter optimization for rate, flatness and
// encoding conditions.

namespace spinlink {

struct OptimizationResult {
    std::vector<std::pair<std::string, double>> params;
    double objective = 0.0;
    long evaluations = 0;
    bool converged = false;
    double bracket_lo = 0.0;
    double bracket_hi = 0.0;

    double value(std::string_view name) const;
};

// kappa_opt / gamma = (C^2 + 2C + 2) / C: minimizes |d^2 |r_-|^2 / d omega^2|
// at resonance and zeroes r_+'(0) under the phase-encoding ratio.
double optimal_kappa(double C);

// kappa1/kappa = (C+1)/(C+2): makes r_+(0) = 0.
double phase_encoding_ratio(double C);

enum class Kappa1Mode { fixed_ratio, enforce_phase_encoding };

// Maximizes the peak of |r_-(omega)|^2 over the common detuning delta for a
// four-level node (total rate `kappa`), returning delta_o, omega_o, the peak,
// and, in enforce_phase_encoding mode, the kappa1/kappa ratio solving
// r_+(omega_o) = 0. Symmetric optima are reported on the non-negative branch.
OptimizationResult optimize_siv_detuning(const FourLevelConfig& cfg, double kappa,
                                         Kappa1Mode mode);

// Configurations where one qubit state reflects nothing (App-style intensity
// encoding): the r0 roots at omega = +-sqrt(Ct-1) kt/2, delta = +-sqrt(Ct-1)
// (kt-gamma)/2 with kt = 2 kappa1 - kappa, Ct = 4g^2/(kt gamma); plus the
// critically coupled r1 root at omega = 0 when kappa1 = kappa/2.
struct IntensityEncodingRoots {
    struct Root {
        double omega = 0.0;
        double delta = 0.0;  // node detuning realizing the root
        int transition = 0;  // whose reflection vanishes
    };
    std::vector<Root> roots;
    double contrast = 0.0;  // |r_1(omega_12)|^2 at the r0 roots
};

IntensityEncodingRoots intensity_encoding_points(const NodeParams& params);

// Flatness optimization of |d^2 |r|^2 / d omega^2| at the pulse center for a
// three-level reference node. With free_ratio the kappa1/kappa ratio is also
// free and r_+(delta) = 0 is enforced through a quadratic penalty
// (golden-section for one free parameter, Nelder-Mead for two).
struct FlatnessProblem {
    TransferComponent component = TransferComponent::r_minus;
    double C = 1.0;
    double gamma = 1.0;
    double delta = 0.0;  // evaluation frequency (pulse center)
    double kappa1_ratio = 1.0;
    bool free_ratio = false;
    double kappa_lo = 0.5;
    double kappa_hi = 50.0;
};

OptimizationResult flatness_optimize(const FlatnessProblem& problem);

}  // namespace spinlink

#endif
