#ifndef SPINLINK_SPECTRAL_HPP
#define SPINLINK_SPECTRAL_HPP

#include <complex>
#include <span>
#include <vector>

#include "spinlink/model.hpp"

// Closed-form reflection transfer functions and frequency derivatives.

namespace spinlink {

using complexd = std::complex<double>;

// State-dependent reflection amplitude r_k(omega) for transition k:
//   r_k = 1 - 2 (kappa1/kappa) (1 - 2i(w-delta_k)/gamma_k)
//             / [ (1 - 2i(w-delta_k)/gamma_k)(1 - 2iw/kappa) + C_k ].
// Satisfies |r_k| <= 1; the denominator cannot vanish for gamma_k, kappa > 0.
complexd reflection(const NodeParams& params, int transition, double omega);

struct TransferEval {
    double omega = 0.0;
    complexd r0;
    complexd r1;
    complexd r_plus;   // (r0 + r1)/2
    complexd r_minus;  // (r0 - r1)/2
};

TransferEval transfer_pair(const NodeParams& params, double omega);

std::vector<TransferEval> transfer_on_grid(const NodeParams& params,
                                           std::span<const double> omegas);

// On-resonance maximum (kappa1/kappa)^2 C^2/(C+1)^2 of |r_-|^2 for a
// three-level node. Requires g1 = 0 and delta0 = 0.
double resonant_peak(const NodeParams& params);

enum class TransferComponent { r_minus, r_plus, r0, r1 };

// Central finite-difference estimate of d^2 |r|^2 / d omega^2 with O(h^2)
// error. h = 0 selects the default step 1e-4 * max(1, |omega| + 1).
double d2_modsq(const NodeParams& params, TransferComponent which, double omega,
                double h = 0.0);

double modsq_component(const NodeParams& params, TransferComponent which,
                       double omega);

// Widest Purcell-broadened feature of the node, used for grid sizing.
double purcell_width(const NodeParams& params);

}  // namespace spinlink

#endif
