#include "spinlink/optimize.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>

namespace spinlink {

namespace {

constexpr double kParamTol = 1e-8;
constexpr long kMaxEvaluations = 10000;

struct Golden {
    double x = 0.0;
    double f = 0.0;
    long evaluations = 0;
    bool converged = false;
};

// Golden-section minimization on [lo, hi].
Golden golden_minimize(const std::function<double(double)>& f, double lo, double hi,
                       double tol_x, long max_eval = kMaxEvaluations) {
    static const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = lo, b = hi;
    double c = b - inv_phi * (b - a);
    double d = a + inv_phi * (b - a);
    double fc = f(c), fd = f(d);
    long evals = 2;
    while (b - a > tol_x && evals < max_eval) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
        ++evals;
    }
    Golden out;
    out.x = fc < fd ? c : d;
    out.f = std::min(fc, fd);
    out.evaluations = evals;
    out.converged = (b - a) <= tol_x;
    return out;
}

// Pre-scan on a uniform grid followed by golden refinement around the best cell.
Golden scan_then_golden(const std::function<double(double)>& f, double lo, double hi,
                        int scan_points, double tol_x) {
    double best_x = lo, best_f = f(lo);
    const double dx = (hi - lo) / (scan_points - 1);
    for (int i = 1; i < scan_points; ++i) {
        const double x = lo + i * dx;
        const double v = f(x);
        if (v < best_f) {
            best_f = v;
            best_x = x;
        }
    }
    const double a = std::max(lo, best_x - dx);
    const double b = std::min(hi, best_x + dx);
    Golden g = golden_minimize(f, a, b, tol_x);
    g.evaluations += scan_points;
    if (g.f > best_f) {
        g.x = best_x;
        g.f = best_f;
    }
    return g;
}

struct NelderMead {
    std::vector<double> x;
    double f = 0.0;
    long evaluations = 0;
    bool converged = false;
};

NelderMead nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                       std::vector<double> x0, std::vector<double> step,
                       double tol_f, long max_eval = kMaxEvaluations) {
    const std::size_t n = x0.size();
    std::vector<std::vector<double>> pts(n + 1, x0);
    std::vector<double> vals(n + 1);
    for (std::size_t i = 0; i < n; ++i) pts[i + 1][i] += step[i];
    long evals = 0;
    for (std::size_t i = 0; i <= n; ++i) {
        vals[i] = f(pts[i]);
        ++evals;
    }
    auto order = [&] {
        std::vector<std::size_t> idx(n + 1);
        for (std::size_t i = 0; i <= n; ++i) idx[i] = i;
        std::sort(idx.begin(), idx.end(),
                  [&](std::size_t a, std::size_t b) { return vals[a] < vals[b]; });
        std::vector<std::vector<double>> p2(n + 1);
        std::vector<double> v2(n + 1);
        for (std::size_t i = 0; i <= n; ++i) {
            p2[i] = pts[idx[i]];
            v2[i] = vals[idx[i]];
        }
        pts = std::move(p2);
        vals = std::move(v2);
    };
    order();
    while (evals < max_eval) {
        if (std::abs(vals[n] - vals[0]) < tol_f * (1.0 + std::abs(vals[0]))) break;
        std::vector<double> centroid(n, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) centroid[j] += pts[i][j] / n;
        }
        auto blend = [&](double t) {
            std::vector<double> p(n);
            for (std::size_t j = 0; j < n; ++j) {
                p[j] = centroid[j] + t * (pts[n][j] - centroid[j]);
            }
            return p;
        };
        std::vector<double> xr = blend(-1.0);
        double fr = f(xr);
        ++evals;
        if (fr < vals[0]) {
            std::vector<double> xe = blend(-2.0);
            double fe = f(xe);
            ++evals;
            if (fe < fr) {
                pts[n] = xe;
                vals[n] = fe;
            } else {
                pts[n] = xr;
                vals[n] = fr;
            }
        } else if (fr < vals[n - 1]) {
            pts[n] = xr;
            vals[n] = fr;
        } else {
            std::vector<double> xc = blend(0.5);
            double fc = f(xc);
            ++evals;
            if (fc < vals[n]) {
                pts[n] = xc;
                vals[n] = fc;
            } else {
                for (std::size_t i = 1; i <= n; ++i) {
                    for (std::size_t j = 0; j < n; ++j) {
                        pts[i][j] = 0.5 * (pts[i][j] + pts[0][j]);
                    }
                    vals[i] = f(pts[i]);
                    ++evals;
                }
            }
        }
        order();
    }
    NelderMead out;
    out.x = pts[0];
    out.f = vals[0];
    out.evaluations = evals;
    out.converged = std::abs(vals[n] - vals[0]) < tol_f * (1.0 + std::abs(vals[0]));
    return out;
}

}  // namespace

double OptimizationResult::value(std::string_view name) const {
    for (const auto& [key, v] : params) {
        if (key == name) return v;
    }
    throw Error("optimization result has no parameter '" + std::string(name) + "'");
}

double optimal_kappa(double C) {
    if (!(C > 0.0)) throw PreconditionViolated("optimal_kappa: requires C > 0");
    return (C * C + 2.0 * C + 2.0) / C;
}

double phase_encoding_ratio(double C) {
    if (!(C > 0.0)) throw PreconditionViolated("phase_encoding_ratio: requires C > 0");
    return (C + 1.0) / (C + 2.0);
}

namespace {

// r_k = 1 - (kappa1/kappa) H_k at fixed total kappa; the mirror split only
// scales the transfer functions through H.
struct SivKernel {
    double kappa, gamma, zeta, C;

    complexd H_k(double delta, int k, double omega) const {
        const double delta_k = delta + (k == 0 ? -0.5 : 0.5) * zeta;
        const complexd atom(1.0, -2.0 * (omega - delta_k) / gamma);
        const complexd cav(1.0, -2.0 * omega / kappa);
        return 2.0 * atom / (atom * cav + C);
    }
    complexd H_plus(double delta, double omega) const {
        return 0.5 * (H_k(delta, 0, omega) + H_k(delta, 1, omega));
    }
    complexd H_minus(double delta, double omega) const {
        return 0.5 * (H_k(delta, 0, omega) - H_k(delta, 1, omega));
    }
};

struct SivPoint {
    double omega = 0.0;
    double ratio = 0.0;       // kappa1/kappa zeroing r_+ at omega
    double objective = -1.0;  // |r_-(omega)|^2 at that ratio
    bool feasible = false;
};

// Best exactly phase-encodable point for a given delta: roots of
// Im H_+(omega) = 0 with 1/Re H_+ in (0, 1].
SivPoint best_encodable_point(const SivKernel& ker, double delta, double omega_bound,
                              long& evaluations) {
    const int n = std::max(4001, static_cast<int>(32.0 * omega_bound / ker.gamma));
    SivPoint best;
    double w_prev = -omega_bound;
    double im_prev = ker.H_plus(delta, w_prev).imag();
    for (int i = 1; i <= n; ++i) {
        const double w = -omega_bound + 2.0 * omega_bound * i / n;
        const double im = ker.H_plus(delta, w).imag();
        ++evaluations;
        if (im_prev * im <= 0.0 && (im_prev != 0.0 || im != 0.0)) {
            double lo = w_prev, hi = w;
            double flo = im_prev;
            for (int it = 0; it < 80 && hi - lo > 1e-14 * std::max(1.0, std::abs(hi));
                 ++it) {
                const double mid = 0.5 * (lo + hi);
                const double fm = ker.H_plus(delta, mid).imag();
                ++evaluations;
                if (flo * fm <= 0.0) {
                    hi = mid;
                } else {
                    lo = mid;
                    flo = fm;
                }
            }
            const double root = 0.5 * (lo + hi);
            const double re = ker.H_plus(delta, root).real();
            if (re >= 1.0) {
                const double ratio = 1.0 / re;
                const double objective =
                    ratio * ratio * std::norm(ker.H_minus(delta, root));
                if (objective > best.objective) {
                    best = {root, ratio, objective, true};
                }
            }
        }
        w_prev = w;
        im_prev = im;
    }
    return best;
}

}  // namespace

OptimizationResult optimize_siv_detuning(const FourLevelConfig& cfg, double kappa,
                                         Kappa1Mode mode) {
    if (!(cfg.zeta >= 0.0)) throw NonPhysicalParameter("zeta", "must be >= 0");
    if (!(kappa > 0.0)) throw NonPhysicalParameter("kappa", "must be > 0");
    if (cfg.zeta == 0.0) {
        throw DegenerateAntisymmetric(
            "optimize_siv_detuning: zeta = 0 makes r_- vanish identically");
    }
    const double C = 4.0 * cfg.g * cfg.g / (kappa * cfg.gamma);
    const SivKernel ker{kappa, cfg.gamma, cfg.zeta, C};
    const double z = cfg.zeta / cfg.gamma;
    const double threshold = std::sqrt(z * z + 1.0);

    // Purcell-broadened transitions need separations growing with C, so widen
    // the nominal 2*zeta + 5*gamma bracket accordingly.
    const double delta_bound =
        2.0 * cfg.zeta + 5.0 * cfg.gamma + 2.0 * (C + 1.0) * cfg.gamma;
    const double omega_bound = delta_bound + cfg.zeta + 5.0 * cfg.gamma;
    long evaluations = 0;

    auto finish = [&](double delta_o, double omega_o, double ratio, bool converged) {
        FourLevelConfig at = cfg;
        at.kappa1 = ratio * kappa;
        at.kappa2 = kappa - at.kappa1;
        at.delta = delta_o;
        const TransferEval ev = transfer_pair(expand_four_level(at), omega_o);
        OptimizationResult out;
        out.params = {{"delta_o", delta_o},
                      {"omega_o", omega_o},
                      {"kappa1_ratio", ratio},
                      {"r_plus_sq_at_omega_o", std::norm(ev.r_plus)},
                      {"normalized_peak", std::norm(ev.r_minus) / (ratio * ratio)}};
        out.objective = std::norm(ev.r_minus);
        out.evaluations = evaluations;
        out.converged = converged;
        out.bracket_lo = 0.0;
        out.bracket_hi = delta_bound;
        if (!converged) throw NotConverged("optimize_siv_detuning failed to converge");
        return out;
    };

    if (mode == Kappa1Mode::enforce_phase_encoding) {
        // Below the threshold C = sqrt(zeta^2/gamma^2 + 1) the symmetric
        // resonance is the only exactly encodable operating point and its
        // ratio ((1+C)^2 + z^2) / (2 (1 + C + z^2)) is still physical.
        const double ratio0 =
            (std::pow(1.0 + C, 2) + z * z) / (2.0 * (1.0 + C + z * z));
        if (C <= threshold || ratio0 <= 1.0) {
            return finish(0.0, 0.0, ratio0, true);
        }
        // Above threshold: largest encodable |r_-|^2 over the detuning, taking
        // the smallest delta within 1% of the optimum (detuning costs a Lamb
        // shift, so near-ties resolve toward resonance).
        const int n_delta = 301;
        std::vector<SivPoint> points(n_delta);
        double best = -1.0;
        for (int i = 0; i < n_delta; ++i) {
            const double delta = delta_bound * i / (n_delta - 1);
            points[static_cast<std::size_t>(i)] =
                best_encodable_point(ker, delta, omega_bound, evaluations);
            best = std::max(best, points[static_cast<std::size_t>(i)].objective);
        }
        if (best <= 0.0) {
            return finish(0.0, 0.0, std::min(ratio0, 1.0), false);
        }
        int sel = 0;
        while (!(points[static_cast<std::size_t>(sel)].feasible &&
                 points[static_cast<std::size_t>(sel)].objective >= 0.99 * best)) {
            ++sel;
        }
        // local golden refinement of the selected delta
        const double dd = delta_bound / (n_delta - 1);
        auto neg_obj = [&](double delta) {
            return -best_encodable_point(ker, delta, omega_bound, evaluations).objective;
        };
        const Golden refined =
            golden_minimize(neg_obj, std::max(0.0, dd * (sel - 1)),
                            std::min(delta_bound, dd * (sel + 1)), 1e-6);
        double delta_o = refined.x;
        SivPoint point = best_encodable_point(ker, delta_o, omega_bound, evaluations);
        if (dd * sel == 0.0 && -refined.f <= points[0].objective) {
            delta_o = 0.0;
            point = points[0];
        }
        return finish(delta_o, point.omega, point.ratio, point.feasible);
    }

    // fixed mirror split: plain peak maximization, same smallest-delta rule
    const double ratio = cfg.kappa1 / (cfg.kappa1 + cfg.kappa2);
    auto peak_at = [&](double delta) {
        auto neg = [&](double w) {
            ++evaluations;
            return -std::norm(ker.H_minus(delta, w));
        };
        return scan_then_golden(neg, -omega_bound, omega_bound, 2401, kParamTol);
    };
    const int n_delta = 301;
    std::vector<Golden> inner(n_delta);
    double best = -1.0;
    for (int i = 0; i < n_delta; ++i) {
        const double delta = delta_bound * i / (n_delta - 1);
        inner[static_cast<std::size_t>(i)] = peak_at(delta);
        best = std::max(best, -inner[static_cast<std::size_t>(i)].f);
    }
    int sel = 0;
    while (!(-inner[static_cast<std::size_t>(sel)].f >= 0.99 * best)) ++sel;
    const double delta_o = delta_bound * sel / (n_delta - 1);
    const Golden in = inner[static_cast<std::size_t>(sel)];
    return finish(delta_o, in.x, ratio, in.converged);
}

IntensityEncodingRoots intensity_encoding_points(const NodeParams& params) {
    validate_node(params);
    if (!params.three_level()) {
        throw PreconditionViolated("intensity_encoding_points: requires g1 = 0");
    }
    const double kappa = params.kappa();
    const double gamma = params.transitions[0].gamma;
    const double g = params.transitions[0].g;
    const double kt = 2.0 * params.kappa1 - kappa;

    IntensityEncodingRoots out;
    if (kt > 0.0) {
        const double Ct = 4.0 * g * g / (kt * gamma);
        if (Ct >= 1.0 - 1e-12) {
            const double C = params.cooperativity(0);
            out.contrast = C / (kappa / kt - kt / kappa + C);
            if (std::abs(Ct - 1.0) < 1e-12) {
                out.roots.push_back({0.0, 0.0, 0});
            } else {
                const double s = std::sqrt(Ct - 1.0);
                out.roots.push_back({s * kt / 2.0, s * (kt - gamma) / 2.0, 0});
                out.roots.push_back({-s * kt / 2.0, -s * (kt - gamma) / 2.0, 0});
            }
        }
    }
    if (std::abs(params.kappa1 - kappa / 2.0) < 1e-12 * kappa) {
        out.roots.push_back({0.0, 0.0, 1});
    }
    if (out.roots.empty()) {
        throw NoRoots("no intensity-encoding root: need 2*kappa1 > kappa with "
                      "4g^2/((2*kappa1-kappa)*gamma) >= 1, or kappa1 = kappa/2");
    }
    // no trust in the algebra path: every root must kill the reflection
    for (const auto& root : out.roots) {
        NodeParams at = params;
        at.transitions[0].delta = root.delta;
        const double residual = std::abs(reflection(at, root.transition, root.omega));
        if (residual > 1e-10) {
            throw Error("intensity_encoding_points: root verification failed, |r| = " +
                        std::to_string(residual));
        }
    }
    return out;
}

OptimizationResult flatness_optimize(const FlatnessProblem& problem) {
    if (!(problem.kappa_hi > problem.kappa_lo) || !(problem.kappa_lo > 0.0)) {
        throw PreconditionViolated("flatness_optimize: empty or invalid kappa bounds");
    }
    auto node_at = [&](double kappa, double ratio) {
        return make_three_level(problem.C, kappa, ratio, problem.gamma, 0.0);
    };

    OptimizationResult out;
    out.bracket_lo = problem.kappa_lo;
    out.bracket_hi = problem.kappa_hi;

    if (!problem.free_ratio) {
        auto objective = [&](double kappa) {
            return std::abs(d2_modsq(node_at(kappa, problem.kappa1_ratio),
                                     problem.component, problem.delta));
        };
        Golden g = golden_minimize(objective, problem.kappa_lo, problem.kappa_hi,
                                   kParamTol * std::max(1.0, problem.kappa_hi));
        out.params = {{"kappa", g.x}};
        out.objective = g.f;
        out.evaluations = g.evaluations;
        out.converged = g.converged;
    } else {
        // Two free parameters (kappa, kappa1/kappa); the phase-encoding
        // condition r_+(delta) = 0 enters as a quadratic penalty.
        auto objective = [&](const std::vector<double>& x) {
            const double kappa = std::clamp(x[0], problem.kappa_lo, problem.kappa_hi);
            const double ratio = std::clamp(x[1], 0.05, 1.0);
            const NodeParams node = node_at(kappa, ratio);
            const double flat = std::abs(d2_modsq(node, problem.component, problem.delta));
            const double enc = std::norm(transfer_pair(node, problem.delta).r_plus);
            return flat + 1e6 * enc;
        };
        const double kappa0 = 0.5 * (problem.kappa_lo + problem.kappa_hi);
        NelderMead nm = nelder_mead(objective, {kappa0, 0.8},
                                    {0.25 * kappa0, 0.1}, 1e-14);
        // polish with a restart around the found point
        NelderMead nm2 = nelder_mead(objective, nm.x, {1e-3 * nm.x[0], 1e-4}, 1e-16);
        out.params = {{"kappa", nm2.x[0]}, {"kappa1_ratio", nm2.x[1]}};
        out.objective = nm2.f;
        out.evaluations = nm.evaluations + nm2.evaluations;
        out.converged = nm2.converged;
    }
    if (!out.converged) throw NotConverged("flatness_optimize failed to converge");
    return out;
}

}  // namespace spinlink
