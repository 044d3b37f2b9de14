#include <doctest.h>

#include <cmath>

#include "spinlink/optimize.hpp"
#include "spinlink/readout.hpp"

using namespace spinlink;

TEST_CASE("intensity_readout: critically coupled cavity suppresses the uncoupled state") {
    // kappa1 = kappa/2, C = 10, narrow pulse: p1 ~ 0, p0 ~ C^2/(C+1)^2
    const NodeParams node = make_three_level(10.0, 4.0, 0.5);
    const ReadoutReport report = intensity_readout(node, GaussianPulse{0.01, 0.0});
    CHECK(report.p_reflect_state1 < 1e-3);
    CHECK(report.p_reflect_state0 == doctest::Approx(100.0 / 121.0).epsilon(1e-3));
    CHECK(report.contrast == doctest::Approx(100.0 / 121.0).epsilon(2e-3));
}

TEST_CASE("intensity_readout: C = 0 has no contrast") {
    const NodeParams node = make_three_level(0.0, 3.0, 0.8);
    const ReadoutReport report = intensity_readout(node, GaussianPulse{0.1, 0.0});
    CHECK(report.contrast < 1e-12);
}

TEST_CASE("intensity_readout: over-coupled root configuration flips the contrast") {
    // kappa1 = kappa: the coupled state reflects nothing at the root, the
    // uncoupled state reflects everything
    const NodeParams base = make_three_level(2.0, 6.0, 1.0);
    const IntensityEncodingRoots roots = intensity_encoding_points(base);
    REQUIRE(!roots.roots.empty());
    const auto& root = roots.roots.front();
    NodeParams node = base;
    node.transitions[0].delta = root.delta;
    const ReadoutReport report =
        intensity_readout(node, GaussianPulse{0.01, root.omega});
    CHECK(report.p_reflect_state0 < 2e-3);
    CHECK(report.p_reflect_state1 == doctest::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("intensity_readout rejects four-level nodes") {
    FourLevelConfig cfg;
    cfg.kappa1 = 2.0;
    cfg.g = 0.7;
    cfg.zeta = 3.0;
    CHECK_THROWS_AS(intensity_readout(expand_four_level(cfg), GaussianPulse{0.1, 0.0}),
                    PreconditionViolated);
}

TEST_CASE("intensity contrast peaks at the critically coupled mirror split") {
    // scan kappa1/kappa at large C and narrow pulse
    const double C = 50.0;
    double best_ratio = 0.0, best = -1.0;
    for (int i = 1; i <= 100; ++i) {
        const double ratio = 0.01 * i;
        const NodeParams node = make_three_level(C, 6.0, ratio);
        const ReadoutReport report = intensity_readout(node, GaussianPulse{0.01, 0.0});
        if (report.contrast > best) {
            best = report.contrast;
            best_ratio = ratio;
        }
    }
    CHECK(std::abs(best_ratio - 0.5) <= 0.01 + 1e-12);
}

TEST_CASE("phase_readout: ideal phase switch routes each state to its port") {
    // near-ideal: huge C, one-sided lossless cavity, narrow pulse
    // (the residual error is ~2/C from |r_0(0)| = (C-1)/(C+1))
    const NodeParams node = make_three_level(1e7, 1e4, 1.0);
    const ReadoutReport report = phase_readout(node, GaussianPulse{1e-3, 0.0});
    CHECK(report.port_probs[0][0] == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(report.port_probs[0][1] < 1e-6);
    CHECK(report.port_probs[1][1] == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(report.port_probs[1][0] < 1e-6);
    CHECK(report.readout_error < 1e-6);
}

TEST_CASE("phase_readout: identical reflections cannot be told apart") {
    // g = 0 makes both qubit states reflect identically
    const NodeParams node = make_three_level(0.0, 5.0, 1.0);
    const ReadoutReport report = phase_readout(node, GaussianPulse{0.05, 0.0});
    CHECK(report.port_probs[0][0] == doctest::Approx(report.port_probs[1][0]).epsilon(1e-12));
    CHECK(report.readout_error == doctest::Approx(report.readout_error));
    // |r| = 1: the photon splits between ports with |1 + r|^2/4 each; the
    // wrong-state assignment has probability 1 - min_k P(correct) = 1
    CHECK(report.readout_error >= 0.5);
}

TEST_CASE("phase_readout error: frozen quadrature value at C=2 kappa_opt") {
    const NodeParams node = make_three_level(2.0, 5.0, 0.75);
    const ReadoutReport report = phase_readout(node, GaussianPulse{0.5, 0.0});
    // 2*10^6-interval Simpson quadrature of the pulse-averaged reflections
    // (oracles.cpp): rho_0 = 0.42875..., rho_1 = -0.47164...
    CHECK(report.readout_error == doctest::Approx(0.48966815360).epsilon(1e-7));
}

TEST_CASE("phase_readout error shrinks monotonically with the pulse bandwidth") {
    const double C = 2.0;
    const NodeParams node =
        make_three_level(C, optimal_kappa(C), phase_encoding_ratio(C));
    double prev = 2.0;
    for (double sigma : {1.0, 0.3, 0.1, 0.03}) {
        const ReadoutReport report = phase_readout(node, GaussianPulse{sigma, 0.0});
        CHECK(report.readout_error < prev);
        prev = report.readout_error;
    }
}
