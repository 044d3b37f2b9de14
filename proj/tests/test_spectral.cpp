#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "spinlink/optimize.hpp"
#include "spinlink/spectral.hpp"

using namespace spinlink;

TEST_CASE("reflection: resonant values") {
    SUBCASE("C=1, one-sided cavity reflects nothing for the coupled state") {
        const NodeParams node = make_three_level(1.0, 1.0, 1.0);
        CHECK(std::abs(reflection(node, 0, 0.0)) < 1e-14);
    }
    SUBCASE("empty one-sided cavity reflects with a pi phase") {
        const NodeParams node = make_three_level(0.0, 1.0, 1.0);
        CHECK(reflection(node, 0, 0.0).real() == doctest::Approx(-1.0));
        CHECK(std::abs(reflection(node, 0, 0.0).imag()) < 1e-14);
    }
    SUBCASE("critically coupled empty cavity reflects nothing on resonance") {
        const NodeParams node = make_three_level(0.0, 2.0, 0.5);
        CHECK(std::abs(reflection(node, 0, 0.0)) < 1e-14);
    }
}

TEST_CASE("transfer_pair: resonant phase-encoded three-level values") {
    const NodeParams node = make_three_level(2.0, 4.0, 0.75);
    const TransferEval ev = transfer_pair(node, 0.0);
    CHECK(std::abs(ev.r_plus) < 1e-14);
    CHECK(ev.r_minus.real() == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(std::abs(ev.r_minus.imag()) < 1e-14);
}

TEST_CASE("transfer_pair: identical transitions null the antisymmetric part") {
    FourLevelConfig cfg;
    cfg.kappa1 = 1.5;
    cfg.kappa2 = 0.5;
    cfg.g = 0.9;
    cfg.gamma = 1.2;
    cfg.zeta = 0.0;
    cfg.delta = 0.4;
    const NodeParams node = expand_four_level(cfg);
    for (double w : {-3.0, -0.5, 0.0, 1.0, 8.0}) {
        CHECK(std::abs(transfer_pair(node, w).r_minus) < 1e-15);
    }
}

TEST_CASE("transfer_pair agrees with the explicit three-level closed forms") {
    for (double C : {0.3, 1.0, 2.0, 7.5}) {
        for (double ratio : {0.5, 0.75, 1.0}) {
            const NodeParams node = make_three_level(C, 6.0, ratio, 1.3, 0.2);
            for (int i = 0; i <= 400; ++i) {
                const double w = -20.0 + 40.0 * i / 400.0;
                const TransferEval ev = transfer_pair(node, w);
                const auto rm = oracle::r_minus_three_level(C, 6.0, ratio * 6.0, 1.3, 0.2, w);
                const auto rp = oracle::r_plus_three_level(C, 6.0, ratio * 6.0, 1.3, 0.2, w);
                CHECK(std::abs(ev.r_minus - rm) <= 1e-12 * std::max(1.0, std::abs(rm)));
                CHECK(std::abs(ev.r_plus - rp) <= 1e-12 * std::max(1.0, std::abs(rp)));
            }
        }
    }
}

TEST_CASE("reflection agrees with the unreduced algebraic route") {
    std::mt19937_64 rng(31415);
    for (int draw = 0; draw < 40; ++draw) {
        NodeParams node;
        node.kappa1 = oracle::uniform(rng(), 0.05, 8.0);
        node.kappa2 = oracle::uniform(rng(), 0.0, 4.0);
        for (int k = 0; k < 2; ++k) {
            node.transitions[static_cast<std::size_t>(k)] = {
                oracle::uniform(rng(), 0.0, 4.0), oracle::uniform(rng(), 0.05, 4.0),
                oracle::uniform(rng(), -12.0, 12.0)};
        }
        validate_node(node);
        for (int i = 0; i <= 200; ++i) {
            const double w = -30.0 + 60.0 * i / 200.0;
            for (int k = 0; k < 2; ++k) {
                const auto& t = node.transitions[static_cast<std::size_t>(k)];
                const auto expected = oracle::reflection_unreduced(
                    node.kappa1, node.kappa2, t.g, t.gamma, t.delta, w);
                CHECK(std::abs(reflection(node, k, w) - expected) < 1e-13);
            }
        }
    }
}

TEST_CASE("|r_k| <= 1 on a dense grid for random physical nodes") {
    std::mt19937_64 rng(20240901);
    for (int draw = 0; draw < 25; ++draw) {
        NodeParams node;
        node.kappa1 = oracle::uniform(rng(), 0.05, 8.0);
        node.kappa2 = oracle::uniform(rng(), 0.0, 4.0);
        for (int k = 0; k < 2; ++k) {
            node.transitions[k] = {oracle::uniform(rng(), 0.0, 4.0),
                                   oracle::uniform(rng(), 0.05, 4.0),
                                   oracle::uniform(rng(), -15.0, 15.0)};
        }
        validate_node(node);
        for (int i = 0; i < 10000; ++i) {
            const double w = -100.0 + 200.0 * i / 9999.0;
            const TransferEval ev = transfer_pair(node, w);
            CHECK(std::abs(ev.r0) <= 1.0 + 1e-12);
            CHECK(std::abs(ev.r1) <= 1.0 + 1e-12);
            CHECK(std::abs(ev.r_plus) <= 1.0 + 1e-12);
            CHECK(std::abs(ev.r_minus) <= 1.0 + 1e-12);
        }
    }
}

TEST_CASE("lossless empty cavity is unitary") {
    NodeParams node;
    node.kappa1 = 2.3;
    node.kappa2 = 0.0;
    node.transitions[0] = {0.0, 1.0, 0.0};
    node.transitions[1] = {0.0, 1.0, 0.0};
    for (int i = 0; i <= 2000; ++i) {
        const double w = -50.0 + 100.0 * i / 2000.0;
        CHECK(std::abs(std::abs(reflection(node, 0, w)) - 1.0) < 1e-12);
    }
}

TEST_CASE("r_minus vanishes pointwise as C -> 0") {
    double prev = 1.0;
    for (double C : {1e-1, 1e-2, 1e-3, 1e-4}) {
        const NodeParams node = make_three_level(C, 3.0, 1.0);
        const double peak = std::abs(transfer_pair(node, 0.0).r_minus);
        CHECK(peak < prev);
        prev = peak;
        CHECK(peak <= C);  // |r_-(0)| = C/(C+1) <= C
    }
}

TEST_CASE("resonant peak formula") {
    SUBCASE("C=1 one-sided") {
        const NodeParams node = make_three_level(1.0, 7.0, 1.0);
        CHECK(resonant_peak(node) == doctest::Approx(0.25).epsilon(1e-14));
        CHECK(std::norm(transfer_pair(node, 0.0).r_minus) ==
              doctest::Approx(resonant_peak(node)).epsilon(1e-12));
    }
    SUBCASE("large C asymptote") {
        const NodeParams node = make_three_level(1e6, 10.0, 1.0);
        CHECK(resonant_peak(node) == doctest::Approx(1.0 - 2e-6).epsilon(1e-9));
    }
    SUBCASE("half-ratio") {
        const NodeParams node = make_three_level(1.0, 7.0, 0.5);
        CHECK(resonant_peak(node) == doctest::Approx(1.0 / 16.0).epsilon(1e-14));
    }
    SUBCASE("numerical agreement across C") {
        for (double C : {0.5, 1.0, 2.0, 10.0}) {
            const NodeParams node = make_three_level(C, 9.0, 0.8);
            const double numeric = std::norm(transfer_pair(node, 0.0).r_minus);
            CHECK(std::abs(numeric - resonant_peak(node)) <= 1e-12 * resonant_peak(node));
        }
    }
    SUBCASE("preconditions") {
        NodeParams node = make_three_level(1.0, 2.0, 1.0);
        node.transitions[1].g = 0.3;
        CHECK_THROWS_AS(resonant_peak(node), PreconditionViolated);
        const NodeParams detuned = make_three_level(1.0, 2.0, 1.0, 1.0, 0.5);
        CHECK_THROWS_AS(resonant_peak(detuned), PreconditionViolated);
    }
}

TEST_CASE("d2_modsq: frozen oracle value at C=2, kappa=10") {
    // exact closed form: -112/405 (see oracles.cpp)
    const NodeParams node = make_three_level(2.0, 10.0, 1.0);
    const double expected = -112.0 / 405.0;
    CHECK(oracle::d2_rminus_sq_resonant(2.0, 10.0, 10.0, 1.0) ==
          doctest::Approx(expected).epsilon(1e-14));
    CHECK(d2_modsq(node, TransferComponent::r_minus, 0.0) ==
          doctest::Approx(expected).epsilon(1e-6));
    auto modsq = [&](double w) { return std::norm(transfer_pair(node, w).r_minus); };
    CHECK(oracle::richardson_d2(modsq, 0.0, 1e-3) ==
          doctest::Approx(expected).epsilon(1e-9));
}

TEST_CASE("d2_modsq: empty one-sided cavity has flat unit modulus") {
    // |r| = 1 identically; the FD value sits at the round-off floor eps/h^2
    const NodeParams node = make_three_level(0.0, 3.0, 1.0);
    CHECK(std::abs(d2_modsq(node, TransferComponent::r0, 0.0)) < 1e-6);
}

TEST_CASE("d2_modsq: step floor") {
    const NodeParams node = make_three_level(1.0, 5.0, 1.0);
    CHECK_THROWS_AS(d2_modsq(node, TransferComponent::r_minus, 0.0, 1e-15),
                    StepTooSmall);
}

TEST_CASE("kappa_opt minimizes curvature magnitude; with the phase ratio the "
          "r_+ minimum is flat") {
    for (double C : {1.0, 2.0, 5.0}) {
        const double kopt = optimal_kappa(C);
        const double ratio = phase_encoding_ratio(C);
        const NodeParams at = make_three_level(C, kopt, ratio);
        const double center = std::abs(d2_modsq(at, TransferComponent::r_minus, 0.0));
        for (double mult : {0.7, 0.9, 1.1, 1.4}) {
            const NodeParams off = make_three_level(C, mult * kopt, ratio);
            CHECK(std::abs(d2_modsq(off, TransferComponent::r_minus, 0.0)) > center);
        }
        // r_+ has an exact root with vanishing curvature at the joint optimum
        CHECK(std::abs(transfer_pair(at, 0.0).r_plus) < 1e-12);
        CHECK(std::abs(d2_modsq(at, TransferComponent::r_plus, 0.0)) < 1e-6);
    }
}

TEST_CASE("Purcell-broadened Lorentzian width of |r_-|^2 in the broad-cavity limit") {
    for (double C : {1.0, 2.0}) {
        const double kappa = 1000.0 * (C + 1.0);
        const NodeParams node = make_three_level(C, kappa, 1.0);
        const double peak = std::norm(transfer_pair(node, 0.0).r_minus);
        // scan for the half-maximum crossing
        double fwhm = 0.0;
        const double w_hi = 5.0 * (C + 1.0);
        double prev_w = 0.0, prev_v = peak;
        for (int i = 1; i <= 20000; ++i) {
            const double w = w_hi * i / 20000.0;
            const double v = std::norm(transfer_pair(node, w).r_minus);
            if (v <= peak / 2.0) {
                const double frac = (peak / 2.0 - prev_v) / (v - prev_v);
                fwhm = 2.0 * (prev_w + frac * (w - prev_w));
                break;
            }
            prev_w = w;
            prev_v = v;
        }
        CHECK(fwhm == doctest::Approx((C + 1.0)).epsilon(0.02));
    }
}
