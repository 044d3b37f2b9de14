#include <doctest.h>

#include <cmath>

#include "spinlink/model.hpp"

using namespace spinlink;

TEST_CASE("validate_node accepts a simple three-level node and derives kappa, C") {
    NodeParams node;
    node.kappa1 = 1.0;
    node.kappa2 = 0.0;
    node.transitions[0] = {1.0, 1.0, 0.0};
    node.transitions[1] = {0.0, 1.0, 0.0};
    const NodeParams v = validate_node(node);
    CHECK(v.kappa() == doctest::Approx(1.0));
    CHECK(v.cooperativity(0) == doctest::Approx(4.0));
    CHECK(v.three_level());
}

TEST_CASE("validate_node rejects non-physical parameters by field") {
    NodeParams node;
    node.kappa1 = 0.0;
    node.transitions[0] = {1.0, 1.0, 0.0};
    CHECK_THROWS_AS(validate_node(node), NonPhysicalParameter);
    try {
        validate_node(node);
    } catch (const NonPhysicalParameter& e) {
        CHECK(e.field == "kappa1");
    }

    node.kappa1 = 1.0;
    node.transitions[0].gamma = 0.0;
    try {
        validate_node(node);
        FAIL("expected NonPhysicalParameter");
    } catch (const NonPhysicalParameter& e) {
        CHECK(e.field == "gamma0");
    }

    node.transitions[0].gamma = 1.0;
    node.transitions[1].g = -0.5;
    try {
        validate_node(node);
        FAIL("expected NonPhysicalParameter");
    } catch (const NonPhysicalParameter& e) {
        CHECK(e.field == "g1");
    }
}

TEST_CASE("two-sided cavity cooperativity") {
    NodeParams node;
    node.kappa1 = 1.0;
    node.kappa2 = 1.0;
    node.transitions[0] = {std::sqrt(0.5), 1.0, 0.0};
    node.transitions[1] = {0.0, 1.0, 0.0};
    const NodeParams v = validate_node(node);
    CHECK(v.kappa() == doctest::Approx(2.0));
    CHECK(v.cooperativity(0) == doctest::Approx(1.0));
}

TEST_CASE("kappa and cooperativity identities hold exactly") {
    for (int i = 0; i < 50; ++i) {
        NodeParams node;
        node.kappa1 = 0.1 + 0.3 * i;
        node.kappa2 = 0.05 * i;
        node.transitions[0] = {0.2 + 0.1 * i, 0.5 + 0.02 * i, -1.0 + 0.07 * i};
        node.transitions[1] = {0.1 * (i % 5), 1.0, 0.3};
        validate_node(node);
        CHECK(node.kappa() == node.kappa1 + node.kappa2);
        for (int k = 0; k < 2; ++k) {
            const auto& t = node.transitions[k];
            CHECK(node.cooperativity(k) ==
                  doctest::Approx(4.0 * t.g * t.g / (node.kappa() * t.gamma))
                      .epsilon(1e-15));
        }
    }
}

TEST_CASE("expand_four_level splits the detunings symmetrically") {
    FourLevelConfig cfg;
    cfg.kappa1 = 2.0;
    cfg.kappa2 = 0.5;
    cfg.g = 1.0;
    cfg.gamma = 1.0;

    SUBCASE("zeta = 10, delta = 0") {
        cfg.zeta = 10.0;
        cfg.delta = 0.0;
        const NodeParams node = expand_four_level(cfg);
        CHECK(node.transitions[0].delta == doctest::Approx(-5.0));
        CHECK(node.transitions[1].delta == doctest::Approx(5.0));
    }
    SUBCASE("zeta = 0 degenerates to identical transitions") {
        cfg.zeta = 0.0;
        cfg.delta = 2.0;
        const NodeParams node = expand_four_level(cfg);
        CHECK(node.transitions[0].delta == doctest::Approx(2.0));
        CHECK(node.transitions[1].delta == doctest::Approx(2.0));
        CHECK(node.transitions[0].g == node.transitions[1].g);
        CHECK(node.transitions[0].gamma == node.transitions[1].gamma);
    }
    SUBCASE("zeta = 10, delta = 3") {
        cfg.zeta = 10.0;
        cfg.delta = 3.0;
        const NodeParams node = expand_four_level(cfg);
        CHECK(node.transitions[0].delta == doctest::Approx(-2.0));
        CHECK(node.transitions[1].delta == doctest::Approx(8.0));
    }
}

TEST_CASE("apply_deviation re-derives g from the deviated C, kappa, gamma") {
    const NodeParams ref = make_three_level(2.0, 5.0, 0.75);
    NodeDeviation dev;
    dev.eps_C = 0.2;
    dev.eps_kappa = 0.1;
    dev.eps_kappa1 = 0.05;
    dev.eps_gamma = -0.02;
    dev.delta_A = 0.01;
    dev.delta_B = -0.03;
    const NodePair pair = apply_deviation(ref, dev);

    CHECK(pair.a.transitions[0].delta == doctest::Approx(0.01));
    CHECK(pair.b.cooperativity(0) == doctest::Approx(2.2).epsilon(1e-12));
    CHECK(pair.b.kappa() == doctest::Approx(5.1));
    CHECK(pair.b.kappa1 == doctest::Approx(3.8));
    CHECK(pair.b.transitions[0].gamma == doctest::Approx(0.98));
    CHECK(pair.b.transitions[0].delta == doctest::Approx(-0.03));
}

TEST_CASE("apply_deviation requires a three-level reference") {
    FourLevelConfig cfg;
    cfg.kappa1 = 2.0;
    cfg.g = 0.8;
    cfg.zeta = 4.0;
    CHECK_THROWS_AS(apply_deviation(expand_four_level(cfg), NodeDeviation{}),
                    PreconditionViolated);
}

TEST_CASE("setup validation") {
    CHECK_THROWS_AS(validate_setup(SetupParams{0.0, 0.0}), NonPhysicalParameter);
    CHECK_THROWS_AS(validate_setup(SetupParams{1.5, 0.0}), NonPhysicalParameter);
    CHECK_NOTHROW(validate_setup(SetupParams{0.3, 0.7}));
}
