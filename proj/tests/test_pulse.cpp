#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <random>

#include "oracles.hpp"
#include "spinlink/pulse.hpp"

using namespace spinlink;

namespace {

Spectrum gaussian_on_default(double C, double kappa, double ratio, double sigma,
                             double delta = 0.0, int min_points = 1 << 12) {
    const GaussianPulse pulse{sigma, delta};
    const NodeParams node = make_three_level(C, kappa, ratio);
    return spectrum_of(pulse, default_grid_for(pulse, node, min_points));
}

}  // namespace

TEST_CASE("gaussian spectrum: peak value and normalization") {
    const FrequencyGrid grid{-8.0, 8.0, 1 << 12};
    const Spectrum s = spectrum_of(GaussianPulse{1.0, 0.0}, grid);
    CHECK(norm(s) == doctest::Approx(1.0).epsilon(1e-9));
    // peak at omega = 0: (pi)^(-1/4)
    double peak = 0.0;
    for (const auto& v : s.values) peak = std::max(peak, std::abs(v));
    CHECK(peak == doctest::Approx(std::pow(std::acos(-1.0), -0.25)).epsilon(1e-4));
}

TEST_CASE("gaussian spectrum requires 8-sigma coverage") {
    CHECK_THROWS_AS(spectrum_of(GaussianPulse{1.0, 0.0}, FrequencyGrid{-4.0, 4.0, 1 << 12}),
                    GridTooNarrow);
}

TEST_CASE("sampled spectra must be normalized") {
    const FrequencyGrid grid{-8.0, 8.0, 1 << 12};
    Spectrum s = spectrum_of(GaussianPulse{1.0, 0.0}, grid);
    for (auto& v : s.values) v *= 0.9;
    CHECK_THROWS_AS(spectrum_of(PulseSpec{s}, grid), NotNormalized);
}

TEST_CASE("overlap_integral: unit weight returns the norm") {
    const Spectrum s = gaussian_on_default(2.0, 5.0, 0.75, 0.5);
    std::vector<double> weight(s.values.size(), 1.0);
    CHECK(overlap_integral(s, weight) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("overlap_integral: narrow-pulse limit reaches the resonant peak") {
    const Spectrum s = gaussian_on_default(1.0, 1e4, 1.0, 0.01);
    const NodeParams node = make_three_level(1.0, 1e4, 1.0);
    const auto evals = transfer_on_grid(node, s.grid.omegas());
    std::vector<double> weight(evals.size());
    for (std::size_t i = 0; i < evals.size(); ++i) weight[i] = std::norm(evals[i].r_minus);
    CHECK(overlap_integral(s, weight) == doctest::Approx(0.25).epsilon(1e-3));
}

TEST_CASE("overlap_integral: frozen Simpson oracle value at C=2, kappa_opt, sigma=0.5") {
    const Spectrum s = gaussian_on_default(2.0, 5.0, 0.75, 0.5);
    const NodeParams node = make_three_level(2.0, 5.0, 0.75);
    const auto evals = transfer_on_grid(node, s.grid.omegas());
    std::vector<double> weight(evals.size());
    for (std::size_t i = 0; i < evals.size(); ++i) weight[i] = std::norm(evals[i].r_minus);
    // 10^6-interval Simpson of |r_-|^2 |u|^2 (oracles.cpp)
    CHECK(overlap_integral(s, weight) == doctest::Approx(0.24158218323914).epsilon(1e-9));
}

TEST_CASE("overlap_integral rejects mismatched weights") {
    const Spectrum s = gaussian_on_default(2.0, 5.0, 0.75, 0.5);
    std::vector<double> weight(s.values.size() - 1, 1.0);
    CHECK_THROWS_AS(overlap_integral(s, weight), GridMismatch);
}

TEST_CASE("decompose_modes: perfect phase encoding collapses to one mode") {
    const FrequencyGrid grid{-8.0, 8.0, 1 << 12};
    const Spectrum u = spectrum_of(GaussianPulse{1.0, 0.0}, grid);
    // synthetic r0 = -r1 = e^{i theta}
    const std::complex<double> phase = std::polar(1.0, 0.7);
    std::vector<TransferEval> evals(u.values.size());
    for (std::size_t i = 0; i < evals.size(); ++i) {
        evals[i].omega = u.grid.omega(static_cast<int>(i));
        evals[i].r0 = phase;
        evals[i].r1 = -phase;
        evals[i].r_plus = 0.0;
        evals[i].r_minus = phase;
    }
    const ModeDecomposition dec = decompose_modes(u, evals);
    CHECK(std::abs(dec.alpha_v0_minus) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(std::abs(dec.alpha_v0_plus) < 1e-12);
    CHECK(std::abs(dec.alpha_v1_plus) < 1e-12);
    CHECK(!dec.v1.has_value());
    // v0 = e^{i theta} u up to the real-positive-amplitude convention
    std::complex<double> overlap = inner_product(dec.v0, u);
    CHECK(std::abs(overlap) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("decompose_modes: ideal intensity encoding gives equal plus/minus amplitudes") {
    const FrequencyGrid grid{-8.0, 8.0, 1 << 12};
    const Spectrum u = spectrum_of(GaussianPulse{1.0, 0.0}, grid);
    const NodeParams node = make_three_level(2.0, 5.0, 0.75);
    std::vector<TransferEval> evals = transfer_on_grid(node, u.grid.omegas());
    for (auto& ev : evals) {
        ev.r1 = 0.0;  // force r1 = 0: r_+ = r_- = r0/2
        ev.r_plus = 0.5 * ev.r0;
        ev.r_minus = 0.5 * ev.r0;
    }
    const ModeDecomposition dec = decompose_modes(u, evals);
    CHECK(std::abs(dec.alpha_v1_plus) < 1e-12);
    CHECK(std::abs(dec.alpha_v0_plus - dec.alpha_v0_minus) < 1e-9);
}

TEST_CASE("decompose_modes: frozen refined-Gram-Schmidt amplitudes") {
    const Spectrum u = gaussian_on_default(2.0, 5.0, 0.75, 0.5);
    const NodeParams node = make_three_level(2.0, 5.0, 0.75);
    const auto evals = transfer_on_grid(node, u.grid.omegas());
    const ModeDecomposition dec = decompose_modes(u, evals);
    // Simpson Gram-Schmidt at 8*10^5 intervals (oracles.cpp)
    CHECK(dec.alpha_v0_minus.real() == doctest::Approx(0.491510104921).epsilon(1e-9));
    CHECK(dec.alpha_v0_minus.imag() == doctest::Approx(0.0));
    CHECK(dec.alpha_v0_plus.real() == doctest::Approx(-0.021342337853).epsilon(1e-7));
    CHECK(std::abs(dec.alpha_v0_plus.imag()) < 1e-12);
    CHECK(dec.alpha_v1_plus.real() == doctest::Approx(0.034082861589).epsilon(1e-7));

    // cross-check against the library-independent oracle at runtime
    const auto o = oracle::refined_gram_schmidt(2.0, 5.0, 3.75, 1.0, 0.0, 0.5, 0.0, 200000);
    CHECK(dec.alpha_v0_minus.real() == doctest::Approx(o.alpha_v0_minus).epsilon(1e-9));
}

TEST_CASE("decompose_modes: degenerate antisymmetric input throws") {
    const FrequencyGrid grid{-8.0, 8.0, 1 << 12};
    const Spectrum u = spectrum_of(GaussianPulse{1.0, 0.0}, grid);
    std::vector<TransferEval> evals(u.values.size());
    for (std::size_t i = 0; i < evals.size(); ++i) {
        evals[i].r0 = evals[i].r1 = 0.8;
        evals[i].r_plus = 0.8;
        evals[i].r_minus = 0.0;
    }
    CHECK_THROWS_AS(decompose_modes(u, evals), DegenerateAntisymmetric);
}

TEST_CASE("decompose_modes: orthonormality and reconstruction for random nodes") {
    std::mt19937_64 rng(77001);
    int with_v1 = 0;
    for (int draw = 0; draw < 120; ++draw) {
        const double C = oracle::uniform(rng(), 0.2, 6.0);
        const double kappa = oracle::uniform(rng(), 1.0, 20.0);
        const double ratio = oracle::uniform(rng(), 0.3, 1.0);
        const double delta = oracle::uniform(rng(), -1.0, 1.0);
        const double sigma = oracle::uniform(rng(), 0.1, 2.0);
        const NodeParams node = make_three_level(C, kappa, ratio, 1.0, delta);
        const GaussianPulse pulse{sigma, 0.0};
        const Spectrum u = spectrum_of(pulse, default_grid_for(pulse, node, 1 << 12));
        const auto evals = transfer_on_grid(node, u.grid.omegas());
        const ModeDecomposition dec = decompose_modes(u, evals);

        CHECK(norm(dec.v0) == doctest::Approx(1.0).epsilon(1e-9));
        if (dec.v1) {
            ++with_v1;
            CHECK(norm(*dec.v1) == doctest::Approx(1.0).epsilon(1e-9));
            CHECK(std::abs(inner_product(dec.v0, *dec.v1)) < 1e-9);
        }
        // amplitude bounds from |r_pm| <= 1
        CHECK(std::norm(dec.alpha_v0_minus) <= 1.0 + 1e-9);
        CHECK(std::norm(dec.alpha_v0_plus) + std::norm(dec.alpha_v1_plus) <= 1.0 + 1e-9);

        // reconstruction: alpha_v0^pm v0 + alpha_v1^pm v1 = r_pm u
        double worst = 0.0;
        for (std::size_t i = 0; i < u.values.size(); ++i) {
            std::complex<double> plus = dec.alpha_v0_plus * dec.v0.values[i];
            if (dec.v1) plus += dec.alpha_v1_plus * dec.v1->values[i];
            const std::complex<double> minus = dec.alpha_v0_minus * dec.v0.values[i];
            worst = std::max(worst,
                             std::abs(plus - evals[i].r_plus * u.values[i]));
            worst = std::max(worst,
                             std::abs(minus - evals[i].r_minus * u.values[i]));
        }
        CHECK(worst < 1e-9);
    }
    CHECK(with_v1 > 60);  // generic nodes need the second mode
}

TEST_CASE("quadratures converge under grid halving") {
    const NodeParams node = make_three_level(2.0, 5.0, 0.75);
    const GaussianPulse pulse{0.5, 0.0};
    double prev = 0.0;
    for (int pass = 0; pass < 2; ++pass) {
        const int n = pass == 0 ? (1 << 12) : (1 << 13);
        const Spectrum u = spectrum_of(pulse, default_grid_for(pulse, node, n));
        const auto evals = transfer_on_grid(node, u.grid.omegas());
        std::vector<double> weight(evals.size());
        for (std::size_t i = 0; i < evals.size(); ++i) {
            weight[i] = std::norm(evals[i].r_minus);
        }
        const double v = overlap_integral(u, weight);
        if (pass == 1) CHECK(std::abs(v - prev) < 1e-6);
        prev = v;
    }
}

TEST_CASE("default grid covers the spec window and stays resolved for narrow pulses") {
    const GaussianPulse pulse{0.01, 0.3};
    const FrequencyGrid grid = default_grid(pulse, 3.0);
    CHECK(grid.omega_min <= 0.3 - 8.0 * 0.01 - 15.0 + 1e-12);
    CHECK(grid.omega_max >= 0.3 + 8.0 * 0.01 + 15.0 - 1e-12);
    CHECK(grid.step() < 0.01 / 20.0);  // >= ~24 samples per sigma
}

TEST_CASE("spectrum CSV round trip") {
    const FrequencyGrid grid{-8.0, 8.0, 1 << 11};
    Spectrum s{grid, std::vector<std::complex<double>>(static_cast<std::size_t>(grid.points))};
    for (int i = 0; i < grid.points; ++i) {
        const double w = grid.omega(i);
        s.values[static_cast<std::size_t>(i)] =
            std::polar(std::exp(-0.5 * w * w), 0.3 * w);
    }
    const double n = norm(s);
    for (auto& v : s.values) v /= n;

    const auto path = std::filesystem::temp_directory_path() / "spinlink_spec.csv";
    save_spectrum_csv(path.string(), s);
    const Spectrum back = load_spectrum_csv(path.string());
    REQUIRE(back.values.size() == s.values.size());
    double worst = 0.0;
    for (std::size_t i = 0; i < s.values.size(); ++i) {
        worst = std::max(worst, std::abs(back.values[i] - s.values[i]));
    }
    CHECK(worst < 1e-15);
    CHECK(back.grid.same_as(s.grid));
    std::filesystem::remove(path);
}

TEST_CASE("spectrum CSV loader rejects malformed input") {
    namespace fs = std::filesystem;
    const auto dir = fs::temp_directory_path();
    {
        const auto path = dir / "spinlink_bad_header.csv";
        std::FILE* f = std::fopen(path.string().c_str(), "w");
        std::fputs("w,re,im\n0,1,0\n1,1,0\n", f);
        std::fclose(f);
        CHECK_THROWS_AS(load_spectrum_csv(path.string()), ConfigError);
        fs::remove(path);
    }
    {
        const auto path = dir / "spinlink_nonuniform.csv";
        std::FILE* f = std::fopen(path.string().c_str(), "w");
        std::fputs("omega,re,im\n0,1,0\n1,1,0\n2.5,1,0\n", f);
        std::fclose(f);
        CHECK_THROWS_AS(load_spectrum_csv(path.string()), GridMismatch);
        fs::remove(path);
    }
}
