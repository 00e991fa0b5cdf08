#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <random>

#include "ilwlab/field.hpp"
#include "ilwlab/grid.hpp"
#include "ilwlab/math_util.hpp"
#include "ilwlab/projectors.hpp"
#include "ilwlab/rng.hpp"
#include "ilwlab/symbols.hpp"

using namespace ilwlab;

namespace {

// Independent coth oracle: Lambert's continued fraction for tanh,
// tanh(x) = x / (1 + x^2 / (3 + x^2 / (5 + ...))), evaluated bottom-up.
double coth_oracle(double x) {
    const double x2 = x * x;
    double f = 2 * 40 + 1; // deep enough for double precision at |x| <= 10
    for (int k = 39; k >= 0; --k) f = (2 * k + 1) + x2 / f;
    // f = 1 + x^2/(3 + ...) after the loop ends at k = 0.
    return f / x;
}

} // namespace

TEST_CASE("coth oracle sanity") {
    // Frozen digits cross-check the oracle itself.
    CHECK(coth_oracle(1.0) == Catch::Approx(1.3130352854993312).epsilon(1e-14));
    CHECK(coth_oracle(1.0) - 1.0 == Catch::Approx(0.3130352854993312).epsilon(1e-12));
}

TEST_CASE("make_grid contract") {
    Grid g = make_grid(64, kTwoPi);
    CHECK(g.spacing() == Catch::Approx(kTwoPi / 64));
    CHECK(g.lattice_min() == -32);
    CHECK(g.lattice_max() == 31);

    CHECK_THROWS_AS(make_grid(63, kTwoPi), ConfigError);
    CHECK_THROWS_AS(make_grid(6, kTwoPi), ConfigError);
    CHECK_THROWS_AS(make_grid(64, -1.0), ConfigError);

    Grid h = make_grid(8, 2 * kTwoPi);
    CHECK(h.freq_unit() == Catch::Approx(0.5));
    CHECK(h.freq(h.slot(-4)) == Catch::Approx(-2.0));
    CHECK(h.freq(h.slot(3)) == Catch::Approx(1.5));
}

TEST_CASE("transform examples and roundtrip") {
    Grid g = make_grid(64);

    SECTION("cos x") {
        std::vector<double> samples(g.n_modes);
        for (int j = 0; j < g.n_modes; ++j) samples[j] = std::cos(g.x(j));
        SpectralField f = transform(samples, g);
        CHECK(f.reality_flag());
        CHECK(std::abs(f.coeff(1) - cplx{0.5, 0.0}) < 1e-12);
        CHECK(std::abs(f.coeff(-1) - cplx{0.5, 0.0}) < 1e-12);
        for (int n = g.lattice_min(); n <= g.lattice_max(); ++n) {
            if (n == 1 || n == -1) continue;
            CHECK(std::abs(f.coeff(n)) < 1e-12);
        }
    }

    SECTION("e^{i3x} is not real-flagged") {
        std::vector<cplx> samples(g.n_modes);
        for (int j = 0; j < g.n_modes; ++j) samples[j] = std::exp(cplx{0.0, 3.0 * g.x(j)});
        SpectralField f = transform(samples, g);
        CHECK_FALSE(f.reality_flag());
        CHECK(std::abs(f.coeff(3) - cplx{1.0, 0.0}) < 1e-12);
    }

    SECTION("roundtrip on random real samples, 100 trials") {
        auto rng = make_rng(7);
        std::normal_distribution<double> gauss;
        for (int trial = 0; trial < 100; ++trial) {
            std::vector<double> samples(g.n_modes);
            double scale = 0.0;
            for (auto& s : samples) {
                s = gauss(rng);
                scale = std::max(scale, std::abs(s));
            }
            SpectralField f = transform(samples, g);
            CHECK(is_hermitian(f));
            auto back = inverse_transform(f);
            for (int j = 0; j < g.n_modes; ++j)
                REQUIRE(std::abs(back[j] - samples[j]) <= 1e-12 * std::max(1.0, scale));
        }
    }

    SECTION("length mismatch") {
        std::vector<double> bad(17, 0.0);
        CHECK_THROWS_AS(transform(bad, g), ShapeError);
    }
}

TEST_CASE("make_symbol values") {
    Grid g = make_grid(64);

    SECTION("t_delta at n=1 matches the coth oracle") {
        auto sym = make_symbol(MultiplierSpec::t_delta(1.0), g);
        CHECK(std::abs(sym[1] - cplx{0.0, -coth_oracle(1.0)}) < 1e-12);
        CHECK(std::abs(sym[1] - cplx{0.0, -1.3130352855}) < 1e-9);
        CHECK(sym[0] == cplx{0.0, 0.0});
    }

    SECTION("g_delta vanishes at n=0") {
        for (double delta : {0.3, 1.0, 17.0}) {
            auto sym = make_symbol(MultiplierSpec::g_delta(delta), g);
            CHECK(sym[0] == cplx{0.0, 0.0});
        }
    }

    SECTION("q_delta at n=1 matches the coth oracle") {
        auto sym = make_symbol(MultiplierSpec::q_delta(1.0), g);
        CHECK(std::abs(sym[1] - cplx{0.0, -(coth_oracle(1.0) - 1.0)}) < 1e-12);
        CHECK(std::abs(sym[1] - cplx{0.0, -0.3130352855}) < 1e-9);
    }

    SECTION("q_effective is continuous at 0 with value 1/delta") {
        for (double delta : {0.5, 1.0, 4.0}) {
            auto sym = make_symbol(MultiplierSpec::q_effective(delta), g);
            CHECK(sym[0] == cplx{1.0 / delta, 0.0});
            // Continuity: compare against a small-frequency grid.
            Grid wide = make_grid(64, 1000.0 * kTwoPi); // frequencies 1e-3 apart
            auto fine = make_symbol(MultiplierSpec::q_effective(delta), wide);
            CHECK(std::abs(fine[1] - fine[0]) < 5e-3 / delta);
        }
    }

    SECTION("stable kernels agree with independent routes across branches") {
        for (double x : {1e-3, 0.05, 0.2, 1.0, 5.0, 9.0}) {
            CHECK(coth(x) == Catch::Approx(coth_oracle(x)).epsilon(1e-10));
            CHECK(coth_minus_inv(x) ==
                  Catch::Approx(coth_oracle(x) - 1.0 / x).margin(1e-13));
        }
        // coth x = 1 + 2/(e^{2x} - 1) exactly; expm1 keeps this sharp for all x.
        for (double x : {0.5, 3.0, 19.0, 21.0, 40.0}) {
            const double ref = 1.0 + 2.0 / std::expm1(2.0 * x);
            CHECK(coth(x) == Catch::Approx(ref).epsilon(1e-12));
            CHECK(coth_minus_sgn(x) == Catch::Approx(2.0 / std::expm1(2.0 * x)).epsilon(1e-13));
        }
        CHECK(coth(-1.0) == Catch::Approx(-coth_oracle(1.0)).epsilon(1e-12));
    }

    SECTION("delta <= 0 rejected") {
        CHECK_THROWS_AS(MultiplierSpec::t_delta(0.0), ConfigError);
        CHECK_THROWS_AS(MultiplierSpec::q_delta(-1.0), ConfigError);
    }
}

TEST_CASE("apply_symbol examples") {
    Grid g = make_grid(64);
    std::vector<double> samples(g.n_modes);
    for (int j = 0; j < g.n_modes; ++j) samples[j] = std::cos(g.x(j));
    SpectralField f = transform(samples, g);

    SECTION("Hilbert transform of cos is sin") {
        SpectralField h = apply_symbol(f, MultiplierSpec::hilbert());
        auto z = inverse_transform(h);
        for (int j = 0; j < g.n_modes; ++j)
            CHECK(std::abs(z[j] - cplx{std::sin(g.x(j)), 0.0}) < 1e-12);
        CHECK(h.reality_flag());
    }

    SECTION("t_delta on a single exponential") {
        SpectralField e(g, false);
        e.set_coeff(1, cplx{1.0, 0.0});
        SpectralField out = apply_symbol(e, MultiplierSpec::t_delta(1.0));
        CHECK(std::abs(out.coeff(1) - cplx{0.0, -coth_oracle(1.0)}) < 1e-12);
    }

    SECTION("J^0 is the identity") {
        SpectralField out = apply_symbol(f, MultiplierSpec::j_s(0.0));
        for (int k = 0; k < g.n_modes; ++k) CHECK(out[k] == f[k]);
    }

    SECTION("grid mismatch") {
        SpectralField other(make_grid(32), true);
        CHECK_THROWS_AS(f.check_same_grid(other), ShapeError);
    }
}

TEST_CASE("reality preservation property") {
    Grid g = make_grid(64);
    auto rng = make_rng(11);
    const std::vector<MultiplierSpec> specs = {
        MultiplierSpec::hilbert(),       MultiplierSpec::t_delta(0.7),
        MultiplierSpec::q_delta(1.3),    MultiplierSpec::g_delta(2.0),
        MultiplierSpec::q_effective(0.9), MultiplierSpec::dx(),
        MultiplierSpec::dx_inv(),        MultiplierSpec::j_s(0.35),
        MultiplierSpec::free_propagator(PropagatorTag::ilw, 0.4, 1.0),
        MultiplierSpec::free_propagator(PropagatorTag::bo, 0.4),
        MultiplierSpec::free_propagator(PropagatorTag::kdv, 0.4),
        MultiplierSpec::free_propagator(PropagatorTag::silw, 0.4, 0.5)};
    for (const auto& spec : specs) {
        REQUIRE(spec.reality_preserving());
        for (int trial = 0; trial < 5; ++trial) {
            SpectralField f = random_real_field(g, rng);
            SpectralField out = apply_symbol(f, spec);
            CHECK(out.reality_flag());
            CHECK(is_hermitian(out, 1e-12));
        }
    }
    CHECK_FALSE(
        MultiplierSpec::free_propagator(PropagatorTag::gauged_free, 0.4, 0.0, 0.3)
            .reality_preserving());
}

TEST_CASE("propagator unitarity at every frequency") {
    Grid g = make_grid(128);
    const std::vector<MultiplierSpec> props = {
        MultiplierSpec::free_propagator(PropagatorTag::ilw, 0.83, 1.7),
        MultiplierSpec::free_propagator(PropagatorTag::bo, 0.83),
        MultiplierSpec::free_propagator(PropagatorTag::kdv, 0.83),
        MultiplierSpec::free_propagator(PropagatorTag::kdv_third, 0.83),
        MultiplierSpec::free_propagator(PropagatorTag::silw, 0.83, 0.25),
        MultiplierSpec::free_propagator(PropagatorTag::gauged_free, 0.83, 0.0, 0.11)};
    for (const auto& spec : props) {
        auto sym = make_symbol(spec, g);
        for (const auto& v : sym) CHECK(std::abs(std::abs(v) - 1.0) < 1e-14);
    }
}

TEST_CASE("q_delta symbol decay in delta") {
    Grid g = make_grid(64);
    for (double delta : {1.0, 2.0, 4.0, 8.0}) {
        auto sym = make_symbol(MultiplierSpec::q_delta(delta), g);
        CHECK(std::abs(sym[1]) <= 3.0 * std::exp(-2.0 * delta));
    }
}

TEST_CASE("projector examples") {
    Grid g = make_grid(64);
    std::vector<double> samples(g.n_modes);
    for (int j = 0; j < g.n_modes; ++j) samples[j] = std::cos(g.x(j));
    SpectralField f = transform(samples, g);

    SECTION("plus keeps the strictly positive half of cos") {
        SpectralField p = project(f, Projector::plus);
        CHECK(std::abs(p.coeff(1) - cplx{0.5, 0.0}) < 1e-12);
        CHECK(std::abs(p.coeff(-1)) == 0.0);
    }

    SECTION("dyadic shell at its plateau") {
        SpectralField e(g, false);
        e.set_coeff(4, cplx{1.0, 0.0});
        SpectralField p = project(e, Projector::dyadic_N, 4);
        CHECK(std::abs(p.coeff(4) - cplx{1.0, 0.0}) < 1e-12);
    }

    SECTION("zero_mode of a mean-zero field") {
        SpectralField z = project(f, Projector::zero_mode);
        for (int k = 0; k < g.n_modes; ++k) CHECK(std::abs(z[k]) < 1e-15);
    }

    SECTION("zero_mode carries the mean") {
        SpectralField c(g, true);
        c.set_coeff(0, cplx{2.5, 0.0});
        c.set_coeff(3, cplx{0.1, 0.0});
        c.set_coeff(-3, cplx{0.1, 0.0});
        SpectralField z = project(c, Projector::zero_mode);
        CHECK(z.mean() == Catch::Approx(2.5));
        CHECK(std::abs(z.coeff(3)) == 0.0);
    }

    SECTION("non-dyadic N rejected") {
        CHECK_THROWS_AS(project(f, Projector::dyadic_N, 3), ConfigError);
        CHECK_THROWS_AS(project(f, Projector::leq_N, 0), ConfigError);
    }
}

TEST_CASE("projector partition telescopes to the identity") {
    Grid g = make_grid(128);
    auto rng = make_rng(23);
    SpectralField f = random_real_field(g, rng);

    SpectralField sum = project(f, Projector::lo);
    for (int N = 2; N <= 64; N *= 2) sum += project(f, Projector::dyadic_N, N);
    // lo + sum of shells equals psi(xi / N_top); N_top = 64 covers |xi| <= 64.
    for (int k = 0; k < g.n_modes; ++k) CHECK(std::abs(sum[k] - f[k]) < 1e-12);
}

TEST_CASE("norms") {
    Grid g = make_grid(64);
    std::vector<double> samples(g.n_modes);
    for (int j = 0; j < g.n_modes; ++j) samples[j] = std::cos(g.x(j));
    SpectralField f = transform(samples, g);

    CHECK(l2_norm(f) == Catch::Approx(std::sqrt(std::numbers::pi)).epsilon(1e-12));
    // ||cos||_{H^1}^2 = 2 pi * sum_{n=+-1} <n>^2 / 4 = 2 pi.
    CHECK(hs_norm(f, 1.0) == Catch::Approx(std::sqrt(kTwoPi)).epsilon(1e-12));
    CHECK(hs_norm(f, 0.0) == Catch::Approx(l2_norm(f)));

    SpectralField zero(g, true);
    CHECK(l2_norm(zero) == 0.0);
    CHECK(linf_norm(zero) == 0.0);
    CHECK(hs_norm(zero, 0.7) == 0.0);

    CHECK(linf_norm(f) == Catch::Approx(1.0).epsilon(1e-12));
    CHECK(lp_norm(f, 2.0) == Catch::Approx(l2_norm(f)).epsilon(1e-12));
}

TEST_CASE("Bernstein ratio with one fitted constant") {
    Grid g = make_grid(512);
    auto rng = make_rng(31);
    double fitted_c = 0.0;
    for (int N = 2; N <= 128; N *= 2) {
        for (int trial = 0; trial < 10; ++trial) {
            SpectralField f = random_real_field(g, rng);
            SpectralField p = project(f, Projector::dyadic_N, N);
            const double l2 = l2_norm(p);
            if (l2 == 0.0) continue;
            fitted_c = std::max(fitted_c, linf_norm(p) / (l2 * std::sqrt(double(N))));
        }
    }
    CHECK(fitted_c <= 1.0);
    CHECK(fitted_c > 0.0);
}
