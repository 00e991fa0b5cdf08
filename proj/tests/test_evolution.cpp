#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <random>

#include "ilwlab/evolution.hpp"
#include "ilwlab/rng.hpp"
#include "ilwlab/symbols.hpp"

using namespace ilwlab;

namespace {

double coth_oracle(double x) {
    const double x2 = x * x;
    double f = 2 * 40 + 1;
    for (int k = 39; k >= 0; --k) f = (2 * k + 1) + x2 / f;
    return f / x;
}

SpectralField cosine(const Grid& g, double amplitude = 1.0) {
    SpectralField f(g, true);
    f.set_coeff(1, cplx{0.5 * amplitude, 0.0});
    f.set_coeff(-1, cplx{0.5 * amplitude, 0.0});
    return f;
}

EvolutionConfig basic_config(Equation eq, double delta, double dt, double T, const Grid& g) {
    EvolutionConfig c;
    c.equation = eq;
    c.delta = delta;
    c.dt = dt;
    c.t_final = T;
    c.grid = g;
    return c;
}

double sup_l2_difference(const Trajectory& a, const Trajectory& b) {
    REQUIRE(a.states.size() == b.states.size());
    double sup = 0.0;
    for (size_t k = 0; k < a.states.size(); ++k)
        sup = std::max(sup, l2_norm(a.states[k] - b.states[k]));
    return sup;
}

} // namespace

TEST_CASE("linear ILW run follows the exact phase") {
    Grid g = make_grid(64);
    SpectralField u0 = cosine(g);
    Trajectory traj = evolve(u0, basic_config(Equation::ilw_linear, 1.0, 1e-3, 1.0, g));

    const double omega = coth_oracle(1.0) - 1.0; // xi^2 (coth(delta xi) - 1/(delta xi)) at xi=1
    double max_err = 0.0;
    for (size_t k = 0; k < traj.times.size(); ++k) {
        const double t = traj.times[k];
        const cplx expected = 0.5 * std::exp(cplx{0.0, omega * t});
        max_err = std::max(max_err, std::abs(traj.states[k].coeff(1) - expected));
        // Pointwise: the profile is cos(x + omega t).
        auto z = inverse_transform(traj.states[k]);
        for (int j = 0; j < g.n_modes; ++j)
            max_err = std::max(max_err, std::abs(z[j] - cplx{std::cos(g.x(j) + omega * t), 0.0}));
    }
    CHECK(max_err <= 1e-10);
}

TEST_CASE("zero data stays zero") {
    Grid g = make_grid(64);
    SpectralField u0(g, true);
    for (Equation eq : {Equation::ilw, Equation::bo, Equation::kdv, Equation::silw,
                        Equation::bo_perturbed}) {
        Trajectory traj = evolve(u0, basic_config(eq, 1.0, 1e-2, 0.1, g));
        for (const auto& s : traj.states)
            for (const auto& c : s.data()) REQUIRE(std::abs(c) == 0.0);
    }
}

TEST_CASE("integrator is fourth order in dt") {
    Grid g = make_grid(64);
    SpectralField u0 = cosine(g, 0.5);
    auto final_state = [&](double dt) {
        Trajectory t = evolve(u0, basic_config(Equation::ilw, 1.0, dt, 0.25, g));
        return t.states.back();
    };
    SpectralField a = final_state(4e-3);
    SpectralField b = final_state(2e-3);
    SpectralField c = final_state(1e-3);
    const double d1 = l2_norm(a - b);
    const double d2 = l2_norm(b - c);
    const double slope = std::log2(d1 / d2);
    INFO("d1=" << d1 << " d2=" << d2 << " slope=" << slope);
    CHECK(slope >= 3.7);
    CHECK(slope <= 4.3);
}

TEST_CASE("mean is conserved exactly, L2 to integrator accuracy") {
    Grid g = make_grid(128);
    for (Equation eq : {Equation::ilw, Equation::bo, Equation::kdv, Equation::kdv_third,
                        Equation::silw, Equation::bo_perturbed}) {
        SpectralField u0 = cosine(g, 0.5);
        u0.set_coeff(0, cplx{0.25, 0.0}); // a nonzero mean decouples too
        Trajectory traj = evolve(u0, basic_config(eq, 1.0, 1e-3, 0.5, g));
        InvariantReport rep = invariant_report(traj);
        INFO(equation_name(eq));
        CHECK(rep.max_mean_drift <= 1e-13);
        CHECK(rep.max_l2_rel_drift <= 1e-7);
    }
}

TEST_CASE("constant data is a fixed point of BO") {
    Grid g = make_grid(64);
    SpectralField u0(g, true);
    u0.set_coeff(0, cplx{0.7, 0.0});
    Trajectory traj = evolve(u0, basic_config(Equation::bo, 1.0, 1e-2, 0.2, g));
    for (const auto& s : traj.states) {
        CHECK(s.mean() == Catch::Approx(0.7).margin(1e-14));
        for (int n = 1; n <= g.lattice_max(); ++n) CHECK(std::abs(s.coeff(n)) < 1e-14);
    }
}

TEST_CASE("Galilean conjugation phase rule") {
    Grid g = make_grid(64);
    SpectralField u = cosine(g);

    SECTION("t = 0 is the identity") {
        SpectralField v = galilean_conjugate(u, 0.0, 2.0);
        for (int k = 0; k < g.n_modes; ++k) CHECK(v[k] == u[k]);
    }

    SECTION("half-period shift negates cos") {
        const double delta = 1.7;
        SpectralField v = galilean_conjugate(u, std::numbers::pi * delta, delta);
        CHECK(std::abs(v.coeff(1) + cplx{0.5, 0.0}) < 1e-12);
        CHECK(std::abs(v.coeff(-1) + cplx{0.5, 0.0}) < 1e-12);
        CHECK(v.reality_flag());
    }

    SECTION("pure exponential picks up e^{2i}") {
        SpectralField e(g, false);
        e.set_coeff(2, cplx{1.0, 0.0});
        const double delta = 0.9;
        SpectralField v = galilean_conjugate(e, delta, delta);
        CHECK(std::abs(v.coeff(2) - std::exp(cplx{0.0, 2.0})) < 1e-12);
    }
}

TEST_CASE("conjugation equivalence pins the perturbation form") {
    // Evolving ILW and changing frame equals evolving BO plus the
    // second-order realization of the perturbation (i xi * q_effective).
    Grid g = make_grid(64);
    auto rng = make_rng(5);
    SpectralField u0(g, true);
    std::normal_distribution<double> gauss;
    for (int n = 1; n <= 4; ++n) {
        const cplx c{gauss(rng), gauss(rng)};
        u0.set_coeff(n, 0.03 * c);
        u0.set_coeff(-n, 0.03 * std::conj(c));
    }

    for (double delta : {1.0, 2.0, 4.0}) {
        Trajectory ilw_traj = evolve(u0, basic_config(Equation::ilw, delta, 1e-3, 0.5, g));
        Trajectory conj = galilean_conjugate(ilw_traj, delta);
        Trajectory pert = evolve(u0, basic_config(Equation::bo_perturbed, delta, 1e-3, 0.5, g));
        const double rel = sup_l2_difference(conj, pert) / l2_norm(u0);
        INFO("delta=" << delta << " relative=" << rel);
        CHECK(rel <= 1e-6);
    }
}

TEST_CASE("deep-water degeneracy of the linear symbol") {
    Grid g = make_grid(128);
    const double delta = 32.0;
    const auto ilw = linear_symbol(Equation::ilw, delta, g);
    const auto bo = linear_symbol(Equation::bo, 0.0, g);

    double sup_exp_part = 0.0;
    for (int k = 0; k < g.n_modes; ++k) {
        const double xi = g.freq(k);
        const double gap = std::abs(ilw[k] - bo[k]);
        if (xi != 0.0) {
            // Transport piece |xi|/delta plus the exponential coth tail.
            const double bound =
                std::abs(xi) / delta + 3.0 * xi * xi * std::exp(-2.0 * delta * std::abs(xi));
            REQUIRE(gap <= bound * (1.0 + 1e-12));
        }
        const double tail = xi * xi * std::abs(coth_minus_sgn(delta * xi));
        sup_exp_part = std::max(sup_exp_part, tail);
    }
    CHECK(sup_exp_part <= 1e-8);
}

TEST_CASE("blow-up is flagged with its time") {
    Grid g = make_grid(32);
    SpectralField u0 = cosine(g, 30.0);
    EvolutionConfig c = basic_config(Equation::kdv, 1.0, 0.05, 2.0, g);
    try {
        evolve(u0, c);
        FAIL("expected DivergenceError");
    } catch (const DivergenceError& e) {
        CHECK(e.blow_up_time > 0.0);
        CHECK(e.blow_up_time <= 2.0);
    }
}

TEST_CASE("configuration and precondition errors") {
    Grid g = make_grid(64);
    SpectralField u0 = cosine(g);

    CHECK_THROWS_AS(evolve(u0, basic_config(Equation::ilw, 1.0, 0.5, 0.25, g)), ConfigError);
    CHECK_THROWS_AS(evolve(u0, basic_config(Equation::ilw, -1.0, 1e-2, 0.1, g)), ConfigError);

    EvolutionConfig c = basic_config(Equation::ilw, 1.0, 1e-2, 0.1, g);
    c.snapshot_stride = 3; // does not divide 10 steps
    CHECK_THROWS_AS(evolve(u0, c), ConfigError);

    c = basic_config(Equation::ilw, 1.0, 1e-2, 0.1, g);
    SpectralField complex_data(g, false);
    complex_data.set_coeff(1, cplx{1.0, 0.0});
    CHECK_THROWS_AS(evolve(complex_data, c), PreconditionError);

    SpectralField wrong_grid(make_grid(32), true);
    CHECK_THROWS_AS(evolve(wrong_grid, c), ShapeError);
}

TEST_CASE("trajectory timing contract") {
    Grid g = make_grid(64);
    SpectralField u0 = cosine(g, 0.2);
    EvolutionConfig c = basic_config(Equation::bo, 1.0, 1e-2, 0.5, g);
    c.snapshot_stride = 5;
    Trajectory traj = evolve(u0, c);
    CHECK(traj.times.front() == 0.0);
    CHECK(traj.times.back() == Catch::Approx(0.5).margin(1e-12));
    for (size_t k = 1; k < traj.times.size(); ++k)
        CHECK(traj.times[k] - traj.times[k - 1] == Catch::Approx(0.05).margin(1e-12));
    for (const auto& s : traj.states) CHECK(s.reality_flag());
}

TEST_CASE("dealias modes agree on resolved data") {
    Grid g = make_grid(128);
    SpectralField u0 = cosine(g, 0.4);
    EvolutionConfig a = basic_config(Equation::bo, 1.0, 1e-3, 0.25, g);
    a.dealias_mode = DealiasMode::truncate_23;
    EvolutionConfig b = a;
    b.dealias_mode = DealiasMode::pad_2x;
    CHECK(sup_l2_difference(evolve(u0, a), evolve(u0, b)) <= 1e-9);
}
