#pragma once

#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include "ilwlab/errors.hpp"
#include "ilwlab/field.hpp"
#include "ilwlab/symbols.hpp"

namespace ilwlab {

// ---------------------------------------------------------------------------
// Equations on the torus, all of the form  du/dt = L u + dx(u^2):
//   ilw          L = i xi^2 (coth(delta xi) - 1/(delta xi))      (delta=inf -> bo)
//   bo           L = i xi |xi|
//   kdv          L = i xi^3                (du/dt + dx^3 u = dx(u^2))
//   kdv_third    L = i xi^3 / 3            (shallow-water reference equation)
//   silw         L = (i/delta) xi^2 (coth(delta xi) - 1/(delta xi))
//   bo_perturbed L = i xi|xi| + i xi * q_eff(xi), the Galilean image of ilw
// *_linear variants disable the nonlinearity exactly.
// ---------------------------------------------------------------------------

enum class Equation {
    ilw, bo, kdv, kdv_third, silw, bo_perturbed,
    ilw_linear, bo_linear, kdv_linear, kdv_third_linear, silw_linear, bo_perturbed_linear
};

inline bool is_linear(Equation eq) {
    switch (eq) {
        case Equation::ilw_linear:
        case Equation::bo_linear:
        case Equation::kdv_linear:
        case Equation::kdv_third_linear:
        case Equation::silw_linear:
        case Equation::bo_perturbed_linear:
            return true;
        default:
            return false;
    }
}

inline Equation nonlinear_family(Equation eq) {
    switch (eq) {
        case Equation::ilw_linear: return Equation::ilw;
        case Equation::bo_linear: return Equation::bo;
        case Equation::kdv_linear: return Equation::kdv;
        case Equation::kdv_third_linear: return Equation::kdv_third;
        case Equation::silw_linear: return Equation::silw;
        case Equation::bo_perturbed_linear: return Equation::bo_perturbed;
        default: return eq;
    }
}

inline bool needs_delta(Equation eq) {
    switch (nonlinear_family(eq)) {
        case Equation::ilw:
        case Equation::silw:
        case Equation::bo_perturbed:
            return true;
        default:
            return false;
    }
}

inline std::string equation_name(Equation eq) {
    switch (eq) {
        case Equation::ilw: return "ilw";
        case Equation::bo: return "bo";
        case Equation::kdv: return "kdv";
        case Equation::kdv_third: return "kdv_third";
        case Equation::silw: return "silw";
        case Equation::bo_perturbed: return "bo_perturbed";
        case Equation::ilw_linear: return "ilw_linear";
        case Equation::bo_linear: return "bo_linear";
        case Equation::kdv_linear: return "kdv_linear";
        case Equation::kdv_third_linear: return "kdv_third_linear";
        case Equation::silw_linear: return "silw_linear";
        case Equation::bo_perturbed_linear: return "bo_perturbed_linear";
    }
    return "?";
}

/// Linear symbol L(xi) of the equation at one frequency.
inline cplx linear_rate(Equation eq, double delta, double xi) {
    switch (nonlinear_family(eq)) {
        case Equation::ilw:
            return linear_phase_rate(PropagatorTag::ilw, xi, delta, 0.0);
        case Equation::bo:
            return linear_phase_rate(PropagatorTag::bo, xi, delta, 0.0);
        case Equation::kdv:
            return linear_phase_rate(PropagatorTag::kdv, xi, delta, 0.0);
        case Equation::kdv_third:
            return linear_phase_rate(PropagatorTag::kdv_third, xi, delta, 0.0);
        case Equation::silw:
            return linear_phase_rate(PropagatorTag::silw, xi, delta, 0.0);
        case Equation::bo_perturbed: {
            // i xi|xi| + i xi * xi(coth(delta xi) - sgn xi), assembled from the
            // stable q_effective kernel; identically i xi^2 coth(delta xi).
            if (std::isinf(delta)) return cplx{0.0, xi * std::abs(xi)};
            const double qeff = x_coth_minus_sgn(delta * xi) / delta;
            return cplx{0.0, xi * std::abs(xi) + xi * qeff};
        }
        default:
            return cplx{0, 0};
    }
}

inline std::vector<cplx> linear_symbol(Equation eq, double delta, const Grid& grid) {
    std::vector<cplx> sym(grid.n_modes);
    for (int k = 0; k < grid.n_modes; ++k) sym[k] = linear_rate(eq, delta, grid.freq(k));
    return sym;
}

enum class DealiasMode { truncate_23, pad_2x };

struct EvolutionConfig {
    Equation equation = Equation::bo;
    double delta = 1.0;
    double dt = 1e-3;
    double t_final = 1.0;
    Grid grid;
    bool dealias = true;
    DealiasMode dealias_mode = DealiasMode::truncate_23;
    int snapshot_stride = 1;

    void validate() const {
        if (!(dt > 0.0)) throw ConfigError("evolve: dt must be positive");
        if (!(t_final > 0.0)) throw ConfigError("evolve: t_final must be positive");
        if (dt > t_final) throw ConfigError("evolve: dt must not exceed t_final");
        if (snapshot_stride < 1) throw ConfigError("evolve: snapshot_stride must be >= 1");
        if (needs_delta(equation) && !(delta > 0.0))
            throw ConfigError("evolve: delta must be positive for " + equation_name(equation));
        if (grid.n_modes < 8) throw ConfigError("evolve: grid not initialized");
    }
};

struct Trajectory {
    EvolutionConfig config;
    std::vector<double> times;
    std::vector<SpectralField> states;

    double snapshot_spacing() const {
        return times.size() > 1 ? times[1] - times[0] : 0.0;
    }
};

namespace detail {

/// dx(u^2) in spectral space, alias-controlled per the configured mode.
class QuadraticTerm {
public:
    QuadraticTerm(const Grid& grid, bool dealias, DealiasMode mode)
        : grid_(grid), dealias_(dealias), mode_(mode) {
        cutoff_ = grid.n_modes / 3; // keep |n| <= floor(n/3)
    }

    SpectralField operator()(const SpectralField& u) const {
        if (dealias_ && mode_ == DealiasMode::pad_2x) return padded_product(u);
        return truncated_product(u);
    }

private:
    SpectralField truncated_product(const SpectralField& u) const {
        SpectralField v = u;
        if (dealias_) mask(v);
        std::vector<cplx> z = inverse_transform(v);
        std::vector<double> sq(z.size());
        for (size_t j = 0; j < z.size(); ++j) sq[j] = z[j].real() * z[j].real();
        SpectralField p = transform(sq, grid_);
        if (dealias_) mask(p);
        return differentiate(p);
    }

    SpectralField padded_product(const SpectralField& u) const {
        const int m = 2 * grid_.n_modes;
        std::vector<cplx> z = padded_samples(u, m);
        std::vector<cplx> sq(z.size());
        for (size_t j = 0; j < z.size(); ++j) {
            const double re = z[j].real();
            sq[j] = cplx{re * re, 0.0};
        }
        std::vector<cplx> big;
        ilwlab::detail::dft_forward(sq, big);
        const double inv_m = 1.0 / m;
        for (auto& c : big) c *= inv_m;
        SpectralField p = truncate_to_grid(big, grid_, true);
        return differentiate(p);
    }

    SpectralField differentiate(const SpectralField& p) const {
        SpectralField out(grid_, true);
        for (int k = 0; k < grid_.n_modes; ++k)
            out[k] = cplx{0.0, grid_.freq(k)} * p[k];
        out[grid_.slot(grid_.lattice_min())] = cplx{0, 0}; // unpaired Nyquist
        return out;
    }

    void mask(SpectralField& f) const {
        for (int k = 0; k < grid_.n_modes; ++k)
            if (std::abs(grid_.lattice_freq(k)) > cutoff_) f[k] = cplx{0, 0};
    }

    Grid grid_;
    bool dealias_;
    DealiasMode mode_;
    int cutoff_;
};

inline void check_finite(const SpectralField& u, double t) {
    for (const auto& c : u.data()) {
        if (!std::isfinite(c.real()) || !std::isfinite(c.imag()) || std::abs(c) > 1e8)
            throw DivergenceError(
                "evolve: solution blew up at t = " + std::to_string(t) +
                " (coefficient magnitude exceeded 1e8; likely under-resolution)",
                t);
    }
}

} // namespace detail

/// Integrating-factor RK4 (Lawson). The linear flow is applied as an exact
/// unitary phase; classical RK4 handles the transformed nonlinearity. With a
/// *_linear equation each step is the exact propagator.
inline Trajectory evolve(const SpectralField& u0, const EvolutionConfig& config) {
    config.validate();
    if (u0.grid() != config.grid) throw ShapeError("evolve: u0 grid differs from config.grid");
    if (!u0.reality_flag()) throw PreconditionError("evolve: u0 must be real-flagged");

    const Grid& g = config.grid;
    const int steps = std::max(1, static_cast<int>(std::llround(config.t_final / config.dt)));
    if (steps % config.snapshot_stride != 0)
        throw ConfigError("evolve: snapshot_stride must divide round(t_final/dt) = " +
                          std::to_string(steps));
    const double dt = config.t_final / steps;

    const auto L = linear_symbol(config.equation, config.delta, g);
    std::vector<cplx> e_half(g.n_modes), e_full(g.n_modes);
    for (int k = 0; k < g.n_modes; ++k) {
        e_half[k] = std::exp(0.5 * dt * L[k]);
        e_full[k] = std::exp(dt * L[k]);
    }

    const bool linear = is_linear(config.equation);
    detail::QuadraticTerm nonlinearity(g, config.dealias, config.dealias_mode);

    SpectralField u = u0;
    u.set_coeff(g.lattice_min(), cplx{0, 0}); // unpaired Nyquist mode is not evolved

    Trajectory traj;
    traj.config = config;
    traj.config.dt = dt;
    traj.times.reserve(steps / config.snapshot_stride + 1);
    traj.states.reserve(steps / config.snapshot_stride + 1);
    traj.times.push_back(0.0);
    traj.states.push_back(u);

    const int n = g.n_modes;
    auto axpy = [n](const SpectralField& a, double c, const SpectralField& b) {
        SpectralField r = a;
        for (int k = 0; k < n; ++k) r[k] += c * b[k];
        return r;
    };
    auto phase = [n](const std::vector<cplx>& e, const SpectralField& a) {
        SpectralField r = a;
        for (int k = 0; k < n; ++k) r[k] *= e[k];
        return r;
    };

    for (int step = 1; step <= steps; ++step) {
        if (linear) {
            u = phase(e_full, u);
        } else {
            const SpectralField a = nonlinearity(u);
            const SpectralField u2 = phase(e_half, axpy(u, 0.5 * dt, a));
            const SpectralField b = nonlinearity(u2);
            const SpectralField u3 = axpy(phase(e_half, u), 0.5 * dt, b);
            const SpectralField c = nonlinearity(u3);
            const SpectralField u4 = axpy(phase(e_full, u), dt, phase(e_half, c));
            const SpectralField d = nonlinearity(u4);

            SpectralField next = phase(e_full, u);
            const SpectralField ea = phase(e_full, a);
            for (int k = 0; k < n; ++k)
                next[k] += (dt / 6.0) *
                           (ea[k] + 2.0 * e_half[k] * (b[k] + c[k]) + d[k]);
            u = next;
        }
        const double t = step * dt;
        detail::check_finite(u, t);
        if (step % config.snapshot_stride == 0) {
            u.set_reality_flag(true);
            traj.times.push_back(t);
            traj.states.push_back(u);
        }
    }
    return traj;
}

/// Galilean frame change v(t,x) = u(t, x + t/delta): phase c_n -> e^{i xi_n t/delta} c_n.
inline SpectralField galilean_conjugate(const SpectralField& f, double t, double delta) {
    if (!(delta > 0.0)) throw ConfigError("galilean_conjugate: delta must be positive");
    SpectralField out(f.grid(), f.reality_flag());
    const Grid& g = f.grid();
    for (int k = 0; k < g.n_modes; ++k)
        out[k] = std::exp(cplx{0.0, g.freq(k) * t / delta}) * f[k];
    return out;
}

inline Trajectory galilean_conjugate(const Trajectory& traj, double delta) {
    Trajectory out;
    out.config = traj.config;
    out.times = traj.times;
    out.states.reserve(traj.states.size());
    for (size_t i = 0; i < traj.states.size(); ++i)
        out.states.push_back(galilean_conjugate(traj.states[i], traj.times[i], delta));
    return out;
}

struct InvariantReport {
    std::vector<double> times;
    std::vector<double> mean;
    std::vector<double> l2;
    double max_mean_drift = 0.0;    // absolute, vs t = 0
    double max_l2_rel_drift = 0.0;  // relative, vs t = 0
};

inline InvariantReport invariant_report(const Trajectory& traj) {
    if (traj.states.empty()) throw PreconditionError("invariant_report: empty trajectory");
    InvariantReport rep;
    rep.times = traj.times;
    const double m0 = traj.states.front().mean();
    const double l20 = l2_norm(traj.states.front());
    for (const auto& s : traj.states) {
        rep.mean.push_back(s.mean());
        rep.l2.push_back(l2_norm(s));
        rep.max_mean_drift = std::max(rep.max_mean_drift, std::abs(s.mean() - m0));
        if (l20 > 0.0)
            rep.max_l2_rel_drift =
                std::max(rep.max_l2_rel_drift, std::abs(l2_norm(s) - l20) / l20);
    }
    return rep;
}

} // namespace ilwlab
