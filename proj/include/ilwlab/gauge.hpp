#pragma once

#include <cmath>
#include <complex>
#include <limits>
#include <vector>

#include "ilwlab/errors.hpp"
#include "ilwlab/evolution.hpp"
#include "ilwlab/field.hpp"
#include "ilwlab/projectors.hpp"
#include "ilwlab/symbols.hpp"

namespace ilwlab {

// ---------------------------------------------------------------------------
// Periodic gauge pipeline: mean renormalization, the spectral primitive F,
// w = dx P_+ e^{iF}, the accumulated phase gamma, and the residual /
// nonlinear-smoothing diagnostics for the gauged equation
//   dt w - H dx^2 w = -2 dx P_+(dx^{-1} w . P_- dx v)
//                     + i dx P_+(e^{iF} R v) - i mean(v^2) w,
// where R is the zero-order factor of the perturbation (dx R = perturbation).
// ---------------------------------------------------------------------------

struct MeanNormalization {
    SpectralField v0;
    double drift_velocity; // 2 * mean(u0); the frame speed removing the transport term
    double mean_shift;     // mean(u0)
};

inline MeanNormalization mean_normalize(const SpectralField& u0) {
    if (!u0.reality_flag()) throw PreconditionError("mean_normalize: u0 must be real-flagged");
    MeanNormalization out{u0, 2.0 * u0.mean(), u0.mean()};
    out.v0.set_coeff(0, cplx{0.0, 0.0});
    return out;
}

/// Mean of v^2 over the period; Parseval on the coefficients of real v.
inline double mean_square(const SpectralField& v) {
    double acc = 0.0;
    for (const auto& c : v.data()) acc += std::norm(c);
    return acc;
}

/// Spectral primitive: F_hat(0) = 0, F_hat(n) = v_hat(n) / (i xi_n).
inline SpectralField primitive(const SpectralField& v) {
    const double tol = 1e-12 * (1.0 + l2_norm(v));
    if (std::abs(v.mean_complex()) > tol)
        throw PreconditionError("primitive: input is not mean-zero");
    return apply_symbol(v, MultiplierSpec::dx_inv());
}

/// e^{iF} evaluated pointwise on a 2x padded physical grid (the exponential
/// is not band-limited); coefficients band-truncated back to the grid.
inline SpectralField exp_i(const SpectralField& F) {
    const Grid& g = F.grid();
    const int m = 2 * g.n_modes;
    std::vector<cplx> zF = padded_samples(F, m);
    std::vector<cplx> e(m);
    for (int j = 0; j < m; ++j) e[j] = std::exp(cplx{0.0, zF[j].real()});
    std::vector<cplx> big;
    detail::dft_forward(e, big);
    const double inv_m = 1.0 / m;
    for (auto& c : big) c *= inv_m;
    return truncate_to_grid(big, g, false);
}

/// Gauge variable w = dx P_+ e^{iF[v]}; supported on n >= 1.
inline SpectralField gauge_w(const SpectralField& v) {
    SpectralField F = primitive(v);
    SpectralField E = exp_i(F);
    SpectralField Ep = project(E, Projector::plus);
    return apply_symbol(Ep, MultiplierSpec::dx());
}

inline std::vector<SpectralField> gauge_snapshots(const Trajectory& traj_v) {
    std::vector<SpectralField> ws;
    ws.reserve(traj_v.states.size());
    for (const auto& v : traj_v.states) ws.push_back(gauge_w(v));
    return ws;
}

/// gamma(t) = integral_0^t mean(v^2) dt', trapezoid on snapshots with a
/// linearly interpolated partial last segment.
inline double gamma_integral(const Trajectory& traj_v, double t) {
    if (traj_v.states.empty()) throw PreconditionError("gamma_integral: empty trajectory");
    const auto& ts = traj_v.times;
    const double tol = 1e-9 * (1.0 + std::abs(ts.back()));
    if (t < ts.front() - tol || t > ts.back() + tol)
        throw RangeError("gamma_integral: t outside the trajectory range");
    t = std::min(std::max(t, ts.front()), ts.back());

    double acc = 0.0;
    double g_prev = mean_square(traj_v.states[0]);
    for (size_t k = 1; k < ts.size(); ++k) {
        const double g_k = mean_square(traj_v.states[k]);
        if (t >= ts[k]) {
            acc += 0.5 * (ts[k] - ts[k - 1]) * (g_prev + g_k);
            g_prev = g_k;
        } else {
            const double lambda = (t - ts[k - 1]) / (ts[k] - ts[k - 1]);
            const double g_t = (1.0 - lambda) * g_prev + lambda * g_k;
            acc += 0.5 * (t - ts[k - 1]) * (g_prev + g_t);
            break;
        }
    }
    return acc;
}

// ---------------------------------------------------------------------------
// Gauged-equation residual.
// ---------------------------------------------------------------------------

struct GaugeResidualOptions {
    bool include_transport_term = true; // -2 dx P_+(dx^{-1} w . P_- dx v)
    bool include_q_term = true;         // i dx P_+(e^{iF} R v)
    bool include_mean_term = true;      // -i mean(v^2) w
};

struct GaugeResidualSeries {
    std::vector<double> times;              // interior snapshots
    std::vector<double> residual_qeff;      // R = q_effective reading
    std::vector<double> residual_qdelta;    // R = Q_delta literal reading
    double max_qeff = 0.0;
    double max_qdelta = 0.0;
};

namespace detail {

/// Pointwise product of two fields via 2x padded physical grids, truncated
/// back to the common grid (exact for the retained band).
inline SpectralField padded_product(const SpectralField& a, const SpectralField& b) {
    a.check_same_grid(b);
    const int m = 2 * a.grid().n_modes;
    std::vector<cplx> za = padded_samples(a, m);
    std::vector<cplx> zb = padded_samples(b, m);
    for (int j = 0; j < m; ++j) za[j] *= zb[j];
    std::vector<cplx> big;
    dft_forward(za, big);
    const double inv_m = 1.0 / m;
    for (auto& c : big) c *= inv_m;
    return truncate_to_grid(big, a.grid(), false);
}

inline SpectralField hilbert_dx2(const SpectralField& w) {
    SpectralField out(w.grid(), false);
    const Grid& g = w.grid();
    for (int k = 0; k < g.n_modes; ++k) {
        const double xi = g.freq(k);
        out[k] = cplx{0.0, xi * std::abs(xi)} * w[k];
    }
    out[g.slot(g.lattice_min())] = cplx{0, 0};
    return out;
}

} // namespace detail

/// Residual of the gauged equation along a trajectory of the renormalized
/// variable v (ilw conjugated into the BO frame, or bo_perturbed / bo).
/// dt w is approximated by centered differences at interior snapshots; every
/// right-hand-side term is assembled spectrally. Both candidate realizations
/// of the perturbation factor R are evaluated: the q_effective reading
/// (dx R = evolution perturbation) and the literal Q_delta multiplier.
/// Each entry is ||residual||_{H^{-1}} / (||w||_{H^{-1}} + 1).
inline GaugeResidualSeries gauged_residual(const Trajectory& traj_v,
                                           const GaugeResidualOptions& opts = {}) {
    if (traj_v.states.size() < 3)
        throw PreconditionError("gauged_residual: need at least 3 snapshots");
    const Equation family = nonlinear_family(traj_v.config.equation);
    if (family != Equation::ilw && family != Equation::bo_perturbed && family != Equation::bo)
        throw PreconditionError("gauged_residual: trajectory must come from ilw, bo_perturbed or bo");
    const double delta = family == Equation::bo
                             ? std::numeric_limits<double>::infinity()
                             : traj_v.config.delta;
    const Grid& g = traj_v.config.grid;

    const double mean_tol = 1e-10 * (1.0 + l2_norm(traj_v.states.front()));
    if (std::abs(traj_v.states.front().mean_complex()) > mean_tol)
        throw PreconditionError("gauged_residual: v must be mean-zero (mean_normalize first)");

    const size_t K = traj_v.states.size();
    std::vector<SpectralField> w(K, SpectralField(g));
    for (size_t k = 0; k < K; ++k) w[k] = gauge_w(traj_v.states[k]);

    const bool finite_delta = !std::isinf(delta);
    const auto sym_qeff = finite_delta
                              ? make_symbol(MultiplierSpec::q_effective(delta), g)
                              : std::vector<cplx>(g.n_modes, cplx{0, 0});
    const auto sym_qdelta = finite_delta
                                ? make_symbol(MultiplierSpec::q_delta(delta), g)
                                : std::vector<cplx>(g.n_modes, cplx{0, 0});
    const auto sym_dx = make_symbol(MultiplierSpec::dx(), g);
    const auto sym_dxinv = make_symbol(MultiplierSpec::dx_inv(), g);

    GaugeResidualSeries out;
    for (size_t k = 1; k + 1 < K; ++k) {
        const double h = traj_v.times[k + 1] - traj_v.times[k];
        const SpectralField& v = traj_v.states[k];

        SpectralField wdot(g, false);
        for (int j = 0; j < g.n_modes; ++j)
            wdot[j] = (w[k + 1][j] - w[k - 1][j]) / (2.0 * h);

        SpectralField rhs_common(g, false);
        rhs_common += detail::hilbert_dx2(w[k]);

        if (opts.include_transport_term) {
            SpectralField dxinv_w = apply_symbol(w[k], sym_dxinv);
            SpectralField pm_dxv = project(apply_symbol(v, sym_dx), Projector::minus);
            SpectralField prod = detail::padded_product(dxinv_w, pm_dxv);
            SpectralField t1 = apply_symbol(project(prod, Projector::plus), sym_dx);
            t1 *= -2.0;
            rhs_common += t1;
        }
        if (opts.include_mean_term) {
            const double m = mean_square(v);
            SpectralField t3(g, false);
            for (int j = 0; j < g.n_modes; ++j) t3[j] = cplx{0.0, -m} * w[k][j];
            rhs_common += t3;
        }

        SpectralField E = exp_i(primitive(v));
        auto q_term = [&](const std::vector<cplx>& sym_r) {
            SpectralField rv = apply_symbol(v, sym_r);
            SpectralField prod = detail::padded_product(E, rv);
            SpectralField t2 = apply_symbol(project(prod, Projector::plus), sym_dx);
            for (int j = 0; j < g.n_modes; ++j) t2[j] *= cplx{0.0, 1.0};
            return t2;
        };

        const double denom = hs_norm(w[k], -1.0) + 1.0;
        auto finish = [&](const SpectralField& t2) {
            SpectralField res = wdot;
            res -= rhs_common;
            if (opts.include_q_term) {
                SpectralField r = res;
                r -= t2;
                return hs_norm(r, -1.0) / denom;
            }
            return hs_norm(res, -1.0) / denom;
        };

        out.times.push_back(traj_v.times[k]);
        out.residual_qeff.push_back(finish(q_term(sym_qeff)));
        out.residual_qdelta.push_back(finish(q_term(sym_qdelta)));
        out.max_qeff = std::max(out.max_qeff, out.residual_qeff.back());
        out.max_qdelta = std::max(out.max_qdelta, out.residual_qdelta.back());
    }
    return out;
}

struct SmoothingDeficit {
    std::vector<double> times;
    std::vector<double> deficit; // ||w(t) - Phi(t) w0||_{H^{s+eps}}
    double m0 = 0.0;
};

/// Distance of the gauge variable from its free flow, measured above the
/// data regularity: Phi(t) has symbol e^{it n^2} e^{-it m0} on n >= 1 with
/// m0 the conserved mean of v(0)^2.
inline SmoothingDeficit smoothing_deficit(const Trajectory& traj_v, double s, double eps) {
    if (traj_v.states.empty()) throw PreconditionError("smoothing_deficit: empty trajectory");
    if (!(eps > 0.0)) throw ConfigError("smoothing_deficit: eps must be positive");
    const double mean_tol = 1e-10 * (1.0 + l2_norm(traj_v.states.front()));
    if (std::abs(traj_v.states.front().mean_complex()) > mean_tol)
        throw PreconditionError("smoothing_deficit: v must be mean-normalized at t = 0");

    SmoothingDeficit out;
    out.m0 = mean_square(traj_v.states.front());
    const SpectralField w0 = gauge_w(traj_v.states.front());
    for (size_t k = 0; k < traj_v.states.size(); ++k) {
        const double t = traj_v.times[k];
        SpectralField free_w = apply_symbol(
            w0, MultiplierSpec::free_propagator(PropagatorTag::gauged_free, t, 0.0, out.m0));
        SpectralField diff = gauge_w(traj_v.states[k]);
        diff -= free_w;
        out.times.push_back(t);
        out.deficit.push_back(hs_norm(diff, s + eps));
    }
    return out;
}

} // namespace ilwlab
