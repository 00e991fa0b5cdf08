#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "ilwlab/errors.hpp"
#include "ilwlab/evolution.hpp"
#include "ilwlab/field.hpp"
#include "ilwlab/math_util.hpp"
#include "ilwlab/projectors.hpp"
#include "ilwlab/rng.hpp"

namespace ilwlab {

// ---------------------------------------------------------------------------
// Resonance functions on the integer lattice. Everything in this module
// works on lattice integers, so grids must have period 2 pi.
// ---------------------------------------------------------------------------

inline long long omega(long long xi, long long xi1, long long xi2) {
    if (xi != xi1 + xi2)
        throw PreconditionError("omega: convolution constraint xi = xi1 + xi2 violated");
    auto q = [](long long a) { return a * std::llabs(a); };
    return q(xi) - q(xi1) - q(xi2);
}

/// Two-step resonance from substituting the w-equation: Omega(xi, xi12, xi3)
/// + Omega(xi12, xi1, xi2); telescopes to the total second-order phase.
inline long long omega2_1(long long xi, long long xi1, long long xi2, long long xi3) {
    if (xi != xi1 + xi2 + xi3)
        throw PreconditionError("omega2_1: constraint xi = xi1 + xi2 + xi3 violated");
    const long long xi12 = xi1 + xi2;
    return omega(xi, xi12, xi3) + omega(xi12, xi1, xi2);
}

/// Two-step resonance from substituting the v-equation: Omega(xi, xi1, xi23)
/// + Omega(xi23, xi2, xi3); same total phase as omega2_1.
inline long long omega2_2(long long xi, long long xi1, long long xi2, long long xi3) {
    if (xi != xi1 + xi2 + xi3)
        throw PreconditionError("omega2_2: constraint xi = xi1 + xi2 + xi3 violated");
    const long long xi23 = xi2 + xi3;
    return omega(xi, xi1, xi23) + omega(xi23, xi2, xi3);
}

/// sigma(xi, xi1, xi2) = 1_{xi >= 1} 1_{xi1 >= 1} 1_{xi2 < 0} on the lattice.
inline bool sigma_support(long long xi, long long xi1, long long xi2) {
    return xi >= 1 && xi1 >= 1 && xi2 < 0;
}

struct NormalFormSpec {
    Grid grid;
    double M = 1.0;     // resonance threshold
    double s = 0.0;
    double theta = 0.0;
    double t = 0.0;     // oscillatory phase time
    // Optional dyadic shell restrictions (powers of two); open when unset.
    std::optional<int> N1, N2, N3, N12, N23;

    void validate() const {
        if (std::abs(grid.period - kTwoPi) > 1e-9 * kTwoPi)
            throw ConfigError("normalform: grid period must be 2*pi (integer lattice)");
        if (!(M >= 1.0)) throw ConfigError("normalform: M must be >= 1");
        for (const auto& sh : {N1, N2, N3, N12, N23}) {
            if (sh) {
                if (!is_power_of_two(*sh))
                    throw ConfigError("normalform: shells must be powers of two");
                if (*sh > grid.n_modes / 2)
                    throw ConfigError("normalform: shell exceeds n_modes/2");
            }
        }
    }
};

enum class BilinearVariant { full, leq_M, gt_M, zero };
enum class TrilinearVariant { n2_1, n2_leqM, n2_2, n2_0_1, n2_0_2 };

namespace detail {

inline double shell_factor(const std::optional<int>& N, long long xi) {
    return N ? lp_shell(static_cast<double>(xi), static_cast<double>(*N)) : 1.0;
}

inline void warn_if_not_positive_support(const SpectralField& w) {
    double pos = 0.0, rest = 0.0;
    for (int n = w.grid().lattice_min(); n <= w.grid().lattice_max(); ++n)
        (n >= 1 ? pos : rest) = std::max(n >= 1 ? pos : rest, std::abs(w.coeff(n)));
    if (rest > 1e-12 * std::max(1.0, pos))
        std::cerr << "ilwlab: bilinear_nf called with w not supported on positive "
                     "frequencies; the kernel ignores the rest\n";
}

} // namespace detail

/// Kernel of the first-step bilinear operators at one lattice triple
/// (oscillatory factor e^{-i t Omega} included).
inline cplx bilinear_kernel(BilinearVariant variant, long long xi, long long xi1,
                            long long xi2, const NormalFormSpec& spec) {
    if (!sigma_support(xi, xi1, xi2)) return cplx{0, 0};
    const long long om = omega(xi, xi1, xi2);
    const double a_om = static_cast<double>(std::llabs(om));
    switch (variant) {
        case BilinearVariant::full: break;
        case BilinearVariant::leq_M:
            if (a_om > spec.M) return cplx{0, 0};
            break;
        case BilinearVariant::gt_M:
        case BilinearVariant::zero:
            if (a_om <= spec.M) return cplx{0, 0};
            break;
    }
    const cplx osc = std::exp(cplx{0.0, -spec.t * static_cast<double>(om)});
    if (variant == BilinearVariant::zero)
        return osc / static_cast<double>(xi1);
    return osc * cplx{0.0, -2.0} *
           (static_cast<double>(xi) * static_cast<double>(xi2) / static_cast<double>(xi1));
}

/// Lattice convolution out(xi) = sum_{xi1+xi2=xi} kernel * w_hat(xi1) v_hat(xi2);
/// targets that fall off the lattice are dropped.
inline SpectralField bilinear_nf(BilinearVariant variant, const SpectralField& w,
                                 const SpectralField& v, const NormalFormSpec& spec) {
    spec.validate();
    w.check_same_grid(v);
    if (w.grid() != spec.grid) throw ShapeError("bilinear_nf: grid mismatch with spec");
    detail::warn_if_not_positive_support(w);

    const Grid& g = spec.grid;
    SpectralField out(g, false);
    for (int n1 = 1; n1 <= g.lattice_max(); ++n1) {
        const cplx w1 = w.coeff(n1);
        if (w1 == cplx{0, 0}) continue;
        for (int n2 = g.lattice_min(); n2 <= -1; ++n2) {
            const int n = n1 + n2;
            if (n < 1 || n > g.lattice_max()) continue;
            const cplx k = bilinear_kernel(variant, n, n1, n2, spec);
            if (k == cplx{0, 0}) continue;
            out[g.slot(n)] += k * w1 * v.coeff(n2);
        }
    }
    return out;
}

/// Kernel of the second-step trilinear operators at one lattice quadruple.
/// n2_1 composes through xi12 (w-substitution); the others compose through
/// xi23 (v-substitution) with the region split R_{<=M} = {|xi12| <= 1} or
/// {|Omega2| <= M}. The 0-variants divide by -i Omega2_j, nonzero on their
/// support by the masks; a retained zero divisor raises an internal error.
inline cplx trilinear_kernel(TrilinearVariant variant, long long xi, long long xi1,
                             long long xi2, long long xi3, const NormalFormSpec& spec) {
    const long long xi12 = xi1 + xi2;
    const long long xi23 = xi2 + xi3;

    if (variant == TrilinearVariant::n2_1 || variant == TrilinearVariant::n2_0_1) {
        if (!sigma_support(xi, xi12, xi3) || !sigma_support(xi12, xi1, xi2)) return cplx{0, 0};
        const long long om_outer = omega(xi, xi12, xi3);
        if (static_cast<double>(std::llabs(om_outer)) <= spec.M) return cplx{0, 0};
        double m = -2.0 * (static_cast<double>(xi2) / static_cast<double>(xi1));
        m *= detail::shell_factor(spec.N12, xi12) * detail::shell_factor(spec.N1, xi1) *
             detail::shell_factor(spec.N2, xi2) * detail::shell_factor(spec.N3, xi3);
        if (m == 0.0) return cplx{0, 0};
        const long long om2 = om_outer + omega(xi12, xi1, xi2);
        const cplx osc = std::exp(cplx{0.0, -spec.t * static_cast<double>(om2)});
        const cplx m1 = cplx{0.0, m}; // -2i (xi2/xi1) ... carried as i*m with m = -2 xi2/xi1
        if (variant == TrilinearVariant::n2_1) return osc * m1;
        if (om2 == 0)
            throw std::logic_error("trilinear_kernel: zero divisor retained in n2_0_1");
        return osc * m1 / cplx{0.0, -static_cast<double>(om2)};
    }

    // xi23-composed family.
    if (!sigma_support(xi, xi1, xi23)) return cplx{0, 0};
    const long long om_outer = omega(xi, xi1, xi23);
    if (static_cast<double>(std::llabs(om_outer)) <= spec.M) return cplx{0, 0};
    double m_star = static_cast<double>(xi23) / static_cast<double>(xi1);
    m_star *= detail::shell_factor(spec.N23, xi23) * detail::shell_factor(spec.N1, xi1) *
              detail::shell_factor(spec.N2, xi2) * detail::shell_factor(spec.N3, xi3);
    if (m_star == 0.0) return cplx{0, 0};
    const long long om2 = om_outer + omega(xi23, xi2, xi3);
    const bool in_leq = std::llabs(xi12) <= 1 ||
                        static_cast<double>(std::llabs(om2)) <= spec.M;
    const cplx osc = std::exp(cplx{0.0, -spec.t * static_cast<double>(om2)});
    switch (variant) {
        case TrilinearVariant::n2_leqM:
            return in_leq ? osc * cplx{0.0, -m_star} : cplx{0, 0};
        case TrilinearVariant::n2_2:
            return in_leq ? cplx{0, 0} : osc * cplx{0.0, -m_star};
        case TrilinearVariant::n2_0_2: {
            if (in_leq) return cplx{0, 0};
            if (om2 == 0)
                throw std::logic_error("trilinear_kernel: zero divisor retained in n2_0_2");
            return osc * m_star / cplx{0.0, -static_cast<double>(om2)};
        }
        default:
            return cplx{0, 0};
    }
}

inline SpectralField trilinear_nf(TrilinearVariant variant, const SpectralField& w,
                                  const SpectralField& v1, const SpectralField& v2,
                                  const NormalFormSpec& spec) {
    spec.validate();
    w.check_same_grid(v1);
    w.check_same_grid(v2);
    if (w.grid() != spec.grid) throw ShapeError("trilinear_nf: grid mismatch with spec");

    const Grid& g = spec.grid;
    SpectralField out(g, false);
    for (int n1 = g.lattice_min(); n1 <= g.lattice_max(); ++n1) {
        const cplx w1 = w.coeff(n1);
        if (w1 == cplx{0, 0}) continue;
        for (int n2 = g.lattice_min(); n2 <= g.lattice_max(); ++n2) {
            const cplx a2 = v1.coeff(n2);
            if (a2 == cplx{0, 0}) continue;
            const cplx w12 = w1 * a2;
            for (int n3 = g.lattice_min(); n3 <= g.lattice_max(); ++n3) {
                const cplx a3 = v2.coeff(n3);
                if (a3 == cplx{0, 0}) continue;
                const int n = n1 + n2 + n3;
                if (n < g.lattice_min() || n > g.lattice_max()) continue;
                const cplx k = trilinear_kernel(variant, n, n1, n2, n3, spec);
                if (k == cplx{0, 0}) continue;
                out[g.slot(n)] += k * w12 * a3;
            }
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Discrete residual of the first normal-form identity: integration by parts
// in time trades the time integral of N^(1)_{>M} for boundary values of
// N^(1)_0 minus the time integral of N^(1)_0 on the time derivatives.
// ---------------------------------------------------------------------------

/// Interaction representation of the gauge variable: coefficients times e^{-i t n^2}.
inline SpectralField interaction_w(const SpectralField& w, double t) {
    SpectralField out(w.grid(), false);
    const Grid& g = w.grid();
    for (int k = 0; k < g.n_modes; ++k) {
        const double xi = g.freq(k);
        out[k] = std::exp(cplx{0.0, -t * xi * xi}) * w[k];
    }
    return out;
}

/// Interaction representation of v: coefficients times e^{-i t n|n|}.
inline SpectralField interaction_v(const SpectralField& v, double t) {
    SpectralField out(v.grid(), false);
    const Grid& g = v.grid();
    for (int k = 0; k < g.n_modes; ++k) {
        const double xi = g.freq(k);
        out[k] = std::exp(cplx{0.0, -t * xi * std::abs(xi)}) * v[k];
    }
    return out;
}

/// Both sides of the identity evaluated on aligned (v, w) snapshots over the
/// largest window where centered differences exist; trapezoid quadrature in
/// time. Returns ||mismatch||_{H^0} normalized by the boundary-term size.
inline double nf_identity_residual(const Trajectory& traj_v,
                                   const std::vector<SpectralField>& w_snapshots,
                                   const NormalFormSpec& spec) {
    spec.validate();
    if (traj_v.states.size() < 3)
        throw PreconditionError("nf_identity_residual: need at least 3 snapshots");
    if (w_snapshots.size() != traj_v.states.size())
        throw PreconditionError("nf_identity_residual: w snapshots not aligned with v");

    const size_t K = traj_v.states.size();
    const Grid& g = spec.grid;
    std::vector<SpectralField> tw(K, SpectralField(g)), tv(K, SpectralField(g));
    for (size_t k = 0; k < K; ++k) {
        tw[k] = interaction_w(w_snapshots[k], traj_v.times[k]);
        tv[k] = interaction_v(traj_v.states[k], traj_v.times[k]);
    }

    // Window [t_1, t_{K-2}]: centered differences are available at every node.
    const size_t a = 1, b = K - 2;
    if (b <= a) return 0.0;

    std::vector<double> ts(traj_v.times.begin() + a, traj_v.times.begin() + b + 1);
    const auto weights = trapezoid_weights(ts);

    NormalFormSpec at_t = spec;
    SpectralField lhs(g, false), deriv_int(g, false);
    for (size_t k = a; k <= b; ++k) {
        const double wgt = weights[k - a];
        at_t.t = traj_v.times[k];

        SpectralField big = bilinear_nf(BilinearVariant::gt_M, tw[k], tv[k], at_t);
        big *= wgt;
        lhs += big;

        const double h2 = traj_v.times[k + 1] - traj_v.times[k - 1];
        SpectralField dtw(g, false), dtv(g, false);
        for (int j = 0; j < g.n_modes; ++j) {
            dtw[j] = (tw[k + 1][j] - tw[k - 1][j]) / h2;
            dtv[j] = (tv[k + 1][j] - tv[k - 1][j]) / h2;
        }
        SpectralField d1 = bilinear_nf(BilinearVariant::zero, dtw, tv[k], at_t);
        SpectralField d2 = bilinear_nf(BilinearVariant::zero, tw[k], dtv, at_t);
        d1 += d2;
        d1 *= wgt;
        deriv_int += d1;
    }

    at_t.t = traj_v.times[b];
    SpectralField boundary_hi = bilinear_nf(BilinearVariant::zero, tw[b], tv[b], at_t);
    at_t.t = traj_v.times[a];
    SpectralField boundary_lo = bilinear_nf(BilinearVariant::zero, tw[a], tv[a], at_t);

    SpectralField mismatch = lhs;
    mismatch -= boundary_hi;
    mismatch += boundary_lo;
    mismatch += deriv_int;

    const double denom = hs_norm(boundary_hi, 0.0) + hs_norm(boundary_lo, 0.0);
    const double num = hs_norm(mismatch, 0.0);
    if (denom == 0.0) return num;
    return num / denom;
}

// ---------------------------------------------------------------------------
// Randomized operator-norm audits.
// ---------------------------------------------------------------------------

enum class AuditOperator { identity, N1_leqM, N1_0, N2_leqM, N2_0_dyadic };

inline std::string audit_operator_name(AuditOperator op) {
    switch (op) {
        case AuditOperator::identity: return "identity";
        case AuditOperator::N1_leqM: return "N1_leqM";
        case AuditOperator::N1_0: return "N1_0";
        case AuditOperator::N2_leqM: return "N2_leqM";
        case AuditOperator::N2_0_dyadic: return "N2_0_dyadic";
    }
    return "?";
}

struct RatioReport {
    std::string operator_name;
    std::vector<double> params;     // M values, or N_max for the dyadic audit
    std::vector<double> max_ratios;
    double slope = 0.0;             // log-log fit across the parameter grid
    int n_samples = 0;
    std::uint64_t seed = 0;
};

namespace detail {

inline void normalize_to(SpectralField& f, double target, double s) {
    const double n = hs_norm(f, s);
    if (n > 0.0) f *= target / n;
}

/// A few sweeps of greedy coordinate ascent on the best sample: perturb one
/// complex coefficient at a time, keep improvements.
template <typename RatioFn>
double coordinate_ascent(RatioFn ratio, std::vector<SpectralField>& fields, int sweeps = 2) {
    double best = ratio(fields);
    for (int sweep = 0; sweep < sweeps; ++sweep) {
        const double step = 0.5 / (1 << sweep);
        for (auto& f : fields) {
            for (int k = 0; k < f.size(); ++k) {
                if (f[k] == cplx{0, 0}) continue;
                const cplx saved = f[k];
                const double mag = std::abs(saved);
                for (const cplx trial :
                     {saved * (1.0 + step), saved * (1.0 - step),
                      saved + cplx{0.0, step * mag}, saved - cplx{0.0, step * mag}}) {
                    f[k] = trial;
                    const double r = ratio(fields);
                    if (r > best) {
                        best = r;
                    } else {
                        f[k] = saved;
                    }
                }
            }
        }
    }
    return best;
}

} // namespace detail

/// Monte-Carlo estimate of the operator-norm growth in the audit parameter:
/// unit-norm support-conditioned complex-Gaussian inputs, max ratio per
/// parameter value, plus a greedy refinement of the best sample. Degenerate
/// (zero-norm) draws are resampled.
inline RatioReport ratio_estimate(AuditOperator op, const NormalFormSpec& base_spec,
                                  int n_samples, const std::vector<double>& param_grid,
                                  std::uint64_t seed) {
    base_spec.validate();
    if (n_samples < 100) throw ConfigError("ratio_estimate: n_samples must be >= 100");
    if (param_grid.size() < 2) throw ConfigError("ratio_estimate: need >= 2 parameter values");

    const Grid& g = base_spec.grid;
    const int top = g.lattice_max();
    RatioReport report;
    report.operator_name = audit_operator_name(op);
    report.n_samples = n_samples;
    report.seed = seed;

    for (size_t pi = 0; pi < param_grid.size(); ++pi) {
        const double param = param_grid[pi];
        NormalFormSpec spec = base_spec;

        int arity = 2;
        std::function<double(const std::vector<SpectralField>&)> ratio;
        switch (op) {
            case AuditOperator::identity:
                arity = 1;
                ratio = [&](const std::vector<SpectralField>& u) {
                    return hs_norm(u[0], spec.s) / hs_norm(u[0], spec.s);
                };
                break;
            case AuditOperator::N1_leqM:
            case AuditOperator::N1_0: {
                spec.M = param;
                const auto variant = op == AuditOperator::N1_leqM ? BilinearVariant::leq_M
                                                                  : BilinearVariant::zero;
                ratio = [&, variant](const std::vector<SpectralField>& u) {
                    const double d = hs_norm(u[0], spec.s) * hs_norm(u[1], 0.0);
                    if (d == 0.0) return 0.0;
                    return hs_norm(bilinear_nf(variant, u[0], u[1], spec),
                                   spec.s + spec.theta) / d;
                };
                break;
            }
            case AuditOperator::N2_leqM:
                spec.M = param;
                arity = 3;
                ratio = [&](const std::vector<SpectralField>& u) {
                    const double d =
                        hs_norm(u[0], spec.s) * hs_norm(u[1], spec.s) * hs_norm(u[2], spec.s);
                    if (d == 0.0) return 0.0;
                    return hs_norm(trilinear_nf(TrilinearVariant::n2_leqM, u[0], u[1], u[2], spec),
                                   spec.s + spec.theta) / d;
                };
                break;
            case AuditOperator::N2_0_dyadic: {
                // param = N_max on the w slot; fixed small med/min shells.
                const int nmax = static_cast<int>(param);
                spec.N1 = nmax;
                spec.N2 = 4;
                spec.N3 = 4;
                arity = 3;
                ratio = [&](const std::vector<SpectralField>& u) {
                    const double d = hs_norm(u[0], 0.0) * hs_norm(u[1], 0.0) * hs_norm(u[2], 0.0);
                    if (d == 0.0) return 0.0;
                    const double med_min = std::pow(4.0, spec.s) * std::pow(4.0, spec.s);
                    return hs_norm(trilinear_nf(TrilinearVariant::n2_0_1, u[0], u[1], u[2], spec),
                                   spec.s + spec.theta) / (d * med_min);
                };
                break;
            }
        }

        auto draw = [&](std::mt19937_64& rng) {
            std::vector<SpectralField> u;
            if (op == AuditOperator::identity) {
                SpectralField f = random_supported_field(g, -top, top, rng);
                detail::normalize_to(f, 1.0, spec.s);
                u.push_back(f);
                return u;
            }
            if (op == AuditOperator::N2_0_dyadic) {
                const int nmax = static_cast<int>(param);
                SpectralField w = random_supported_field(g, nmax / 2, std::min(2 * nmax, top), rng);
                detail::normalize_to(w, 1.0, 0.0);
                SpectralField v1 = random_supported_field(g, -8, -2, rng);
                detail::normalize_to(v1, 1.0, 0.0);
                SpectralField v2 = random_supported_field(g, -8, -2, rng);
                detail::normalize_to(v2, 1.0, 0.0);
                u = {w, v1, v2};
                return u;
            }
            SpectralField w = random_supported_field(g, 1, top, rng);
            detail::normalize_to(w, 1.0, spec.s);
            u.push_back(w);
            for (int j = 1; j < arity; ++j) {
                // The trilinear sigma only constrains the pair sum xi2 + xi3,
                // so the N2_leqM slots stay full-lattice; bilinear v slots are
                // conditioned on the negative half-line sigma reads.
                const int hi = op == AuditOperator::N2_leqM ? top : -1;
                SpectralField v = random_supported_field(g, g.lattice_min(), hi, rng);
                detail::normalize_to(v, 1.0, op == AuditOperator::N2_leqM ? spec.s : 0.0);
                u.push_back(v);
            }
            return u;
        };

        double best = 0.0;
        std::vector<SpectralField> best_fields;
        for (int i = 0; i < n_samples; ++i) {
            auto rng = make_rng(derive_seed(seed, pi, static_cast<std::uint64_t>(i)));
            auto fields = draw(rng);
            bool degenerate = false;
            for (const auto& f : fields)
                if (hs_norm(f, 0.0) == 0.0) degenerate = true;
            if (degenerate) { --i; continue; }
            const double r = ratio(fields);
            if (r > best) {
                best = r;
                best_fields = fields;
            }
        }
        if (!best_fields.empty() && op != AuditOperator::identity)
            best = detail::coordinate_ascent(ratio, best_fields);

        report.params.push_back(param);
        report.max_ratios.push_back(best);
    }

    report.slope = fit_loglog_slope(report.params, report.max_ratios);
    return report;
}

} // namespace ilwlab
