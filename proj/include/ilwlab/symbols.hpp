#pragma once

#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include "ilwlab/errors.hpp"
#include "ilwlab/field.hpp"
#include "ilwlab/grid.hpp"

namespace ilwlab {

// ---------------------------------------------------------------------------
// Stable hyperbolic-cotangent kernels. The differences coth(x) - 1/x and
// coth(x) - sgn(x) are needed as such; forming them by subtracting large
// values loses all digits near 0 and near infinity, so each has its own
// evaluation.
// ---------------------------------------------------------------------------

/// coth(x). Laurent series below 0.1, saturated tail above 20.
inline double coth(double x) {
    const double a = std::abs(x);
    if (a < 1e-1) {
        const double x2 = x * x;
        return 1.0 / x + x * (1.0 / 3.0 + x2 * (-1.0 / 45.0 + x2 * (2.0 / 945.0)));
    }
    if (a > 20.0) return std::copysign(1.0 + 2.0 * std::exp(-2.0 * a), x);
    return 1.0 / std::tanh(x);
}

/// coth(x) - 1/x, continuously extended by 0 at x = 0.
inline double coth_minus_inv(double x) {
    if (x == 0.0) return 0.0;
    const double a = std::abs(x);
    if (a < 1e-1) {
        const double x2 = x * x;
        return x * (1.0 / 3.0 + x2 * (-1.0 / 45.0 + x2 * (2.0 / 945.0)));
    }
    if (a > 20.0) return std::copysign(1.0 + 2.0 * std::exp(-2.0 * a), x) - 1.0 / x;
    return 1.0 / std::tanh(x) - 1.0 / x;
}

/// coth(x) - sgn(x) = sgn(x) * 2 / (e^{2|x|} - 1), exact and stable for all
/// x != 0 via expm1; 0 at x = 0.
inline double coth_minus_sgn(double x) {
    if (x == 0.0) return 0.0;
    return std::copysign(2.0 / std::expm1(2.0 * std::abs(x)), x);
}

/// x * (coth(x) - sgn(x)); the removable singularity at 0 has value 1.
inline double x_coth_minus_sgn(double x) {
    if (x == 0.0) return 1.0;
    return std::abs(x) * 2.0 / std::expm1(2.0 * std::abs(x));
}

// ---------------------------------------------------------------------------
// Diagonal Fourier multipliers.
// ---------------------------------------------------------------------------

enum class SymbolKind {
    hilbert,        // -i sgn(xi)
    t_delta,        // -i coth(delta xi),       0 at xi = 0 by convention
    q_delta,        // -i (coth(delta xi) - sgn xi),             0 at xi = 0
    g_delta,        // -i (coth(delta xi) - 1/(delta xi)),       0 at xi = 0
    q_effective,    // xi (coth(delta xi) - sgn xi),           1/delta at 0
    dx,             // i xi
    dx_inv,         // 1/(i xi), 0 at xi = 0
    j_s,            // <xi>^s
    free_propagator // e^{t l(xi)} for the tagged linear flow
};

enum class PropagatorTag { ilw, bo, kdv, kdv_third, silw, gauged_free };

struct MultiplierSpec {
    SymbolKind kind;
    double delta = 0.0;
    double s = 0.0;
    double t = 0.0;
    double m0 = 0.0; // gauged_free only
    PropagatorTag tag = PropagatorTag::bo;

    static MultiplierSpec hilbert() { return {SymbolKind::hilbert}; }
    static MultiplierSpec t_delta(double delta) { return with_delta(SymbolKind::t_delta, delta); }
    static MultiplierSpec q_delta(double delta) { return with_delta(SymbolKind::q_delta, delta); }
    static MultiplierSpec g_delta(double delta) { return with_delta(SymbolKind::g_delta, delta); }
    static MultiplierSpec q_effective(double delta) {
        return with_delta(SymbolKind::q_effective, delta);
    }
    static MultiplierSpec dx() { return {SymbolKind::dx}; }
    static MultiplierSpec dx_inv() { return {SymbolKind::dx_inv}; }
    static MultiplierSpec j_s(double s) {
        MultiplierSpec m{SymbolKind::j_s};
        m.s = s;
        return m;
    }
    static MultiplierSpec free_propagator(PropagatorTag tag, double t, double delta = 0.0,
                                          double m0 = 0.0) {
        MultiplierSpec m{SymbolKind::free_propagator};
        m.tag = tag;
        m.t = t;
        m.delta = delta;
        m.m0 = m0;
        if ((tag == PropagatorTag::ilw || tag == PropagatorTag::silw) &&
            !(delta > 0.0))
            throw ConfigError("free_propagator: delta must be positive for ilw/silw");
        return m;
    }

    /// m(-xi) = conj(m(xi)); everything except the gauged free flow.
    bool reality_preserving() const { return tag_reality(kind, tag); }

private:
    static MultiplierSpec with_delta(SymbolKind k, double delta) {
        if (!(delta > 0.0)) throw ConfigError("multiplier: delta must be positive");
        MultiplierSpec m{k};
        m.delta = delta;
        return m;
    }
    static bool tag_reality(SymbolKind k, PropagatorTag tag) {
        if (k == SymbolKind::free_propagator) return tag != PropagatorTag::gauged_free;
        return true;
    }
};

/// i * omega(xi) for the tagged dispersive flow; purely imaginary for every
/// tag except gauged_free (whose phase is i(xi^2 - m0) on the gauge side).
inline cplx linear_phase_rate(PropagatorTag tag, double xi, double delta, double m0) {
    switch (tag) {
        case PropagatorTag::ilw:
            if (std::isinf(delta)) return cplx{0.0, xi * std::abs(xi)};
            return cplx{0.0, xi * xi * coth_minus_inv(delta * xi)};
        case PropagatorTag::bo:
            return cplx{0.0, xi * std::abs(xi)};
        case PropagatorTag::kdv:
            return cplx{0.0, xi * xi * xi};
        case PropagatorTag::kdv_third:
            return cplx{0.0, xi * xi * xi / 3.0};
        case PropagatorTag::silw:
            return cplx{0.0, xi * xi * coth_minus_inv(delta * xi) / delta};
        case PropagatorTag::gauged_free:
            return cplx{0.0, xi * xi - m0};
    }
    return cplx{0.0, 0.0};
}

inline cplx symbol_value(const MultiplierSpec& spec, double xi) {
    switch (spec.kind) {
        case SymbolKind::hilbert:
            return xi == 0.0 ? cplx{0, 0} : cplx{0.0, -std::copysign(1.0, xi)};
        case SymbolKind::t_delta:
            return xi == 0.0 ? cplx{0, 0} : cplx{0.0, -coth(spec.delta * xi)};
        case SymbolKind::q_delta:
            return cplx{0.0, -coth_minus_sgn(spec.delta * xi)};
        case SymbolKind::g_delta:
            return cplx{0.0, -coth_minus_inv(spec.delta * xi)};
        case SymbolKind::q_effective:
            // xi (coth(delta xi) - sgn xi) = x_coth_minus_sgn(delta xi)/delta,
            // the continuous extension worth 1/delta at xi = 0.
            return cplx{x_coth_minus_sgn(spec.delta * xi) / spec.delta, 0.0};
        case SymbolKind::dx:
            return cplx{0.0, xi};
        case SymbolKind::dx_inv:
            return xi == 0.0 ? cplx{0, 0} : cplx{0.0, -1.0 / xi};
        case SymbolKind::j_s:
            return cplx{std::pow(1.0 + xi * xi, spec.s / 2.0), 0.0};
        case SymbolKind::free_propagator:
            return std::exp(spec.t * linear_phase_rate(spec.tag, xi, spec.delta, spec.m0));
    }
    return cplx{0, 0};
}

/// True for kinds whose symbol is imaginary and odd: the unpaired Nyquist
/// slot of an even grid must carry 0 there to keep real fields real.
inline bool odd_imaginary_kind(SymbolKind k) {
    switch (k) {
        case SymbolKind::hilbert:
        case SymbolKind::t_delta:
        case SymbolKind::q_delta:
        case SymbolKind::g_delta:
        case SymbolKind::dx:
        case SymbolKind::dx_inv:
            return true;
        default:
            return false;
    }
}

/// Symbol values over the grid's frequency lattice, FFT storage order.
inline std::vector<cplx> make_symbol(const MultiplierSpec& spec, const Grid& grid) {
    std::vector<cplx> sym(grid.n_modes);
    for (int k = 0; k < grid.n_modes; ++k) sym[k] = symbol_value(spec, grid.freq(k));
    if (odd_imaginary_kind(spec.kind)) sym[grid.slot(grid.lattice_min())] = cplx{0, 0};
    return sym;
}

inline SpectralField apply_symbol(const SpectralField& f, const MultiplierSpec& spec) {
    const auto sym = make_symbol(spec, f.grid());
    SpectralField out(f.grid(), f.reality_flag() && spec.reality_preserving());
    for (int k = 0; k < f.size(); ++k) out[k] = sym[k] * f[k];
    return out;
}

inline SpectralField apply_symbol(const SpectralField& f, const std::vector<cplx>& sym,
                                  bool preserves_reality = false) {
    if (sym.size() != f.data().size()) throw ShapeError("apply_symbol: symbol length mismatch");
    SpectralField out(f.grid(), f.reality_flag() && preserves_reality);
    for (int k = 0; k < f.size(); ++k) out[k] = sym[k] * f[k];
    return out;
}

} // namespace ilwlab
