#pragma once

#include <cmath>
#include <string>

#include "ilwlab/errors.hpp"
#include "ilwlab/field.hpp"

namespace ilwlab {

/// Canonical smooth bump: 1 on [-1,1], supported in [-2,2], built from
/// h(t) = e^{-1/t} (t > 0).
inline double lp_bump(double xi) {
    auto h = [](double t) { return t > 0.0 ? std::exp(-1.0 / t) : 0.0; };
    const double a = h(2.0 - std::abs(xi));
    const double b = h(std::abs(xi) - 1.0);
    if (a == 0.0) return 0.0;
    return a / (a + b);
}

/// psi_N(xi) = psi(xi/N) - psi(2 xi/N); supported where |xi| ~ N.
inline double lp_shell(double xi, double N) {
    return lp_bump(xi / N) - lp_bump(2.0 * xi / N);
}

enum class Projector { dyadic_N, leq_N, plus, minus, lo, hi, plus_hi, zero_mode };

inline bool is_power_of_two(int n) { return n >= 1 && (n & (n - 1)) == 0; }

/// Frequency projections. Dyadic kinds act on the physical frequency with
/// the concrete bump above; plus/minus are sharp and strict.
inline SpectralField project(const SpectralField& f, Projector kind, int N = 0) {
    const Grid& g = f.grid();
    if ((kind == Projector::dyadic_N || kind == Projector::leq_N) && !is_power_of_two(N))
        throw ConfigError("project: N must be a power of two, got " + std::to_string(N));

    const bool sided = kind == Projector::plus || kind == Projector::minus ||
                       kind == Projector::plus_hi;
    SpectralField out(g, f.reality_flag() && !sided);
    for (int k = 0; k < g.n_modes; ++k) {
        const double xi = g.freq(k);
        double w = 0.0;
        switch (kind) {
            case Projector::dyadic_N: w = lp_shell(xi, N); break;
            case Projector::leq_N:    w = lp_bump(xi / N); break;
            case Projector::plus:     w = xi > 0.0 ? 1.0 : 0.0; break;
            case Projector::minus:    w = xi < 0.0 ? 1.0 : 0.0; break;
            case Projector::lo:       w = lp_bump(xi); break;
            case Projector::hi:       w = 1.0 - lp_bump(xi); break;
            case Projector::plus_hi:  w = xi > 0.0 ? 1.0 - lp_bump(xi) : 0.0; break;
            case Projector::zero_mode: w = xi == 0.0 ? 1.0 : 0.0; break;
        }
        out[k] = w * f[k];
    }
    return out;
}

} // namespace ilwlab
