#pragma once

#include <cmath>
#include <numbers>
#include <string>

#include "ilwlab/errors.hpp"

namespace ilwlab {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Uniform periodic lattice: n_modes equispaced points on [0, period),
/// frequency lattice {-n_modes/2, ..., n_modes/2 - 1} scaled by 2*pi/period.
struct Grid {
    int n_modes = 0;
    double period = kTwoPi;

    double spacing() const { return period / n_modes; }
    double x(int j) const { return j * spacing(); }

    /// Scale between integer lattice index and physical frequency.
    double freq_unit() const { return kTwoPi / period; }

    int lattice_min() const { return -n_modes / 2; }
    int lattice_max() const { return n_modes / 2 - 1; }

    /// Integer lattice frequency of FFT-ordered storage slot k.
    int lattice_freq(int k) const { return k < n_modes / 2 ? k : k - n_modes; }
    /// Physical frequency of storage slot k.
    double freq(int k) const { return lattice_freq(k) * freq_unit(); }
    /// Storage slot of integer lattice frequency n.
    int slot(int n) const { return n >= 0 ? n : n + n_modes; }

    bool on_lattice(int n) const { return n >= lattice_min() && n <= lattice_max(); }

    bool operator==(const Grid& o) const {
        return n_modes == o.n_modes && period == o.period;
    }
    bool operator!=(const Grid& o) const { return !(*this == o); }
};

inline Grid make_grid(int n_modes, double period = kTwoPi) {
    if (n_modes < 8 || n_modes % 2 != 0)
        throw ConfigError("make_grid: n_modes must be even and >= 8, got " +
                          std::to_string(n_modes));
    if (!(period > 0.0) || !std::isfinite(period))
        throw ConfigError("make_grid: period must be positive and finite");
    return Grid{n_modes, period};
}

} // namespace ilwlab
