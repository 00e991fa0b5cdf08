#pragma once

#include <cstdint>
#include <random>

#include "ilwlab/field.hpp"

namespace ilwlab {

/// splitmix64 step; used to derive independent per-sample seeds from
/// (seed, index) so results do not depend on evaluation order.
inline std::uint64_t mix_seed(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0) {
    return mix_seed(mix_seed(seed ^ 0x6a09e667f3bcc908ULL) + a * 0x9e3779b97f4a7c15ULL + b);
}

inline std::mt19937_64 make_rng(std::uint64_t seed) { return std::mt19937_64(mix_seed(seed)); }

/// Real field from i.i.d. standard normal physical samples.
inline SpectralField random_real_field(const Grid& grid, std::mt19937_64& rng) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<double> samples(grid.n_modes);
    for (auto& s : samples) s = gauss(rng);
    return transform(samples, grid);
}

/// Complex-Gaussian coefficients on lattice frequencies n in [lo, hi].
inline SpectralField random_supported_field(const Grid& grid, int lo, int hi,
                                            std::mt19937_64& rng) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    SpectralField f(grid, false);
    for (int n = std::max(lo, grid.lattice_min()); n <= std::min(hi, grid.lattice_max()); ++n)
        f.set_coeff(n, cplx{gauss(rng), gauss(rng)});
    return f;
}

} // namespace ilwlab
