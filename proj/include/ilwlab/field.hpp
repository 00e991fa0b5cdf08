#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include "ilwlab/errors.hpp"
#include "ilwlab/fft.hpp"
#include "ilwlab/grid.hpp"

namespace ilwlab {

using cplx = std::complex<double>;

/// Fourier coefficients of a function on a Grid, with the convention
///   f(x) = sum_n c_n e^{i n x 2 pi / period},
///   c_n  = (1/period) * integral e^{-i n x 2 pi / period} f(x) dx.
/// Storage is FFT order (slot k holds lattice frequency k for k < n/2,
/// k - n otherwise).
class SpectralField {
public:
    SpectralField() = default;
    SpectralField(Grid grid, bool reality_flag = false)
        : grid_(grid), coeffs_(grid.n_modes, cplx{0.0, 0.0}), reality_(reality_flag) {}
    SpectralField(Grid grid, std::vector<cplx> coeffs, bool reality_flag)
        : grid_(grid), coeffs_(std::move(coeffs)), reality_(reality_flag) {
        if (static_cast<int>(coeffs_.size()) != grid_.n_modes)
            throw ShapeError("SpectralField: coefficient array length != n_modes");
    }

    const Grid& grid() const { return grid_; }
    int size() const { return grid_.n_modes; }
    bool reality_flag() const { return reality_; }
    void set_reality_flag(bool r) { reality_ = r; }

    /// Coefficient at lattice frequency n (0 outside the lattice).
    cplx coeff(int n) const {
        return grid_.on_lattice(n) ? coeffs_[grid_.slot(n)] : cplx{0.0, 0.0};
    }
    void set_coeff(int n, cplx v) {
        if (!grid_.on_lattice(n))
            throw RangeError("set_coeff: frequency off the lattice");
        coeffs_[grid_.slot(n)] = v;
    }

    /// FFT-ordered raw storage.
    std::vector<cplx>& data() { return coeffs_; }
    const std::vector<cplx>& data() const { return coeffs_; }
    cplx& operator[](int k) { return coeffs_[k]; }
    const cplx& operator[](int k) const { return coeffs_[k]; }

    /// Mean value over the period; equals c_0 under this convention.
    double mean() const { return coeffs_[0].real(); }
    cplx mean_complex() const { return coeffs_[0]; }

    SpectralField& operator+=(const SpectralField& o) {
        check_same_grid(o);
        for (int k = 0; k < size(); ++k) coeffs_[k] += o.coeffs_[k];
        reality_ = reality_ && o.reality_;
        return *this;
    }
    SpectralField& operator-=(const SpectralField& o) {
        check_same_grid(o);
        for (int k = 0; k < size(); ++k) coeffs_[k] -= o.coeffs_[k];
        reality_ = reality_ && o.reality_;
        return *this;
    }
    SpectralField& operator*=(double a) {
        for (auto& c : coeffs_) c *= a;
        return *this;
    }

    friend SpectralField operator+(SpectralField a, const SpectralField& b) { return a += b; }
    friend SpectralField operator-(SpectralField a, const SpectralField& b) { return a -= b; }
    friend SpectralField operator*(double a, SpectralField f) { return f *= a; }

    void check_same_grid(const SpectralField& o) const {
        if (grid_ != o.grid_) throw ShapeError("SpectralField: grid mismatch");
    }

private:
    Grid grid_;
    std::vector<cplx> coeffs_;
    bool reality_ = false;
};

/// Hermitian symmetry over paired lattice frequencies plus a real mean mode.
/// The unpaired Nyquist slot -n/2 has no +n/2 partner and is exempt.
inline bool is_hermitian(const SpectralField& f, double tol = 1e-12) {
    double scale = 0.0;
    for (const auto& c : f.data()) scale = std::max(scale, std::abs(c));
    const double eps = tol * std::max(1.0, scale);
    if (std::abs(f.coeff(0).imag()) > eps) return false;
    for (int n = 1; n <= f.grid().lattice_max(); ++n) {
        if (std::abs(f.coeff(-n) - std::conj(f.coeff(n))) > eps) return false;
    }
    return true;
}

inline SpectralField transform(const std::vector<cplx>& samples, const Grid& grid) {
    if (static_cast<int>(samples.size()) != grid.n_modes)
        throw ShapeError("transform: sample array length != n_modes");
    std::vector<cplx> out;
    detail::dft_forward(samples, out);
    const double inv_n = 1.0 / grid.n_modes;
    double max_imag = 0.0, max_abs = 0.0;
    for (const auto& s : samples) {
        max_imag = std::max(max_imag, std::abs(s.imag()));
        max_abs = std::max(max_abs, std::abs(s));
    }
    for (auto& c : out) c *= inv_n;
    const bool real_input = max_imag <= 1e-14 * std::max(1.0, max_abs);
    return SpectralField(grid, std::move(out), real_input);
}

inline SpectralField transform(const std::vector<double>& samples, const Grid& grid) {
    if (static_cast<int>(samples.size()) != grid.n_modes)
        throw ShapeError("transform: sample array length != n_modes");
    std::vector<cplx> buf(samples.begin(), samples.end());
    std::vector<cplx> out;
    detail::dft_forward(buf, out);
    const double inv_n = 1.0 / grid.n_modes;
    for (auto& c : out) c *= inv_n;
    return SpectralField(grid, std::move(out), true);
}

inline std::vector<cplx> inverse_transform(const SpectralField& f) {
    std::vector<cplx> out;
    detail::dft_backward(f.data(), out);
    return out;
}

/// Physical samples of a real-flagged field (imaginary parts dropped).
inline std::vector<double> physical_samples(const SpectralField& f) {
    std::vector<cplx> z = inverse_transform(f);
    std::vector<double> out(z.size());
    for (size_t j = 0; j < z.size(); ++j) out[j] = z[j].real();
    return out;
}

/// Resample a field's function values on a finer grid with m >= n points
/// (trigonometric interpolation via zero padding).
inline std::vector<cplx> padded_samples(const SpectralField& f, int m) {
    const Grid& g = f.grid();
    if (m < g.n_modes) throw ShapeError("padded_samples: m < n_modes");
    std::vector<cplx> big(m, cplx{0.0, 0.0});
    for (int n = g.lattice_min(); n <= g.lattice_max(); ++n) {
        int slot = n >= 0 ? n : n + m;
        big[slot] = f.coeff(n);
    }
    std::vector<cplx> out;
    detail::dft_backward(big, out);
    return out;
}

/// Band-truncate coefficients computed on an m-point grid back to `grid`.
inline SpectralField truncate_to_grid(const std::vector<cplx>& big_coeffs,
                                      const Grid& grid, bool reality_flag) {
    const int m = static_cast<int>(big_coeffs.size());
    SpectralField f(grid, reality_flag);
    for (int n = grid.lattice_min(); n <= grid.lattice_max(); ++n) {
        int slot = n >= 0 ? n : n + m;
        f.set_coeff(n, big_coeffs[slot]);
    }
    return f;
}

// ---------------------------------------------------------------------------
// Norms. H^s carries the factor `period` so that H^0 coincides with L^2:
//   ||f||_{H^s}^2 = period * sum_n <xi_n>^{2s} |c_n|^2.
// ---------------------------------------------------------------------------

inline double hs_norm(const SpectralField& f, double s) {
    double acc = 0.0;
    const Grid& g = f.grid();
    for (int k = 0; k < g.n_modes; ++k) {
        const double xi = g.freq(k);
        const double w = std::pow(1.0 + xi * xi, s);
        acc += w * std::norm(f[k]);
    }
    return std::sqrt(g.period * acc);
}

inline double l2_norm(const SpectralField& f) { return hs_norm(f, 0.0); }

inline double linf_norm(const SpectralField& f) {
    auto z = inverse_transform(f);
    double m = 0.0;
    for (const auto& v : z) m = std::max(m, std::abs(v));
    return m;
}

/// L^p by the rectangle rule on the physical samples (spectrally accurate
/// for smooth periodic integrands). p = infinity gives the sample sup.
inline double lp_norm(const SpectralField& f, double p) {
    if (p < 1.0) throw ConfigError("lp_norm: p must be >= 1");
    if (std::isinf(p)) return linf_norm(f);
    auto z = inverse_transform(f);
    double acc = 0.0;
    for (const auto& v : z) acc += std::pow(std::abs(v), p);
    return std::pow(f.grid().spacing() * acc, 1.0 / p);
}

} // namespace ilwlab
