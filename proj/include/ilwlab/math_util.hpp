#pragma once

#include <cmath>
#include <vector>

#include "ilwlab/errors.hpp"

namespace ilwlab {

/// Least-squares slope of y against x.
inline double fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2)
        throw ShapeError("fit_slope: need two or more matched points");
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

/// Slope of log y against log x.
inline double fit_loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
    std::vector<double> lx(x.size()), ly(y.size());
    for (size_t i = 0; i < x.size(); ++i) {
        if (!(x[i] > 0.0) || !(y[i] > 0.0))
            throw PreconditionError("fit_loglog_slope: values must be positive");
        lx[i] = std::log(x[i]);
        ly[i] = std::log(y[i]);
    }
    return fit_slope(lx, ly);
}

/// Trapezoid weights for nodes t[0..K-1]; non-uniform spacing allowed.
inline std::vector<double> trapezoid_weights(const std::vector<double>& t) {
    const size_t K = t.size();
    std::vector<double> w(K, 0.0);
    for (size_t k = 0; k + 1 < K; ++k) {
        const double h = t[k + 1] - t[k];
        w[k] += 0.5 * h;
        w[k + 1] += 0.5 * h;
    }
    return w;
}

} // namespace ilwlab
