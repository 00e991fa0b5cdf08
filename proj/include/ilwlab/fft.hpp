#pragma once

#include <complex>
#include <mutex>
#include <unordered_map>
#include <vector>

#include <fftw3.h>

#include "ilwlab/errors.hpp"

namespace ilwlab::detail {

/// Process-wide cache of FFTW plans, one per (length, direction).
/// Plans are created with FFTW_UNALIGNED so they can be replayed on any
/// buffer via fftw_execute_dft; plan creation is serialized (the FFTW
/// planner is not thread-safe), replay is.
class FftEngine {
public:
    static void run(int n, int sign, const std::complex<double>* in,
                    std::complex<double>* out) {
        fftw_plan plan = instance().get_plan(n, sign);
        // fftw_execute_dft does not modify the input for 1d c2c out-of-place.
        fftw_execute_dft(plan,
                         reinterpret_cast<fftw_complex*>(
                             const_cast<std::complex<double>*>(in)),
                         reinterpret_cast<fftw_complex*>(out));
    }

private:
    static FftEngine& instance() {
        static FftEngine e;
        return e;
    }

    fftw_plan get_plan(int n, int sign) {
        std::lock_guard<std::mutex> lock(mutex_);
        const long long key = static_cast<long long>(n) * 4 + (sign == FFTW_FORWARD ? 0 : 1);
        auto it = plans_.find(key);
        if (it != plans_.end()) return it->second;
        std::vector<std::complex<double>> scratch_in(n), scratch_out(n);
        fftw_plan plan = fftw_plan_dft_1d(
            n, reinterpret_cast<fftw_complex*>(scratch_in.data()),
            reinterpret_cast<fftw_complex*>(scratch_out.data()), sign,
            FFTW_ESTIMATE | FFTW_UNALIGNED);
        if (!plan) throw std::runtime_error("FFTW plan creation failed");
        plans_.emplace(key, plan);
        return plan;
    }

    std::mutex mutex_;
    std::unordered_map<long long, fftw_plan> plans_;
};

/// Unnormalized forward DFT: out_k = sum_j in_j e^{-2 pi i jk/n}.
inline void dft_forward(const std::vector<std::complex<double>>& in,
                        std::vector<std::complex<double>>& out) {
    out.resize(in.size());
    FftEngine::run(static_cast<int>(in.size()), FFTW_FORWARD, in.data(), out.data());
}

/// Unnormalized backward DFT: out_j = sum_k in_k e^{+2 pi i jk/n}.
inline void dft_backward(const std::vector<std::complex<double>>& in,
                         std::vector<std::complex<double>>& out) {
    out.resize(in.size());
    FftEngine::run(static_cast<int>(in.size()), FFTW_BACKWARD, in.data(), out.data());
}

} // namespace ilwlab::detail
