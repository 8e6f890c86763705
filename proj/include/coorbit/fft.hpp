#pragma once

// Thin RAII layer over FFTW's complex 1-D and 2-D transforms.
//
// Plans are created with FFTW_ESTIMATE so repeated runs use the same
// algorithm and produce bitwise-identical results. FFTW's planner is not
// thread-safe; plans are cached per thread.

#include <fftw3.h>

#include <complex>
#include <cstddef>
#include <cstring>
#include <map>
#include <memory>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

namespace coorbit {

using cplx = std::complex<double>;

namespace detail {

class FftwPlan {
public:
    FftwPlan(std::size_t rows, std::size_t cols, int direction) : rows_(rows), cols_(cols) {
        const std::size_t n = rows * cols;
        in_ = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n));
        out_ = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n));
        if (!in_ || !out_) {
            release();
            throw std::bad_alloc();
        }
        if (rows == 1) {
            plan_ = fftw_plan_dft_1d(static_cast<int>(cols), in_, out_, direction, FFTW_ESTIMATE);
        } else {
            plan_ = fftw_plan_dft_2d(static_cast<int>(rows), static_cast<int>(cols), in_, out_, direction,
                                     FFTW_ESTIMATE);
        }
        if (!plan_) {
            release();
            throw std::runtime_error("fftw: plan creation failed");
        }
    }
    FftwPlan(const FftwPlan&) = delete;
    FftwPlan& operator=(const FftwPlan&) = delete;
    ~FftwPlan() { release(); }

    void execute(std::span<const cplx> in, std::span<cplx> out) {
        const std::size_t n = rows_ * cols_;
        if (in.size() != n || out.size() != n) throw std::invalid_argument("fftw: size mismatch");
        std::memcpy(in_, in.data(), sizeof(fftw_complex) * n);
        fftw_execute(plan_);
        std::memcpy(static_cast<void*>(out.data()), out_, sizeof(fftw_complex) * n);
    }

private:
    void release() {
        if (plan_) fftw_destroy_plan(plan_);
        if (in_) fftw_free(in_);
        if (out_) fftw_free(out_);
        plan_ = nullptr;
        in_ = out_ = nullptr;
    }

    std::size_t rows_;
    std::size_t cols_;
    fftw_complex* in_ = nullptr;
    fftw_complex* out_ = nullptr;
    fftw_plan plan_ = nullptr;
};

inline FftwPlan& cached_plan(std::size_t rows, std::size_t cols, int direction) {
    using Key = std::pair<std::pair<std::size_t, std::size_t>, int>;
    thread_local std::map<Key, std::unique_ptr<FftwPlan>> cache;
    Key key{{rows, cols}, direction};
    auto it = cache.find(key);
    if (it == cache.end()) {
        it = cache.emplace(key, std::make_unique<FftwPlan>(rows, cols, direction)).first;
    }
    return *it->second;
}

}  // namespace detail

/// Unnormalized forward DFT: X[k] = sum_n x[n] exp(-2 pi i n k / N).
inline void fft(std::span<const cplx> in, std::span<cplx> out) {
    detail::cached_plan(1, in.size(), FFTW_FORWARD).execute(in, out);
}

/// Unnormalized inverse DFT: x[n] = sum_k X[k] exp(+2 pi i n k / N).
inline void ifft(std::span<const cplx> in, std::span<cplx> out) {
    detail::cached_plan(1, in.size(), FFTW_BACKWARD).execute(in, out);
}

inline std::vector<cplx> fft(std::span<const cplx> in) {
    std::vector<cplx> out(in.size());
    fft(in, out);
    return out;
}

inline std::vector<cplx> ifft(std::span<const cplx> in) {
    std::vector<cplx> out(in.size());
    ifft(in, out);
    return out;
}

// Row-major rows x cols.
inline std::vector<cplx> fft2(std::span<const cplx> in, std::size_t rows, std::size_t cols) {
    std::vector<cplx> out(in.size());
    detail::cached_plan(rows, cols, FFTW_FORWARD).execute(in, out);
    return out;
}

inline std::vector<cplx> ifft2(std::span<const cplx> in, std::size_t rows, std::size_t cols) {
    std::vector<cplx> out(in.size());
    detail::cached_plan(rows, cols, FFTW_BACKWARD).execute(in, out);
    return out;
}

}  // namespace coorbit
