#pragma once

// Iterative radix-2 complex FFT (power-of-two sizes), forward convention
// F_k = sum_j v_j e^{-2 pi i jk/n}, plus a row/column 2-D driver.

#include <complex>
#include <mutex>
#include <unordered_map>
#include <vector>

#include "microloc/errors.hpp"

namespace microloc {

namespace fft_detail {

inline const std::vector<std::complex<double>>& twiddles(std::size_t n) {
    static std::mutex mu;
    static std::unordered_map<std::size_t, std::vector<std::complex<double>>> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;
    std::vector<std::complex<double>> w(n / 2);
    for (std::size_t k = 0; k < n / 2; ++k) {
        const double a = -2.0 * M_PI * double(k) / double(n);
        w[k] = {std::cos(a), std::sin(a)};
    }
    return cache.emplace(n, std::move(w)).first->second;
}

} // namespace fft_detail

inline bool is_power_of_two(std::size_t n) { return n && (n & (n - 1)) == 0; }

/// In-place forward FFT, n a power of two.
inline void fft_forward(std::complex<double>* data, std::size_t n) {
    if (!is_power_of_two(n)) throw Error("fft size must be a power of two");
    // bit-reversal permutation
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(data[i], data[j]);
    }
    const auto& w = fft_detail::twiddles(n);
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const std::size_t step = n / len;
        for (std::size_t i = 0; i < n; i += len) {
            for (std::size_t k = 0; k < len / 2; ++k) {
                const std::complex<double> u = data[i + k];
                const std::complex<double> t = data[i + k + len / 2] * w[k * step];
                data[i + k] = u + t;
                data[i + k + len / 2] = u - t;
            }
        }
    }
}

/// Forward FFT over each dimension of a row-major nx-by-ny array (ny = 1 for 1-D).
inline void fft_forward_nd(std::vector<std::complex<double>>& data, std::size_t nx,
                           std::size_t ny) {
    if (data.size() != nx * ny) throw Error("fft_forward_nd: size mismatch");
    if (ny == 1) {
        fft_forward(data.data(), nx);
        return;
    }
    // rows (contiguous)
    for (std::size_t r = 0; r < nx; ++r) fft_forward(data.data() + r * ny, ny);
    // columns
    std::vector<std::complex<double>> col(nx);
    for (std::size_t c = 0; c < ny; ++c) {
        for (std::size_t r = 0; r < nx; ++r) col[r] = data[r * ny + c];
        fft_forward(col.data(), nx);
        for (std::size_t r = 0; r < nx; ++r) data[r * ny + c] = col[r];
    }
}

} // namespace microloc
