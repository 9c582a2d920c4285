#pragma once

// Thin wrappers over Eigen's FFT module (kissfft backend).

#include <complex>
#include <vector>

#include <unsupported/Eigen/FFT>

namespace qtsc::spectral {

using cplx = std::complex<double>;

/// Full N-point DFT of a real signal, unnormalized.
inline std::vector<cplx> fft_real(const std::vector<double>& x) {
    Eigen::FFT<double> fft;
    std::vector<cplx> out;
    fft.fwd(out, x);
    return out;
}

/// Inverse DFT scaled by 1/N.
inline std::vector<cplx> ifft(const std::vector<cplx>& X) {
    Eigen::FFT<double> fft;
    std::vector<cplx> out;
    fft.inv(out, X);
    return out;
}

/// log(|X_k|^2 + eps) for k = 0..N/2.
inline std::vector<double> log_power_one_sided(const std::vector<double>& x, double eps = 1e-12) {
    const auto X = fft_real(x);
    std::vector<double> p(x.size() / 2 + 1);
    for (std::size_t k = 0; k < p.size(); ++k) p[k] = std::log(std::norm(X[k]) + eps);
    return p;
}

}  // namespace qtsc::spectral
