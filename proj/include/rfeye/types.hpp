#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

#include "error.hpp"

namespace rfeye {

using cplx = std::complex<double>;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

inline constexpr double deg2rad(double d) { return d * kPi / 180.0; }
inline constexpr double rad2deg(double r) { return r * 180.0 / kPi; }

// Wrap to [-pi, pi).
inline double wrap_pi(double a) {
    if (a >= -kPi && a < kPi) return a;
    double w = std::fmod(a + kPi, kTwoPi);
    if (w < 0) w += kTwoPi;
    return w - kPi;
}

// Complex baseband samples plus the two numbers every consumer needs.
struct IqTrace {
    std::vector<cplx> samples;
    double sample_rate = 1.0;
    double carrier_wavelength = 1.0;

    std::size_t size() const { return samples.size(); }
    bool empty() const { return samples.empty(); }
    cplx& operator[](std::size_t i) { return samples[i]; }
    const cplx& operator[](std::size_t i) const { return samples[i]; }
};

inline double mean_power(const std::vector<cplx>& x) {
    if (x.empty()) return 0.0;
    double s = 0.0;
    for (const auto& v : x) s += std::norm(v);
    return s / static_cast<double>(x.size());
}

// splitmix64 finalizer; used to derive independent stream seeds from one scenario seed.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

using Rng = std::mt19937_64;

// Complex Gaussian with E|z|^2 = power.
inline cplx complex_gaussian(Rng& rng, double power) {
    std::normal_distribution<double> n(0.0, std::sqrt(power / 2.0));
    double re = n(rng);
    double im = n(rng);
    return {re, im};
}

} // namespace rfeye
