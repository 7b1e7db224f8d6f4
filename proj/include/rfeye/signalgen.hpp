#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "types.hpp"

namespace rfeye {

enum class WaveformKind { RepeatedSymbol, Chirp };

inline const char* to_string(WaveformKind k) {
    return k == WaveformKind::Chirp ? "chirp" : "repeated_symbol";
}

struct WaveformSpec {
    WaveformKind kind = WaveformKind::RepeatedSymbol;
    int pattern_width = 16;
    int repetitions = 10;
    double sample_rate = 20e6;
    double carrier_wavelength = 0.125;
    double bandwidth = 20e6;

    void validate() const {
        if (pattern_width < 2) throw Error(ErrorCode::InvalidSpec, "pattern_width must be >= 2");
        if (repetitions < 2) throw Error(ErrorCode::InvalidSpec, "repetitions must be >= 2");
        if (!(sample_rate > 0)) throw Error(ErrorCode::InvalidSpec, "sample_rate must be > 0");
        if (!(carrier_wavelength > 0)) throw Error(ErrorCode::InvalidSpec, "carrier_wavelength must be > 0");
        if (!(bandwidth > 0) || bandwidth > sample_rate)
            throw Error(ErrorCode::InvalidSpec, "bandwidth must be in (0, sample_rate]");
    }

    // Samples per symbol for the repeated-symbol surrogate.
    int oversampling() const {
        return std::max(1, static_cast<int>(std::lround(sample_rate / bandwidth)));
    }

    int signature_length() const { return pattern_width * repetitions; }
};

inline constexpr double kMaxPatternSidelobe = 0.35;
inline constexpr int kPatternDraws = 64;

namespace detail {

// max over k in [1, n) of |sum_i p[i] p*[(i + k) mod n]| / n.
inline double max_cyclic_sidelobe(const std::vector<cplx>& p) {
    const std::size_t n = p.size();
    double m = 0.0;
    for (std::size_t k = 1; k < n; ++k) {
        cplx acc{};
        for (std::size_t i = 0; i < n; ++i) acc += p[i] * std::conj(p[(i + k) % n]);
        m = std::max(m, std::abs(acc) / static_cast<double>(n));
    }
    return m;
}

} // namespace detail

// One period of the repetitive pattern, unit mean power.
inline std::vector<cplx> make_pattern(const WaveformSpec& spec, std::uint64_t seed) {
    spec.validate();
    const int wp = spec.pattern_width;
    std::vector<cplx> p(static_cast<std::size_t>(wp));
    if (spec.kind == WaveformKind::RepeatedSymbol) {
        // Constant-modulus symbols, each held for fs/B samples. Draws are repeated until the
        // cyclic autocorrelation sidelobes stay below kMaxPatternSidelobe, as for a preamble
        // sequence; after kPatternDraws attempts the lowest-sidelobe draw is kept.
        Rng rng(mix_seed(seed, 0x5167));
        std::uniform_real_distribution<double> ang(-kPi, kPi);
        const int os = spec.oversampling();
        std::vector<cplx> cand(p.size());
        double best = INFINITY;
        for (int d = 0; d < kPatternDraws && best > kMaxPatternSidelobe; ++d) {
            cplx sym;
            for (int i = 0; i < wp; ++i) {
                if (i % os == 0) sym = std::polar(1.0, ang(rng));
                cand[static_cast<std::size_t>(i)] = sym;
            }
            const double sl = detail::max_cyclic_sidelobe(cand);
            if (sl < best) {
                best = sl;
                p = cand;
            }
        }
    } else {
        // Linear up-chirp from -B/2 to +B/2 across one period.
        const double ts = 1.0 / spec.sample_rate;
        const double T = wp * ts;
        const double k = spec.bandwidth / T;
        for (int i = 0; i < wp; ++i) {
            const double t = i * ts;
            const double ph = kTwoPi * (-0.5 * spec.bandwidth * t + 0.5 * k * t * t);
            p[static_cast<std::size_t>(i)] = std::polar(1.0, ph);
        }
    }
    return p;
}

inline IqTrace make_signature(const WaveformSpec& spec, std::uint64_t seed) {
    const std::vector<cplx> p = make_pattern(spec, seed);
    IqTrace t;
    t.sample_rate = spec.sample_rate;
    t.carrier_wavelength = spec.carrier_wavelength;
    t.samples.reserve(p.size() * static_cast<std::size_t>(spec.repetitions));
    for (int r = 0; r < spec.repetitions; ++r) t.samples.insert(t.samples.end(), p.begin(), p.end());
    return t;
}

// Places the signature in an otherwise silent buffer. The seed is accepted for interface
// symmetry; placement itself is deterministic.
inline IqTrace embed(const IqTrace& signature, std::size_t buffer_len, std::size_t offset,
                     std::uint64_t /*seed*/ = 0) {
    if (offset + signature.size() > buffer_len)
        throw Error(ErrorCode::OutOfBounds, "signature does not fit at offset " + std::to_string(offset));
    IqTrace out;
    out.sample_rate = signature.sample_rate;
    out.carrier_wavelength = signature.carrier_wavelength;
    out.samples.assign(buffer_len, cplx{});
    std::copy(signature.samples.begin(), signature.samples.end(),
              out.samples.begin() + static_cast<std::ptrdiff_t>(offset));
    return out;
}

} // namespace rfeye
