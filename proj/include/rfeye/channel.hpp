#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "geometry.hpp"
#include "types.hpp"

namespace rfeye {

struct EmitterTruth {
    double a = 100.0; // range, meters
    double phi = 0.0;
    double theta = 0.0;

    SteeringDirection direction() const { return {phi, theta}; }
    Vec3 position() const { return a * unit_vector(phi, theta); }

    static EmitterTruth from_position(const Vec3& p) {
        const LocalSpherical s = to_spherical(p);
        const SteeringDirection d = canonical({s.psi, s.zeta});
        return {s.r, d.phi, d.theta};
    }
};

enum class Multipath { None, Rayleigh, TwoRay };

inline const char* to_string(Multipath m) {
    switch (m) {
    case Multipath::None: return "none";
    case Multipath::Rayleigh: return "rayleigh";
    case Multipath::TwoRay: return "two_ray";
    }
    return "none";
}

struct ImpairmentConfig {
    double snr_db = std::numeric_limits<double>::infinity();
    Multipath multipath = Multipath::None;
    double cfo_hz = 0.0;
    double pos_error_sigma = 0.0;
    std::uint64_t seed = 0;

    // Rayleigh profile: tap i has mean power proportional to exp(-i / rayleigh_decay).
    int rayleigh_taps = 3;
    double rayleigh_decay = 1.0;
    // Two-ray ground reflection: ground plane height in the local frame, reflection coefficient.
    double ground_z = -6.0;
    double reflection_coeff = -1.0;

    void validate() const {
        if (!(pos_error_sigma >= 0)) throw Error(ErrorCode::InvalidConfig, "pos_error_sigma must be >= 0");
        if (std::isnan(snr_db)) throw Error(ErrorCode::InvalidConfig, "snr_db must not be NaN");
        if (rayleigh_taps < 1) throw Error(ErrorCode::InvalidConfig, "rayleigh_taps must be >= 1");
        if (!(rayleigh_decay > 0)) throw Error(ErrorCode::InvalidConfig, "rayleigh_decay must be > 0");
        if (!std::isfinite(cfo_hz)) throw Error(ErrorCode::InvalidConfig, "cfo_hz must be finite");
    }
};

struct PropagationOptions {
    double sphere_radius = 1.0;
    // Distinguishes the noise realisation of each capture sharing one ImpairmentConfig.
    std::uint64_t stream = 0;
    // Sample index at which the CFO rotation has zero phase.
    std::int64_t cfo_reference = 0;
};

inline void check_far_field(double a, double sphere_radius) {
    if (!(a >= 10.0 * sphere_radius))
        throw Error(ErrorCode::FarFieldViolation,
                    "range " + std::to_string(a) + " m is below 10x sphere radius");
}

// Taps are shared by every capture of one configuration (seeded by cfg.seed only), so the
// multipath acts as a common channel and leaves inter-point phase differences intact.
inline std::vector<cplx> rayleigh_taps(const ImpairmentConfig& cfg) {
    Rng rng(mix_seed(cfg.seed, 0xA11CE));
    std::vector<double> pw(static_cast<std::size_t>(cfg.rayleigh_taps));
    double tot = 0.0;
    for (std::size_t i = 0; i < pw.size(); ++i) {
        pw[i] = std::exp(-static_cast<double>(i) / cfg.rayleigh_decay);
        tot += pw[i];
    }
    std::vector<cplx> h(pw.size());
    for (std::size_t i = 0; i < h.size(); ++i) h[i] = complex_gaussian(rng, pw[i] / tot);
    return h;
}

// Far-field carrier phase of a plane wave from `dir` at range `a`, seen at point p.
inline cplx plane_wave(const LocalSpherical& p, double a, const SteeringDirection& dir, double lambda) {
    return std::polar(1.0, kTwoPi / lambda * (a - d_prime(p, dir)));
}

inline IqTrace propagate(const IqTrace& signature, const LocalSpherical& point, const EmitterTruth& truth,
                         const ImpairmentConfig& cfg, const PropagationOptions& opt = {}) {
    cfg.validate();
    check_far_field(truth.a, opt.sphere_radius);
    const double lambda = signature.carrier_wavelength;

    cplx gain = plane_wave(point, truth.a, truth.direction(), lambda);
    if (cfg.multipath == Multipath::TwoRay) {
        const Vec3 e = truth.position();
        const Vec3 img{e[0], e[1], 2.0 * cfg.ground_z - e[2]};
        const EmitterTruth it = EmitterTruth::from_position(img);
        check_far_field(it.a, opt.sphere_radius);
        gain += cfg.reflection_coeff * (truth.a / it.a) * plane_wave(point, it.a, it.direction(), lambda);
    }

    IqTrace out = signature;
    for (auto& s : out.samples) s *= gain;

    if (cfg.multipath == Multipath::Rayleigh) {
        const std::vector<cplx> h = rayleigh_taps(cfg);
        std::vector<cplx> y(out.size());
        for (std::size_t n = 0; n < y.size(); ++n) {
            cplx acc{};
            for (std::size_t k = 0; k < h.size() && k <= n; ++k) acc += h[k] * out.samples[n - k];
            y[n] = acc;
        }
        out.samples = std::move(y);
    }

    if (std::isfinite(cfg.snr_db)) {
        // Signal power is measured over the support of the input burst.
        double ps = 0.0;
        std::size_t cnt = 0;
        for (std::size_t n = 0; n < out.size(); ++n) {
            if (signature.samples[n] != cplx{}) {
                ps += std::norm(out.samples[n]);
                ++cnt;
            }
        }
        if (cnt > 0) ps /= static_cast<double>(cnt);
        if (ps == 0.0) ps = 1.0;
        const double pn = ps / std::pow(10.0, cfg.snr_db / 10.0);
        Rng rng(mix_seed(cfg.seed, 0x100000 + opt.stream));
        for (auto& s : out.samples) s += complex_gaussian(rng, pn);
    }

    if (cfg.cfo_hz != 0.0) {
        const double w = kTwoPi * cfg.cfo_hz / signature.sample_rate;
        for (std::size_t n = 0; n < out.size(); ++n)
            out.samples[n] *= std::polar(1.0, w * static_cast<double>(static_cast<std::int64_t>(n) - opt.cfo_reference));
    }
    return out;
}

inline Vec3 perturb_position(const Vec3& p, double sigma, std::uint64_t seed) {
    if (sigma < 0) throw Error(ErrorCode::InvalidConfig, "sigma must be >= 0");
    if (sigma == 0) return p;
    Rng rng(mix_seed(seed, 0x9051));
    std::normal_distribution<double> n(0.0, sigma);
    const double dx = n(rng);
    const double dy = n(rng);
    const double dz = n(rng);
    return {p[0] + dx, p[1] + dy, p[2] + dz};
}

} // namespace rfeye
