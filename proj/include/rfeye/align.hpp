#pragma once

#include <cmath>
#include <vector>

#include "blinddetect.hpp"
#include "geometry.hpp"
#include "types.hpp"

namespace rfeye {

// One virtual array element: where the UAV was, where it thought it was, and what it heard.
struct ReceptionPoint {
    LocalSpherical position;
    LocalSpherical measured_position;
    IqTrace aligned_signal;
};

struct AlignResult {
    std::size_t tau = 0;
    IqTrace y;
    double peak = 0.0; // normalized correlation coefficient at tau
};

// Lag with the largest |<raw[tau:tau+W], y_sig>|; ties go to the lowest lag. The retained
// segment keeps its native phase.
inline AlignResult align_capture(const IqTrace& raw, const SignatureModel& sig, double corr_threshold = 0.5) {
    const std::vector<cplx>& s = sig.signature.samples;
    const std::size_t w = s.size();
    if (w == 0 || raw.size() < w) throw Error(ErrorCode::AlignmentFailed, "capture shorter than the signature");

    double es = 0.0;
    for (const auto& v : s) es += std::norm(v);

    // Running window energy for the normalized coefficient.
    double ew = 0.0;
    for (std::size_t i = 0; i < w; ++i) ew += std::norm(raw.samples[i]);

    double best = -1.0;
    double best_coef = 0.0;
    std::size_t best_tau = 0;
    for (std::size_t tau = 0; tau + w <= raw.size(); ++tau) {
        if (tau > 0) ew += std::norm(raw.samples[tau + w - 1]) - std::norm(raw.samples[tau - 1]);
        cplx acc{};
        for (std::size_t i = 0; i < w; ++i) acc += raw.samples[tau + i] * std::conj(s[i]);
        const double mag = std::abs(acc);
        if (mag > best) {
            best = mag;
            best_tau = tau;
            best_coef = (ew > 0 && es > 0) ? mag / std::sqrt(ew * es) : 0.0;
        }
    }
    if (best_coef < corr_threshold)
        throw Error(ErrorCode::AlignmentFailed, "correlation peak below threshold");

    AlignResult r;
    r.tau = best_tau;
    r.peak = best_coef;
    r.y = detail::slice(raw, best_tau, best_tau + w);
    return r;
}

// Phase slope across one pattern period; unambiguous for |cfo| < fs / (2 W_p).
inline double estimate_cfo(const IqTrace& y, int pattern_width, double sample_rate) {
    const std::size_t wp = static_cast<std::size_t>(pattern_width);
    if (pattern_width < 1 || y.size() < 2 * wp)
        throw Error(ErrorCode::InsufficientRepetitions, "need at least two pattern periods");
    cplx acc{};
    for (std::size_t n = 0; n + wp < y.size(); ++n) acc += std::conj(y.samples[n]) * y.samples[n + wp];
    return std::arg(acc) * sample_rate / (kTwoPi * static_cast<double>(wp));
}

inline double estimate_cfo(const IqTrace& y, const SignatureModel& sig) {
    return estimate_cfo(y, sig.pattern_width, y.sample_rate);
}

inline void derotate(IqTrace& y, double cfo) {
    const double w = kTwoPi * cfo / y.sample_rate;
    for (std::size_t n = 0; n < y.size(); ++n) y.samples[n] *= std::polar(1.0, -w * static_cast<double>(n));
}

inline std::vector<ReceptionPoint> correct_cfo(std::vector<ReceptionPoint> points, double cfo) {
    if (cfo == 0.0) return points;
    for (auto& p : points) derotate(p.aligned_signal, cfo);
    return points;
}

} // namespace rfeye
