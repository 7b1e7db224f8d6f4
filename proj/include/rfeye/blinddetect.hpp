#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "types.hpp"

namespace rfeye {

struct DetectorConfig {
    int window_len = 200;
    // <= 0 selects 0.3 x the mean power of the strongest window in the trace.
    double energy_threshold = 0.0;
    double corr_threshold = 0.5;

    void validate() const {
        if (window_len < 2) throw Error(ErrorCode::InvalidConfig, "window_len must be >= 2");
        if (!(corr_threshold > 0 && corr_threshold <= 1))
            throw Error(ErrorCode::InvalidConfig, "corr_threshold must be in (0, 1]");
        if (std::isnan(energy_threshold)) throw Error(ErrorCode::InvalidConfig, "energy_threshold is NaN");
    }
};

inline constexpr double kAutoEnergyFraction = 0.3;

struct EnergyGateResult {
    std::size_t n_hat = 0;
    std::size_t u_start = 0; // first sample of u in y1
    IqTrace u;
    double threshold = 0.0;
};

struct PatternResult {
    std::size_t m1 = 0;
    std::size_t m2 = 0;
    IqTrace pattern;
};

struct SignatureModel {
    IqTrace pattern;
    IqTrace signature;
    int pattern_width = 0;
    int signature_width = 0;
    int repetition_count = 0;
    std::size_t start_index = 0; // m3
    std::size_t m1 = 0, m2 = 0, m4 = 0;
    std::size_t n_hat = 0;
};

namespace detail {

inline IqTrace slice(const IqTrace& y, std::size_t begin, std::size_t end) {
    IqTrace out;
    out.sample_rate = y.sample_rate;
    out.carrier_wavelength = y.carrier_wavelength;
    out.samples.assign(end - begin, cplx{});
    for (std::size_t i = begin; i < end && i < y.size(); ++i) out.samples[i - begin] = y.samples[i];
    return out;
}

// |sum_i y[m+i] t*[i]| / sum_i |t[i]|^2 for m in [from, y.size()); samples past the end count as zero.
inline std::vector<double> normalized_xcorr(const std::vector<cplx>& y, const std::vector<cplx>& t,
                                            std::size_t from = 0) {
    double et = 0.0;
    for (const auto& v : t) et += std::norm(v);
    std::vector<double> r(y.size() > from ? y.size() - from : 0, 0.0);
    if (et == 0.0) return r;
    for (std::size_t m = from; m < y.size(); ++m) {
        cplx acc{};
        const std::size_t lim = std::min(t.size(), y.size() - m);
        for (std::size_t i = 0; i < lim; ++i) acc += y[m + i] * std::conj(t[i]);
        r[m - from] = std::abs(acc) / et;
    }
    return r;
}

// Indices of local maxima of r at or above thr, scanning upward; a maximum closer than
// min_spacing to the previously accepted one replaces it only if strictly larger.
inline std::vector<std::size_t> threshold_peaks(const std::vector<double>& r, double thr, std::size_t min_spacing) {
    std::vector<std::size_t> out;
    for (std::size_t m = 0; m < r.size(); ++m) {
        if (r[m] < thr) continue;
        const bool left_ok = (m == 0) || r[m] >= r[m - 1];
        const bool right_ok = (m + 1 == r.size()) || r[m] > r[m + 1];
        if (!(left_ok && right_ok)) continue;
        if (!out.empty() && m - out.back() < min_spacing) {
            if (r[m] > r[out.back()]) out.back() = m;
            continue;
        }
        out.push_back(m);
    }
    return out;
}

} // namespace detail

inline EnergyGateResult energy_gate(const IqTrace& y1, const DetectorConfig& cfg) {
    cfg.validate();
    const std::size_t L = static_cast<std::size_t>(cfg.window_len);
    if (y1.size() < L) throw Error(ErrorCode::NoEnergyFound, "trace shorter than the energy window");

    std::vector<double> pre(y1.size() + 1, 0.0);
    for (std::size_t i = 0; i < y1.size(); ++i) pre[i + 1] = pre[i] + std::norm(y1.samples[i]);
    auto win = [&](std::size_t n) { return (pre[n + 1] - pre[n + 1 - L]) / static_cast<double>(L); };

    double thr = cfg.energy_threshold;
    if (thr <= 0) {
        double best = 0.0;
        for (std::size_t n = L - 1; n < y1.size(); ++n) best = std::max(best, win(n));
        thr = kAutoEnergyFraction * best;
        if (best == 0.0) throw Error(ErrorCode::NoEnergyFound, "trace carries no energy");
    }
    for (std::size_t n = L - 1; n < y1.size(); ++n) {
        if (win(n) >= thr) {
            EnergyGateResult g;
            g.n_hat = n;
            g.threshold = thr;
            // u holds the L samples from the detection instant onward.
            g.u_start = n;
            g.u = detail::slice(y1, n, n + L);
            return g;
        }
    }
    throw Error(ErrorCode::NoEnergyFound, "no window reaches the energy threshold");
}

// Correlation is evaluated from u's own position onward, so m1 is the self-match and m2 the
// first repetition of the pattern inside u.
inline PatternResult find_pattern(const IqTrace& y1, const EnergyGateResult& gate, const DetectorConfig& cfg) {
    cfg.validate();
    const std::vector<double> r = detail::normalized_xcorr(y1.samples, gate.u.samples, gate.u_start);
    const std::vector<std::size_t> pk = detail::threshold_peaks(r, cfg.corr_threshold, 2);
    if (pk.size() < 2) throw Error(ErrorCode::NoPatternFound, "fewer than two correlation crossings");
    PatternResult p;
    p.m1 = gate.u_start + pk[0];
    p.m2 = gate.u_start + pk[1];
    p.pattern = detail::slice(y1, p.m1, p.m2);
    return p;
}

inline SignatureModel extract_signature(const IqTrace& y1, const IqTrace& y_p, const DetectorConfig& cfg) {
    cfg.validate();
    if (y_p.empty()) throw Error(ErrorCode::NoSignatureFound, "empty pattern");
    const std::size_t wp = y_p.size();
    const std::vector<double> r = detail::normalized_xcorr(y1.samples, y_p.samples, 0);
    const std::vector<std::size_t> pk = detail::threshold_peaks(r, cfg.corr_threshold, std::max<std::size_t>(1, wp / 2));
    if (pk.size() < 2) throw Error(ErrorCode::NoSignatureFound, "pattern does not repeat");
    SignatureModel s;
    s.pattern = y_p;
    s.pattern_width = static_cast<int>(wp);
    s.start_index = pk.front();
    s.m4 = pk.back();
    s.signature_width = static_cast<int>(s.m4 + wp - s.start_index);
    s.repetition_count = static_cast<int>(pk.size());
    s.signature = detail::slice(y1, s.start_index, s.m4 + wp);
    return s;
}

// The three detection steps in sequence.
inline SignatureModel detect_signature(const IqTrace& y1, const DetectorConfig& cfg = {}) {
    const EnergyGateResult g = energy_gate(y1, cfg);
    const PatternResult p = find_pattern(y1, g, cfg);
    SignatureModel s = extract_signature(y1, p.pattern, cfg);
    s.m1 = p.m1;
    s.m2 = p.m2;
    s.n_hat = g.n_hat;
    return s;
}

} // namespace rfeye
