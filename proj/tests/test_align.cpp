#include <catch_amalgamated.hpp>
#include <rfeye/align.hpp>
#include <rfeye/channel.hpp>
#include <rfeye/signalgen.hpp>

#include "oracles.hpp"

using namespace rfeye;
using Catch::Matchers::WithinAbs;

namespace {

SignatureModel model_for(const WaveformSpec& w, std::uint64_t seed) {
    SignatureModel m;
    m.signature = make_signature(w, seed);
    m.pattern_width = w.pattern_width;
    m.signature_width = static_cast<int>(m.signature.size());
    m.repetition_count = w.repetitions;
    m.pattern = m.signature;
    m.pattern.samples.resize(static_cast<std::size_t>(w.pattern_width));
    return m;
}

// Exhaustive lag search written out directly.
std::size_t brute_lag(const IqTrace& raw, const IqTrace& s) {
    std::size_t best = 0;
    double bv = -1;
    for (std::size_t t = 0; t + s.size() <= raw.size(); ++t) {
        oracle::cd acc = 0;
        for (std::size_t i = 0; i < s.size(); ++i) acc += raw[t + i] * std::conj(s[i]);
        if (std::abs(acc) > bv) {
            bv = std::abs(acc);
            best = t;
        }
    }
    return best;
}

} // namespace

TEST_CASE("zero-offset capture aligns at lag zero", "[align]") {
    const WaveformSpec w;
    const SignatureModel m = model_for(w, 1);
    const AlignResult r = align_capture(embed(m.signature, 500, 0), m);
    CHECK(r.tau == 0);
    for (std::size_t n = 0; n < m.signature.size(); ++n) CHECK(std::abs(r.y[n] - m.signature[n]) < 1e-15);
}

TEST_CASE("offset and phase are recovered", "[align]") {
    const WaveformSpec w;
    const SignatureModel m = model_for(w, 2);
    IqTrace raw = embed(m.signature, 600, 137);
    const cplx rot = std::polar(1.0, oracle::pi / 3);
    for (auto& s : raw.samples) s *= rot;
    const AlignResult r = align_capture(raw, m);
    CHECK(r.tau == 137);
    CHECK(r.tau == brute_lag(raw, m.signature));
    for (std::size_t n = 0; n < m.signature.size(); ++n) CHECK(std::abs(r.y[n] - rot * m.signature[n]) < 1e-12);
    CHECK_THAT(r.peak, WithinAbs(1.0, 1e-12));
}

TEST_CASE("lag search matches the exhaustive oracle under noise", "[align]") {
    const WaveformSpec w;
    const SignatureModel m = model_for(w, 3);
    for (std::uint64_t s = 0; s < 30; ++s) {
        ImpairmentConfig cfg;
        cfg.snr_db = 5;
        cfg.seed = s;
        const IqTrace raw = propagate(embed(m.signature, 700, 50 + 13 * s), {}, {100, 1, 1}, cfg);
        CHECK(align_capture(raw, m, 0.1).tau == brute_lag(raw, m.signature));
        // Global complex scaling does not move the lag.
        IqTrace z = raw;
        for (auto& v : z.samples) v *= cplx(-0.2, 7);
        CHECK(align_capture(z, m, 0.1).tau == align_capture(raw, m, 0.1).tau);
    }
}

TEST_CASE("noise-only capture fails alignment", "[align]") {
    const WaveformSpec w;
    const SignatureModel m = model_for(w, 4);
    IqTrace raw;
    raw.samples.resize(800);
    Rng rng(5);
    for (auto& v : raw.samples) v = complex_gaussian(rng, 1.0);
    try {
        align_capture(raw, m);
        FAIL("expected AlignmentFailed");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::AlignmentFailed);
    }
    IqTrace shortcap;
    shortcap.samples.resize(10);
    CHECK_THROWS_AS(align_capture(shortcap, m), Error);
}

TEST_CASE("alignment preserves inter-point phase", "[align]") {
    const WaveformSpec w;
    const SignatureModel m = model_for(w, 6);
    Rng rng(11);
    std::uniform_real_distribution<double> U(0, 1);
    std::uniform_int_distribution<int> off(0, 300);
    for (int t = 0; t < 200; ++t) {
        const EmitterTruth tr{30 + 200 * U(rng), oracle::pi * U(rng), 2 * oracle::pi * U(rng) - oracle::pi};
        const LocalSpherical p1{U(rng), oracle::pi * U(rng), 2 * oracle::pi * U(rng) - oracle::pi};
        const LocalSpherical p2{U(rng), oracle::pi * U(rng), 2 * oracle::pi * U(rng) - oracle::pi};
        const IqTrace y1 = align_capture(propagate(embed(m.signature, 500, static_cast<std::size_t>(off(rng))), p1, tr, {}), m).y;
        const IqTrace y2 = align_capture(propagate(embed(m.signature, 500, static_cast<std::size_t>(off(rng))), p2, tr, {}), m).y;
        oracle::cd ip = 0;
        for (std::size_t n = 0; n < y1.size(); ++n) ip += y1[n] * std::conj(y2[n]);
        const double k = 2 * oracle::pi / w.carrier_wavelength;
        const double a1 = k * (tr.a - d_prime(p1, tr.direction())), a2 = k * (tr.a - d_prime(p2, tr.direction()));
        CHECK_THAT(std::remainder(std::arg(ip) - (a1 - a2), 2 * oracle::pi), WithinAbs(0.0, 1e-6));
    }
}

TEST_CASE("misalignment shrinks with SNR", "[align]") {
    const WaveformSpec w;
    const SignatureModel m = model_for(w, 7);
    auto median_err = [&](double snr) {
        std::vector<double> e;
        for (std::uint64_t s = 0; s < 60; ++s) {
            ImpairmentConfig cfg;
            cfg.snr_db = snr;
            cfg.multipath = Multipath::Rayleigh;
            cfg.seed = 500 + s;
            const std::size_t o = 100 + 3 * s;
            try {
                e.push_back(std::abs(static_cast<double>(align_capture(propagate(embed(m.signature, 800, o), {}, {100, 1, 1}, cfg), m, 0.0).tau) -
                                     static_cast<double>(o)));
            } catch (const Error&) {
                e.push_back(400);
            }
        }
        return oracle::median(e);
    };
    CHECK(median_err(14) == 0);
    CHECK(median_err(10) == 0);
    CHECK(median_err(-15) > median_err(10));
}

TEST_CASE("CFO estimation", "[align]") {
    const WaveformSpec w; // 20 MHz, W_p = 16
    const SignatureModel m = model_for(w, 8);
    const double unit = w.sample_rate / w.pattern_width;
    CHECK(std::abs(estimate_cfo(m.signature, m)) <= 1e-6 * unit);

    ImpairmentConfig cfg;
    cfg.cfo_hz = 10e3;
    cfg.snr_db = 60; // estimator rms ~6 Hz here, ~560 Hz at 20 dB
    cfg.seed = 4;
    const IqTrace y = propagate(m.signature, {}, {100, 1, 1}, cfg);
    CHECK_THAT(estimate_cfo(y, m), WithinAbs(10e3, 50));

    // Beyond fs / (2 W_p) the estimate wraps by fs / W_p.
    ImpairmentConfig big;
    big.cfo_hz = 700e3;
    CHECK_THAT(estimate_cfo(propagate(m.signature, {}, {100, 1, 1}, big), m), WithinAbs(700e3 - unit, 1e-3));

    IqTrace one = m.signature;
    one.samples.resize(20);
    CHECK_THROWS_AS(estimate_cfo(one, m), Error);
}

TEST_CASE("CFO correction removes the offset", "[align]") {
    const WaveformSpec w;
    const SignatureModel m = model_for(w, 9);
    ImpairmentConfig cfg;
    cfg.cfo_hz = -37e3;
    cfg.snr_db = 25;
    cfg.seed = 12;
    std::vector<ReceptionPoint> pts(3);
    for (std::size_t k = 0; k < pts.size(); ++k) pts[k].aligned_signal = propagate(m.signature, {}, {100, 1, 1}, cfg, {1.0, k, 0});
    const double est = estimate_cfo(pts[0].aligned_signal, m);
    const auto fixed = correct_cfo(pts, est);
    CHECK(std::abs(estimate_cfo(fixed[0].aligned_signal, m)) < 0.01 * 37e3);
    // The other noisy points keep their own estimator noise; clean copies carry only the offset.
    ImpairmentConfig clean = cfg;
    clean.snr_db = INFINITY;
    std::vector<ReceptionPoint> cp(3);
    for (std::size_t k = 0; k < cp.size(); ++k) cp[k].aligned_signal = propagate(m.signature, {}, {100, 1, 1}, clean, {1.0, k, 0});
    for (const auto& p : correct_cfo(cp, estimate_cfo(cp[0].aligned_signal, m)))
        CHECK(std::abs(estimate_cfo(p.aligned_signal, m)) < 0.01 * 37e3);

    const auto same = correct_cfo(pts, 0.0);
    CHECK(same[1].aligned_signal.samples == pts[1].aligned_signal.samples);
    const auto there = correct_cfo(correct_cfo(pts, 5e3), -5e3);
    for (std::size_t n = 0; n < m.signature.size(); ++n) CHECK(std::abs(there[2].aligned_signal[n] - pts[2].aligned_signal[n]) < 1e-9);
}

TEST_CASE("CFO estimator is unbiased", "[align]") {
    const WaveformSpec w;
    const SignatureModel m = model_for(w, 10);
    double sum = 0;
    const int n = 300;
    for (int s = 0; s < n; ++s) {
        ImpairmentConfig cfg;
        cfg.cfo_hz = 15e3;
        cfg.snr_db = 10;
        cfg.seed = static_cast<std::uint64_t>(s);
        sum += estimate_cfo(propagate(m.signature, {}, {100, 1, 1}, cfg), m) - 15e3;
    }
    CHECK(std::abs(sum / n) < 200);
}
