#include <catch_amalgamated.hpp>
#include <rfeye/blinddetect.hpp>
#include <rfeye/channel.hpp>
#include <rfeye/signalgen.hpp>

#include "oracles.hpp"

using namespace rfeye;

namespace {

IqTrace capture(int wp, int reps, std::size_t offset, std::size_t len, double snr_db, std::uint64_t seed) {
    WaveformSpec w;
    w.pattern_width = wp;
    w.repetitions = reps;
    const IqTrace buf = embed(make_signature(w, seed), len, offset);
    ImpairmentConfig cfg;
    cfg.snr_db = snr_db;
    cfg.seed = seed;
    return propagate(buf, {}, {100, 1, 1}, cfg);
}

ErrorCode code_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    return ErrorCode::Io;
}

} // namespace

TEST_CASE("energy gate on silence", "[blinddetect]") {
    IqTrace z;
    z.samples.assign(1000, cplx{});
    DetectorConfig c;
    c.energy_threshold = 0.1;
    CHECK(code_of([&] { energy_gate(z, c); }) == ErrorCode::NoEnergyFound);
    c.energy_threshold = 0;
    CHECK(code_of([&] { energy_gate(z, c); }) == ErrorCode::NoEnergyFound);
}

TEST_CASE("energy gate matches a brute-force window scan", "[blinddetect]") {
    DetectorConfig c;
    c.energy_threshold = 0.5;
    // Unit-power burst at offset 100: half of a 200-window is filled at n = 199.
    const IqTrace y = capture(16, 20, 100, 1000, INFINITY, 1);
    CHECK(energy_gate(y, c).n_hat == 199);
    CHECK(oracle::first_energy_crossing(y.samples, 200, 0.5) == 199);
    for (double thr : {0.05, 0.3, 0.77, 1.0}) {
        c.energy_threshold = thr;
        CHECK(static_cast<long>(energy_gate(y, c).n_hat) == oracle::first_energy_crossing(y.samples, 200, thr));
    }
    // Auto threshold: 0.3 of the strongest window.
    c.energy_threshold = 0;
    const EnergyGateResult g = energy_gate(y, c);
    CHECK(g.threshold == Catch::Approx(0.3 * oracle::strongest_window(y.samples, 200)));
    CHECK(static_cast<long>(g.n_hat) == oracle::first_energy_crossing(y.samples, 200, g.threshold));
    CHECK(g.u.size() == 200);
}

TEST_CASE("energy gate false-triggers on a 0 dB noise floor", "[blinddetect]") {
    DetectorConfig c;
    c.energy_threshold = 0.5;
    int early = 0;
    for (std::uint64_t s = 0; s < 100; ++s) {
        // Unit-power noise everywhere, burst far away.
        IqTrace y = capture(16, 10, 2000, 3000, 0.0, s);
        if (energy_gate(y, c).n_hat < 400) ++early;
    }
    CHECK(early == 100);
}

TEST_CASE("pattern width from the u correlation", "[blinddetect]") {
    DetectorConfig c;
    for (int wp : {16, 64}) {
        const IqTrace y = capture(wp, 10, 100, 1500, INFINITY, 3);
        const EnergyGateResult g = energy_gate(y, c);
        const PatternResult p = find_pattern(y, g, c);
        CHECK(p.m2 - p.m1 == static_cast<std::size_t>(wp));
        CHECK(p.pattern.size() == static_cast<std::size_t>(wp));
    }
}

TEST_CASE("u correlation is one at pattern lags and low between", "[blinddetect]") {
    // Long burst so that u lies entirely inside it.
    DetectorConfig c;
    const IqTrace y = capture(16, 60, 100, 1500, INFINITY, 4);
    const EnergyGateResult g = energy_gate(y, c);
    const std::size_t base = g.u_start;
    for (std::size_t k = 0; k * 16 + 200 <= 100 + 960 - base; ++k) CHECK(oracle::corr(y.samples, g.u.samples, base + 16 * k) >= 0.999);
    for (std::size_t m = base + 1; m < base + 16; ++m) CHECK(oracle::corr(y.samples, g.u.samples, m) < c.corr_threshold);
}

TEST_CASE("non-repeating burst has no pattern", "[blinddetect]") {
    IqTrace y;
    y.samples.assign(1000, cplx{});
    Rng rng(8);
    for (std::size_t n = 300; n < 600; ++n) y.samples[n] = complex_gaussian(rng, 1.0);
    DetectorConfig c;
    CHECK(code_of([&] { detect_signature(y, c); }) == ErrorCode::NoPatternFound);
}

TEST_CASE("signature that occurs once is rejected", "[blinddetect]") {
    WaveformSpec w;
    const auto pat = make_pattern(w, 9);
    IqTrace y;
    y.samples.assign(500, cplx{});
    std::copy(pat.begin(), pat.end(), y.samples.begin() + 200);
    IqTrace yp;
    yp.samples = pat;
    CHECK(code_of([&] { extract_signature(y, yp, {}); }) == ErrorCode::NoSignatureFound);
}

TEST_CASE("clean detection recovers the construction indices", "[blinddetect]") {
    DetectorConfig c;
    // Every capture opens with at least L quiet samples so u lands inside the burst.
    for (int wp : {16, 64})
        for (std::size_t off : {200UL, 237UL, 300UL, 450UL}) {
            const IqTrace y = capture(wp, 10, off, 1500, INFINITY, 10 + off);
            const SignatureModel m = detect_signature(y, c);
            const long nh = oracle::first_energy_crossing(y.samples, 200, 0.3 * oracle::strongest_window(y.samples, 200));
            const oracle::Indices t = oracle::expected_indices(static_cast<long>(off), wp, 10, nh, 0.5);
            CHECK(static_cast<long>(m.m1) == t.m1);
            CHECK(static_cast<long>(m.m2) == t.m2);
            CHECK(static_cast<long>(m.start_index) == t.m3);
            CHECK(static_cast<long>(m.m4) == t.m4);
            CHECK(m.pattern_width == wp);
            CHECK(m.signature_width == 10 * wp);
            CHECK(m.repetition_count == 10);
            CHECK(m.signature.size() == static_cast<std::size_t>(10 * wp));
        }
}

TEST_CASE("detection indices are scale invariant", "[blinddetect]") {
    const IqTrace y = capture(16, 10, 120, 1000, 20, 21);
    const SignatureModel a = detect_signature(y, {});
    for (cplx k : {cplx(3, -1), cplx(1e-3, 0), cplx(0, 250)}) {
        IqTrace z = y;
        for (auto& s : z.samples) s *= k;
        const SignatureModel b = detect_signature(z, {});
        CHECK(b.m1 == a.m1);
        CHECK(b.m2 == a.m2);
        CHECK(b.start_index == a.start_index);
        CHECK(b.m4 == a.m4);
    }
}

TEST_CASE("clean signature is self-consistent", "[blinddetect]") {
    for (int wp : {8, 16, 64}) {
        WaveformSpec w;
        w.pattern_width = wp;
        const IqTrace s = make_signature(w, 2);
        IqTrace yp = s;
        yp.samples.resize(static_cast<std::size_t>(wp));
        const SignatureModel m = extract_signature(s, yp, {});
        CHECK(m.signature_width == static_cast<int>(s.size()));
        CHECK(m.repetition_count == 10);
        CHECK(m.start_index == 0);
    }
}

TEST_CASE("index recovery at 10 dB", "[blinddetect]") {
    int exact = 0;
    const int trials = 200;
    Rng rng(77);
    std::uniform_int_distribution<int> off(200, 600);
    for (int t = 0; t < trials; ++t) {
        const std::size_t o = static_cast<std::size_t>(off(rng));
        const IqTrace y = capture(16, 10, o, 1400, 10.0, 1000 + static_cast<std::uint64_t>(t));
        try {
            const SignatureModel m = detect_signature(y, {});
            const long nh = oracle::first_energy_crossing(y.samples, 200, 0.3 * oracle::strongest_window(y.samples, 200));
            const oracle::Indices x = oracle::expected_indices(static_cast<long>(o), 16, 10, nh, 0.5);
            if (static_cast<long>(m.m1) == x.m1 && static_cast<long>(m.m2) == x.m2 && static_cast<long>(m.start_index) == x.m3 &&
                static_cast<long>(m.m4) == x.m4 && m.signature_width == x.wsig)
                ++exact;
        } catch (const Error&) {
        }
    }
    CHECK(exact >= 190);
}
