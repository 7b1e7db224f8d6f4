#include <catch_amalgamated.hpp>
#include <rfeye/beamform.hpp>
#include <rfeye/channel.hpp>
#include <rfeye/signalgen.hpp>

#include <sstream>

#include "oracles.hpp"

using namespace rfeye;
using Catch::Matchers::WithinAbs;

namespace {

constexpr double kLambda = 0.125;

Vec3 in_sphere(Rng& rng, double R = 1.0) {
    std::uniform_real_distribution<double> U(-R, R);
    for (;;) {
        const Vec3 v{U(rng), U(rng), U(rng)};
        if (norm(v) < R) return v;
    }
}

// Clean far-field array: g_k is the received carrier phasor of a plane wave from `truth`.
std::vector<ArrayElement> clean_array(std::uint64_t seed, const SteeringDirection& truth, int N = 20, double a = 100.0) {
    Rng rng(seed);
    std::vector<ArrayElement> e;
    const Vec3 u = unit_vector(truth);
    for (int k = 0; k < N; ++k) {
        const Vec3 p = in_sphere(rng);
        e.push_back({p, std::polar(1.0, 2 * oracle::pi / kLambda * (a - dot(p, u)))});
    }
    return e;
}

SteeringDirection deg(double p, double t) { return {deg2rad(p), deg2rad(t)}; }

} // namespace

TEST_CASE("single element has no directivity", "[beamform]") {
    const std::vector<ArrayElement> one{{{0.3, -0.4, 0.5}, cplx(0.2, 0.9)}};
    for (double p = -180; p < 180; p += 37)
        for (double t = -90; t < 90; t += 23) CHECK_THAT(std::abs(array_factor(one, deg(p, t), kLambda)), WithinAbs(1.0, 1e-12));
    CHECK_THROWS_AS(array_factor({}, deg(0, 0), kLambda), Error);
    CHECK_THROWS_AS(sweep({}, kLambda), Error);
}

TEST_CASE("array factor is unity toward the source", "[beamform]") {
    // End to end through propagate and the channel estimate.
    WaveformSpec w;
    const IqTrace sig = make_signature(w, 3);
    const EmitterTruth t{75, deg2rad(70), deg2rad(60)};
    Rng rng(4);
    std::vector<ArrayElement> e;
    for (int k = 0; k < 20; ++k) {
        const Vec3 p = in_sphere(rng);
        e.push_back({p, channel_estimate(propagate(sig, to_spherical(p), t, {}), sig)});
    }
    CHECK_THAT(std::abs(array_factor(e, t.direction(), kLambda)), WithinAbs(1.0, 1e-9));
}

TEST_CASE("beampattern peaks at (70, 60) on a 1 degree grid", "[beamform]") {
    const SteeringDirection truth = deg(70, 60);
    int hits = 0;
    for (std::uint64_t s = 0; s < 20; ++s) {
        const Beampattern bp = sweep(clean_array(s, truth), kLambda);
        if (bp.phi_deg(bp.peak_cell.i) == 70.0 && bp.theta_deg(bp.peak_cell.j) == 60.0) ++hits;
        CHECK(bp.peak_value <= 1.0 + 1e-12);
    }
    CHECK(hits == 20);
}

TEST_CASE("flat pattern ties break to the lowest cell", "[beamform]") {
    std::vector<ArrayElement> e(5, ArrayElement{{0, 0, 0}, cplx(1, 1)});
    const Beampattern bp = sweep(e, kLambda, AngularGrid::exhaustive(2.0));
    for (double v : bp.values) CHECK_THAT(v, WithinAbs(1.0, 1e-12));
    CHECK(bp.peak_cell == GridCell{0, 0});
    const Beampattern c = sweep(e, kLambda);
    CHECK(c.peak_cell == GridCell{0, 0});
}

TEST_CASE("coarse-to-fine agrees with the exhaustive sweep", "[beamform]") {
    Rng rng(31);
    std::uniform_real_distribution<double> P(-180, 180), T(-90, 90);
    for (std::uint64_t s = 0; s < 25; ++s) {
        auto e = clean_array(100 + s, deg(P(rng), T(rng)));
        // Position error makes sidelobes competitive.
        for (auto& x : e) x.pos = perturb_position(x.pos, 0.01, 700 + s * 31 + static_cast<std::uint64_t>(&x - e.data()));
        const Beampattern fast = sweep(e, kLambda);
        const Beampattern full = sweep(e, kLambda, AngularGrid::exhaustive());
        CHECK(fast.peak_cell == full.peak_cell);
        CHECK(fast.evaluations < full.evaluations / 2);
        // Whatever the fast sweep evaluated equals the exhaustive value.
        for (std::size_t i = 0; i < fast.values.size(); ++i)
            if (!std::isnan(fast.values[i])) CHECK(fast.values[i] == full.values[i]);
    }
}

TEST_CASE("global phase and range do not move the pattern", "[beamform]") {
    const SteeringDirection truth = deg(-40, 20);
    auto e = clean_array(5, truth);
    auto rotated = e;
    for (auto& x : rotated) x.g *= std::polar(1.0, 1.234);
    const Beampattern a = sweep(e, kLambda, AngularGrid::exhaustive(2.0));
    const Beampattern b = sweep(rotated, kLambda, AngularGrid::exhaustive(2.0));
    for (std::size_t i = 0; i < a.values.size(); ++i) CHECK_THAT(a.values[i], WithinAbs(b.values[i], 1e-12));
    const Beampattern far = sweep(clean_array(5, truth, 20, 200.0), kLambda);
    const Beampattern near = sweep(clean_array(5, truth, 20, 100.0), kLambda);
    CHECK(far.peak_cell == near.peak_cell);
}

TEST_CASE("harvesting keeps lobes within 3 dB", "[beamform]") {
    // Dense array: a single source gives a single lobe.
    const SteeringDirection d1 = deg(70, 60), d2 = deg(-100, -30);
    const auto e = clean_array(9, d1, 300);
    const Beampattern one = sweep(e, kLambda);
    CHECK(harvest_lobes(one).size() == 1);

    auto two_path = [&](double rel_db) {
        const auto e2 = clean_array(9, d2, 300);
        auto mix = e;
        const double amp = std::pow(10.0, rel_db / 20.0);
        for (std::size_t k = 0; k < mix.size(); ++k) mix[k].g += amp * e2[k].g;
        return mix;
    };
    {
        const auto mix = two_path(-2.0);
        const Beampattern bp = sweep(mix, kLambda);
        const auto lobes = harvest_lobes(bp);
        REQUIRE(lobes.size() == 2);
        // Oracle: the second lobe's level, evaluated directly.
        const double p1 = std::norm(array_factor(mix, d1, kLambda)), p2 = std::norm(array_factor(mix, d2, kLambda));
        CHECK(10 * std::log10(p2 / p1) == Catch::Approx(-2.0).margin(0.6));
        bool near1 = false, near2 = false;
        for (const auto& l : lobes) {
            near1 = near1 || angular_distance(l, d1) < deg2rad(1.5);
            near2 = near2 || angular_distance(l, d2) < deg2rad(1.5);
        }
        CHECK(near1);
        CHECK(near2);
    }
    {
        const Beampattern bp = sweep(two_path(-4.0), kLambda);
        CHECK(harvest_lobes(bp).size() == 1);
    }
}

TEST_CASE("band harvesting returns every cell above half power", "[beamform]") {
    const Beampattern bp = sweep(clean_array(12, deg(30, 10)), kLambda, AngularGrid::exhaustive(2.0));
    const auto band = harvest_lobes(bp, HarvestMode::Band);
    std::size_t want = 0;
    for (double v : bp.values) want += v >= 0.5 * bp.peak_value;
    // Pole rows collapse to one direction each.
    CHECK(band.size() <= want);
    CHECK(band.size() >= harvest_lobes(bp).size());
    for (const auto& d : band) CHECK(std::norm(array_factor(clean_array(12, deg(30, 10)), d, kLambda)) >= 0.5 * bp.peak_value - 1e-12);
}

TEST_CASE("average beampattern closed form", "[beamform]") {
    CHECK(average_beampattern(20, 0.2, kLambda, 0.0) == 1.0);
    CHECK_THAT(average_beampattern(20, 50.0, kLambda, deg2rad(10)), WithinAbs(1.0 / 20, 1e-12));
    CHECK_THAT(average_beampattern(1, 0.3, kLambda, 0.7), WithinAbs(1.0, 1e-12));
}

TEST_CASE("average beampattern matches a Monte Carlo mean", "[beamform]") {
    const int N = 20, R = 4000;
    const double sp = 0.2;
    Rng rng(123);
    std::normal_distribution<double> g(0.0, sp);
    const SteeringDirection src{oracle::pi / 2, 0.0};
    for (double ang : {5.0, 10.0, 20.0}) {
        const SteeringDirection look{oracle::pi / 2, deg2rad(ang)};
        double acc = 0;
        for (int r = 0; r < R; ++r) {
            std::vector<ArrayElement> e;
            for (int k = 0; k < N; ++k) {
                const Vec3 p{g(rng), g(rng), 0.0};
                e.push_back({p, std::polar(1.0, -2 * oracle::pi / kLambda * dot(p, unit_vector(src)))});
            }
            acc += std::norm(array_factor(e, look, kLambda));
        }
        CHECK_THAT(acc / R, WithinAbs(average_beampattern(N, sp, kLambda, deg2rad(ang)), 0.02));
    }
}

TEST_CASE("argmax error grows with phase noise", "[beamform]") {
    const SteeringDirection truth = deg(70, 60);
    std::vector<double> med;
    for (double sd : {0.0, 0.5, 1.0, 2.0}) {
        std::vector<double> err;
        for (std::uint64_t s = 0; s < 200; ++s) {
            auto e = clean_array(s, truth);
            Rng rng(9000 + s);
            std::normal_distribution<double> ph(0.0, sd);
            for (auto& x : e) x.g *= std::polar(1.0, ph(rng));
            err.push_back(angular_distance(sweep(e, kLambda).peak_dir, truth));
        }
        med.push_back(oracle::median(err));
    }
    for (std::size_t i = 1; i < med.size(); ++i) CHECK(med[i] >= med[i - 1]);
    CHECK(med.back() > med.front());
}

TEST_CASE("beampattern CSV export", "[beamform]") {
    const Beampattern bp = sweep(clean_array(1, deg(0, 0)), kLambda, AngularGrid::exhaustive(30.0));
    std::ostringstream os;
    write_beampattern_csv(os, bp);
    const std::string s = os.str();
    CHECK(s.rfind("phi_deg,theta_deg,P\n", 0) == 0);
    CHECK(std::count(s.begin(), s.end(), '\n') == 1 + 12 * 6);
}

TEST_CASE("grid validation", "[beamform]") {
    CHECK_THROWS_AS(AngularGrid({7.0, 1.0, 1}).validate(), Error);
    CHECK_THROWS_AS(AngularGrid({1.0, 1.0, 0}).validate(), Error);
    CHECK_NOTHROW(AngularGrid({1.0, 1.0, 3}).validate());
    CHECK_NOTHROW(AngularGrid::exhaustive(0.5).validate());
}
