#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <vector>

#include "beamform.hpp"
#include "music.hpp"
#include "scenario.hpp"

namespace rfeye {

struct BenchRow {
    int M = 0;
    double sweep_s = 0.0; // full beampattern sweep over M points
    double music_s = 0.0; // covariance eigendecomposition plus pseudospectrum, same grid
};

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
};

inline LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) throw Error(ErrorCode::DimensionMismatch, "fit needs >= 2 paired samples");
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
    }
    const double mx = sx / n, my = sy / n;
    double sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    LinearFit f;
    f.slope = sxx > 0 ? sxy / sxx : 0.0;
    f.intercept = my - f.slope * mx;
    f.r2 = syy > 0 ? (sxy * sxy) / (sxx * syy) : 1.0;
    return f;
}

// Exponent b of t ~ c M^b, from a least-squares line in log-log space.
inline double power_law_exponent(const std::vector<double>& M, const std::vector<double>& t) {
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < M.size(); ++i) {
        lx.push_back(std::log(M[i]));
        ly.push_back(std::log(t[i]));
    }
    return linear_fit(lx, ly).slope;
}

namespace detail {

template <class F>
double elapsed_seconds(F&& f) {
    const auto t0 = std::chrono::steady_clock::now();
    f();
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

inline double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    return v[v.size() / 2];
}

} // namespace detail

// Times one sweep and one MUSIC spectrum for each M on the first M points of a clean
// array at location 1. The grid is taken as given; an exhaustive grid (refinement_levels = 1)
// keeps the evaluated cell count independent of M.
inline std::vector<BenchRow> run_bench(const Scenario& s, const std::vector<int>& Ms, const AngularGrid& grid, int repeats = 5) {
    int mmax = 0;
    for (int m : Ms) {
        if (m < 2) throw Error(ErrorCode::InvalidConfig, "bench M must be >= 2");
        mmax = std::max(mmax, m);
    }
    if (repeats < 1) throw Error(ErrorCode::InvalidConfig, "bench repeats must be >= 1");
    Scenario c = s;
    c.N = mmax;
    c.impairments = ImpairmentConfig{};
    const IqTrace sig = make_signature(c.waveform, mix_seed(c.seed, 1));
    Rng rng(mix_seed(c.seed, 100));
    const detail::LocationCaptures L = detail::synthesize_location(c, c.seed, 0, c.location1, sig, rng);
    std::vector<ArrayElement> all;
    for (std::size_t k = 0; k < L.points.size(); ++k) {
        const IqTrace y = detail::slice(L.buffers[k], static_cast<std::size_t>(L.offsets[k]), static_cast<std::size_t>(L.offsets[k]) + sig.size());
        all.push_back({to_rect(L.points[k].position), channel_estimate(y, sig)});
    }
    const double lambda = c.waveform.carrier_wavelength;
    struct Case {
        std::vector<ArrayElement> e;
        std::vector<Vec3> pos;
        Eigen::MatrixXcd cov;
    };
    std::vector<Case> cases;
    for (int m : Ms) {
        Case c;
        c.e.assign(all.begin(), all.begin() + m);
        std::vector<cplx> v;
        for (const auto& el : c.e) {
            c.pos.push_back(el.pos);
            v.push_back(el.g);
        }
        // Rank-one signal plus a small diagonal load keeps the eigensolver well posed.
        c.cov = covariance({v});
        c.cov += 1e-3 * Eigen::MatrixXcd::Identity(m, m);
        cases.push_back(std::move(c));
    }
    // Repeats are interleaved across M so that slow drift in machine load hits every M alike.
    std::vector<std::vector<double>> ts(Ms.size()), tm(Ms.size());
    for (int r = 0; r < repeats; ++r)
        for (std::size_t i = 0; i < cases.size(); ++i) {
            const Case& c = cases[i];
            ts[i].push_back(detail::elapsed_seconds([&] { (void)sweep(c.e, lambda, grid); }));
            tm[i].push_back(detail::elapsed_seconds([&] { (void)music_spectrum(c.cov, c.pos, lambda, grid); }));
        }
    std::vector<BenchRow> out;
    for (std::size_t i = 0; i < cases.size(); ++i) out.push_back({Ms[i], detail::median(ts[i]), detail::median(tm[i])});
    return out;
}

} // namespace rfeye
