#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <type_traits>
#include <vector>

#include "align.hpp"
#include "geometry.hpp"
#include "types.hpp"

namespace rfeye {

// What the beamformer needs from a reception point: its measured position and one complex
// channel scalar.
struct ArrayElement {
    Vec3 pos;
    cplx g;
};

// Matched-filter projection of an aligned capture onto the signature.
inline cplx channel_estimate(const IqTrace& y, const IqTrace& sig) {
    if (y.size() != sig.size()) throw Error(ErrorCode::DimensionMismatch, "aligned capture and signature differ in length");
    cplx num{};
    double den = 0.0;
    for (std::size_t n = 0; n < y.size(); ++n) {
        num += y.samples[n] * std::conj(sig.samples[n]);
        den += std::norm(sig.samples[n]);
    }
    return den > 0 ? num / den : cplx{};
}

inline std::vector<ArrayElement> make_array(const std::vector<ReceptionPoint>& points, const IqTrace& sig) {
    std::vector<ArrayElement> out;
    out.reserve(points.size());
    for (const auto& p : points) out.push_back({to_rect(p.measured_position), channel_estimate(p.aligned_signal, sig)});
    return out;
}

namespace detail {

inline double magnitude_sum(const std::vector<ArrayElement>& e) {
    double s = 0.0;
    for (const auto& x : e) s += std::abs(x.g);
    return s;
}

inline cplx af_unnormalized(const std::vector<ArrayElement>& e, const Vec3& u, double k) {
    double re = 0.0, im = 0.0;
    for (const auto& x : e) {
        const double ph = k * dot(x.pos, u);
        const double c = std::cos(ph), s = std::sin(ph);
        re += c * x.g.real() - s * x.g.imag();
        im += c * x.g.imag() + s * x.g.real();
    }
    return {re, im};
}

} // namespace detail

// F = sum_k w_k g_k / sum_k |g_k|. With equal-magnitude channel scalars this is the
// 1/N-normalized array factor; in general it keeps |F| <= 1.
inline cplx array_factor(const std::vector<ArrayElement>& elems, const SteeringDirection& dir, double lambda) {
    if (elems.empty()) throw Error(ErrorCode::EmptyArray, "no reception points");
    const double norm = detail::magnitude_sum(elems);
    if (norm == 0.0) return {};
    return detail::af_unnormalized(elems, unit_vector(dir), kTwoPi / lambda) / norm;
}

struct AngularGrid {
    double az_resolution = 1.0;  // degrees, step of phi
    double el_resolution = 1.0;  // degrees, step of theta
    int refinement_levels = 3;   // 1 = exhaustive; each extra level halves the step

    int n_phi() const { return static_cast<int>(std::lround(360.0 / az_resolution)); }
    int n_theta() const { return static_cast<int>(std::lround(180.0 / el_resolution)); }
    int coarse_step() const { return 1 << (refinement_levels - 1); }

    void validate() const {
        auto divides = [](double span, double r) {
            if (!(r > 0)) return false;
            const double q = span / r;
            return std::abs(q - std::round(q)) < 1e-9;
        };
        if (refinement_levels < 1) throw Error(ErrorCode::InvalidConfig, "refinement_levels must be >= 1");
        if (!divides(360.0, az_resolution) || !divides(180.0, el_resolution))
            throw Error(ErrorCode::InvalidConfig, "grid resolutions must divide 360 (azimuth) and 180 (elevation)");
        if (n_phi() % coarse_step() != 0 || n_theta() % coarse_step() != 0)
            throw Error(ErrorCode::InvalidConfig, "coarsest level does not tile the grid");
    }

    static AngularGrid exhaustive(double res = 1.0) { return {res, res, 1}; }
};

struct GridCell {
    int i = 0; // phi index
    int j = 0; // theta index
    bool operator==(const GridCell&) const = default;
};

// Beampattern on the fine grid. Cells the coarse-to-fine search never visited hold NaN.
struct Beampattern {
    AngularGrid grid;
    int n_phi = 0;
    int n_theta = 0;
    std::vector<double> values;
    GridCell peak_cell;
    SteeringDirection peak_dir;
    double peak_value = 0.0;
    std::vector<GridCell> lobes; // local maxima at the fine resolution
    std::size_t evaluations = 0;

    double at(int i, int j) const { return values[static_cast<std::size_t>(i) * n_theta + j]; }
    bool evaluated(int i, int j) const { return !std::isnan(at(i, j)); }
    double phi_deg(int i) const { return -180.0 + i * grid.az_resolution; }
    double theta_deg(int j) const { return -90.0 + j * grid.el_resolution; }
    SteeringDirection direction(const GridCell& c) const { return {deg2rad(phi_deg(c.i)), deg2rad(theta_deg(c.j))}; }
    bool dense() const { return grid.refinement_levels == 1; }

    // Neighbour with phi wrapping and the theta = +-90 deg fold onto (-phi, theta -+ 180).
    GridCell neighbor(GridCell c, int di, int dj) const {
        int ii = ((c.i + di) % n_phi + n_phi) % n_phi;
        int jj = c.j + dj;
        if (jj >= n_theta || jj < 0) {
            jj = jj >= n_theta ? jj - n_theta : jj + n_theta;
            ii = (n_phi - ii) % n_phi;
        }
        return {ii, jj};
    }
};

namespace detail {

// Coarse-to-fine search over the grid for any per-direction power function.
template <class Power>
class Sweeper {
public:
    Sweeper(Power power, const AngularGrid& g) : power_(std::move(power)) {
        g.validate();
        bp_.grid = g;
        bp_.n_phi = g.n_phi();
        bp_.n_theta = g.n_theta();
        bp_.values.assign(static_cast<std::size_t>(bp_.n_phi) * bp_.n_theta, std::numeric_limits<double>::quiet_NaN());
    }

    double eval(const GridCell& c) {
        double& v = bp_.values[static_cast<std::size_t>(c.i) * bp_.n_theta + c.j];
        if (std::isnan(v)) {
            if constexpr (std::is_invocable_v<Power&, const GridCell&>)
                v = power_(c);
            else
                v = power_(unit_vector(bp_.direction(c)));
            ++bp_.evaluations;
        }
        return v;
    }

    bool is_local_max(const GridCell& c, int step) {
        const double v = eval(c);
        for (int di = -1; di <= 1; ++di)
            for (int dj = -1; dj <= 1; ++dj) {
                if (di == 0 && dj == 0) continue;
                if (eval(bp_.neighbor(c, di * step, dj * step)) > v) return false;
            }
        return true;
    }

    // Hill-climb inside a (2w+1)^2 window at the given step until the best cell is interior.
    GridCell refine(GridCell c, int step, int w) {
        for (int guard = 0; guard < 64; ++guard) {
            GridCell best = c;
            double bv = eval(c);
            for (int a = -w; a <= w; ++a)
                for (int b = -w; b <= w; ++b) {
                    const GridCell n = bp_.neighbor(c, a * step, b * step);
                    const double v = eval(n);
                    if (v > bv || (v == bv && lex_less(n, best))) {
                        bv = v;
                        best = n;
                    }
                }
            if (best == c || bv == eval(c)) return c;
            c = best;
        }
        return c;
    }

    static bool lex_less(const GridCell& a, const GridCell& b) { return a.i < b.i || (a.i == b.i && a.j < b.j); }

    Beampattern run() {
        const AngularGrid& g = bp_.grid;
        const int s0 = g.coarse_step();
        std::vector<GridCell> seeds;
        double cmax = 0.0;
        for (int i = 0; i < bp_.n_phi; i += s0)
            for (int j = 0; j < bp_.n_theta; j += s0) cmax = std::max(cmax, eval({i, j}));
        if (g.refinement_levels == 1) {
            for (int i = 0; i < bp_.n_phi; ++i)
                for (int j = 0; j < bp_.n_theta; ++j)
                    if (is_local_max({i, j}, 1)) seeds.push_back({i, j});
        } else {
            // Every coarse lobe within 6 dB of the coarse maximum is refined.
            const double keep = cmax * std::pow(10.0, -0.6);
            for (int i = 0; i < bp_.n_phi; i += s0)
                for (int j = 0; j < bp_.n_theta; j += s0)
                    if (bp_.values[static_cast<std::size_t>(i) * bp_.n_theta + j] >= keep && is_local_max({i, j}, s0))
                        seeds.push_back({i, j});
            for (int step = s0 / 2; step >= 1; step /= 2)
                for (auto& c : seeds) c = refine(c, step, 3);
        }
        dedupe(seeds);
        bp_.lobes = seeds;

        // Global peak over everything evaluated, lexicographic (phi, theta) tie-break.
        bp_.peak_value = -1.0;
        for (int i = 0; i < bp_.n_phi; ++i)
            for (int j = 0; j < bp_.n_theta; ++j) {
                const double v = bp_.values[static_cast<std::size_t>(i) * bp_.n_theta + j];
                if (!std::isnan(v) && v > bp_.peak_value) {
                    bp_.peak_value = v;
                    bp_.peak_cell = {i, j};
                }
            }
        bp_.peak_dir = bp_.direction(bp_.peak_cell);
        return std::move(bp_);
    }

private:
    // Drops repeated cells and cells naming the same physical direction (poles, fold seam).
    void dedupe(std::vector<GridCell>& v) const {
        std::sort(v.begin(), v.end(), lex_less);
        v.erase(std::unique(v.begin(), v.end()), v.end());
        const double tol = 0.5 * deg2rad(std::min(bp_.grid.az_resolution, bp_.grid.el_resolution));
        std::vector<GridCell> out;
        std::vector<Vec3> dirs;
        for (const auto& c : v) {
            const Vec3 u = unit_vector(bp_.direction(c));
            bool dup = false;
            for (const auto& d : dirs)
                if (norm(u - d) < tol) {
                    dup = true;
                    break;
                }
            if (!dup) {
                out.push_back(c);
                dirs.push_back(u);
            }
        }
        v = std::move(out);
    }

    Power power_;
    Beampattern bp_;
};

} // namespace detail

template <class Power>
Beampattern sweep_power(Power power, const AngularGrid& grid) {
    return detail::Sweeper<Power>(std::move(power), grid).run();
}

inline Beampattern sweep(const std::vector<ArrayElement>& elems, double lambda, const AngularGrid& grid = {}) {
    if (elems.empty()) throw Error(ErrorCode::EmptyArray, "no reception points");
    const double s = detail::magnitude_sum(elems);
    const double inv = s > 0 ? 1.0 / (s * s) : 0.0;
    const double k = kTwoPi / lambda;
    return sweep_power([&elems, inv, k](const Vec3& u) { return std::norm(detail::af_unnormalized(elems, u, k)) * inv; }, grid);
}

namespace detail {

// Per-element steering phasors exp(j k p.u), filled per grid cell on first use. Subset sweeps
// over the same points then cost one multiply-add per element and cell.
class SteeringCache {
public:
    SteeringCache(const std::vector<ArrayElement>& elems, double lambda, const AngularGrid& grid)
        : elems_(elems), k_(kTwoPi / lambda), n_(elems.size()), grid_(grid) {
        grid.validate();
        cells_ = static_cast<std::size_t>(grid.n_phi()) * static_cast<std::size_t>(grid.n_theta());
        filled_.assign(cells_, 0);
        table_.resize(cells_ * n_ * 2);
    }

    const AngularGrid& grid() const { return grid_; }

    const double* row(const GridCell& c) {
        const std::size_t id = static_cast<std::size_t>(c.i) * static_cast<std::size_t>(grid_.n_theta()) + static_cast<std::size_t>(c.j);
        double* r = &table_[id * n_ * 2];
        if (!filled_[id]) {
            const Vec3 u = unit_vector(deg2rad(-180.0 + c.i * grid_.az_resolution), deg2rad(-90.0 + c.j * grid_.el_resolution));
            for (std::size_t m = 0; m < n_; ++m) {
                const double ph = k_ * dot(elems_[m].pos, u);
                r[2 * m] = std::cos(ph);
                r[2 * m + 1] = std::sin(ph);
            }
            filled_[id] = 1;
        }
        return r;
    }

private:
    const std::vector<ArrayElement>& elems_;
    double k_;
    std::size_t n_;
    AngularGrid grid_;
    std::size_t cells_ = 0;
    std::vector<char> filled_;
    std::vector<double> table_; // interleaved cos, sin
};

} // namespace detail

// Sweep over the elements idx of the cached array; same values as sweep() on that subset.
inline Beampattern sweep_subset(detail::SteeringCache& cache, const std::vector<ArrayElement>& elems, const std::vector<int>& idx) {
    if (idx.empty()) throw Error(ErrorCode::EmptyArray, "no reception points");
    double s = 0.0;
    for (int m : idx) s += std::abs(elems[static_cast<std::size_t>(m)].g);
    const double inv = s > 0 ? 1.0 / (s * s) : 0.0;
    return sweep_power(
        [&](const GridCell& c) {
            const double* r = cache.row(c);
            double re = 0.0, im = 0.0;
            for (int m : idx) {
                const double co = r[2 * m], si = r[2 * m + 1];
                const cplx& g = elems[static_cast<std::size_t>(m)].g;
                re += co * g.real() - si * g.imag();
                im += co * g.imag() + si * g.real();
            }
            return std::norm(cplx(re, im)) * inv;
        },
        cache.grid());
}

enum class HarvestMode { Maxima, Band };

// Directions whose power is within 3 dB of the peak: local maxima (default) or every
// evaluated cell in the band.
inline std::vector<SteeringDirection> harvest_lobes(const Beampattern& bp, HarvestMode mode = HarvestMode::Maxima) {
    std::vector<SteeringDirection> out;
    const double thr = 0.5 * bp.peak_value;
    if (mode == HarvestMode::Maxima) {
        bool has_peak = false;
        for (const auto& c : bp.lobes) {
            if (bp.at(c.i, c.j) >= thr) {
                out.push_back(bp.direction(c));
                if (c == bp.peak_cell) has_peak = true;
            }
        }
        if (!has_peak) {
            const Vec3 up = unit_vector(bp.peak_dir);
            bool near = false;
            for (const auto& d : out) near = near || norm(unit_vector(d) - up) < 1e-9;
            if (!near) out.insert(out.begin(), bp.peak_dir);
        }
    } else {
        std::vector<Vec3> seen;
        for (int i = 0; i < bp.n_phi; ++i)
            for (int j = 0; j < bp.n_theta; ++j) {
                const double v = bp.at(i, j);
                if (std::isnan(v) || v < thr) continue;
                const SteeringDirection d = bp.direction({i, j});
                // The pole rows repeat one direction across every theta.
                if (std::abs(std::sin(d.phi)) < 1e-12) {
                    const Vec3 u = unit_vector(d);
                    bool dup = false;
                    for (const auto& s : seen) dup = dup || norm(u - s) < 1e-9;
                    if (dup) continue;
                    seen.push_back(u);
                }
                out.push_back(d);
            }
    }
    return out;
}

// Expected beampattern of N Gaussian coplanar elements with per-axis spread sigma_prime,
// at angular offset phi from the source.
inline double average_beampattern(int N, double sigma_prime, double lambda, double phi) {
    if (N < 1) throw Error(ErrorCode::InvalidConfig, "N must be >= 1");
    if (sigma_prime < 0) throw Error(ErrorCode::InvalidConfig, "sigma_prime must be >= 0");
    const double q = 4.0 * kPi * std::sin(phi / 2.0);
    const double e = std::exp(-q * q * sigma_prime * sigma_prime / (2.0 * lambda * lambda));
    return 1.0 / N + (1.0 - 1.0 / N) * e * e;
}

// phi_deg, theta_deg, P for every evaluated cell.
inline void write_beampattern_csv(std::ostream& os, const Beampattern& bp) {
    os << "phi_deg,theta_deg,P\n";
    char buf[96];
    for (int i = 0; i < bp.n_phi; ++i)
        for (int j = 0; j < bp.n_theta; ++j) {
            const double v = bp.at(i, j);
            if (std::isnan(v)) continue;
            std::snprintf(buf, sizeof buf, "%.2f,%.2f,%.9g\n", bp.phi_deg(i), bp.theta_deg(j), v);
            os << buf;
        }
}

} // namespace rfeye
