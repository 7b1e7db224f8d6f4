#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <unordered_set>
#include <vector>

#include "beamform.hpp"
#include "geometry.hpp"
#include "types.hpp"

namespace rfeye {

enum class DoaSource { SingleSweep, Clustered };

struct DoaEstimate {
    double phi = 0.0;
    double theta = 0.0;
    DoaSource source = DoaSource::SingleSweep;

    SteeringDirection direction() const { return {phi, theta}; }
};

inline DoaEstimate make_estimate(const SteeringDirection& d, DoaSource s) {
    const SteeringDirection c = canonical(d);
    return {c.phi, c.theta, s};
}

inline double binomial(int n, int k) {
    if (k < 0 || k > n) return 0.0;
    k = std::min(k, n - k);
    double r = 1.0;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return std::round(r);
}

// Uniformly random M-subsets of {0..N-1}, never repeating within one sampler.
class SubsetSampler {
public:
    SubsetSampler(int N, int M, std::uint64_t seed) : n_(N), m_(M), rng_(mix_seed(seed, 0x5B5E7 + static_cast<std::uint64_t>(M))) {
        if (N < 1 || N > 64) throw Error(ErrorCode::InvalidM, "N must be in [1, 64]");
        const int lo = (N + 1) / 2;
        if (M < lo || M > N - 2) throw Error(ErrorCode::InvalidM, "M must be in [ceil(N/2), N-2]");
        total_ = binomial(N, M);
    }

    double total() const { return total_; }
    std::size_t drawn() const { return seen_.size(); }
    bool exhausted() const { return static_cast<double>(seen_.size()) >= total_; }

    std::vector<int> next() {
        if (exhausted()) throw Error(ErrorCode::SubsetsExhausted, "all subsets already drawn");
        std::vector<int> idx(static_cast<std::size_t>(n_));
        for (;;) {
            std::iota(idx.begin(), idx.end(), 0);
            for (int i = 0; i < m_; ++i) {
                std::uniform_int_distribution<int> d(i, n_ - 1);
                std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(d(rng_))]);
            }
            std::uint64_t mask = 0;
            for (int i = 0; i < m_; ++i) mask |= std::uint64_t{1} << idx[static_cast<std::size_t>(i)];
            if (seen_.insert(mask).second) {
                std::vector<int> out(idx.begin(), idx.begin() + m_);
                std::sort(out.begin(), out.end());
                return out;
            }
        }
    }

private:
    int n_, m_;
    Rng rng_;
    double total_ = 0.0;
    std::unordered_set<std::uint64_t> seen_;
};

struct Candidate {
    double phi = 0.0;
    double theta = 0.0;
};

struct ClusterResult {
    std::vector<Candidate> centroids;
    std::vector<int> assignment;
    std::vector<double> loss;   // L_r, squared radians
    std::vector<int> count;     // N_r
    double objective = 0.0;
    int dominant = -1;
    double dominant_radius = std::numeric_limits<double>::infinity();
    int dominant_count = 0;
    int iterations = 0;
    std::vector<double> objective_trace;

    double radius(int r) const {
        return count[static_cast<std::size_t>(r)] > 0
                   ? std::sqrt(loss[static_cast<std::size_t>(r)] / count[static_cast<std::size_t>(r)])
                   : std::numeric_limits<double>::infinity();
    }
};

inline double cluster_dist2(const Candidate& a, const Candidate& b) {
    const double dp = wrap_pi(a.phi - b.phi);
    const double dt = wrap_pi(a.theta - b.theta);
    return dp * dp + dt * dt;
}

enum class DominantRule {
    SmallestRadius, // default
    MostMembers,    // non-default; ties go to the smaller radius
};

// Dominant cluster among clusters with at least min_members members. SmallestRadius ties go to
// the larger cluster, then the lower index.
inline void choose_dominant(ClusterResult& cr, int min_members, DominantRule rule = DominantRule::SmallestRadius) {
    cr.dominant = -1;
    cr.dominant_radius = std::numeric_limits<double>::infinity();
    cr.dominant_count = 0;
    for (int r = 0; r < static_cast<int>(cr.centroids.size()); ++r) {
        const int n = cr.count[static_cast<std::size_t>(r)];
        if (n == 0 || n < min_members) continue;
        const double R = cr.radius(r);
        const bool better = rule == DominantRule::SmallestRadius
                                ? (R < cr.dominant_radius || (R == cr.dominant_radius && n > cr.dominant_count))
                                : (n > cr.dominant_count || (n == cr.dominant_count && R < cr.dominant_radius));
        if (cr.dominant < 0 || better) {
            cr.dominant = r;
            cr.dominant_radius = R;
            cr.dominant_count = n;
        }
    }
}

// Lloyd iterations on the wrapped (phi, theta) metric with farthest-point seeding. Centroids
// move by the mean wrapped offset of their members, which never increases the objective.
inline ClusterResult kmeans(const std::vector<Candidate>& pts, int K, std::uint64_t seed, int min_members = 1,
                            int max_iter = 100, DominantRule rule = DominantRule::SmallestRadius) {
    if (pts.empty()) throw Error(ErrorCode::EmptyCandidates, "no candidates to cluster");
    if (K < 1) throw Error(ErrorCode::InvalidConfig, "K must be >= 1");
    const std::size_t n = pts.size();
    const int k = static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(K), n));

    ClusterResult cr;
    Rng rng(mix_seed(seed, 0xC1u));
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    cr.centroids.push_back(pts[pick(rng)]);
    std::vector<double> mind(n, std::numeric_limits<double>::infinity());
    while (static_cast<int>(cr.centroids.size()) < k) {
        std::size_t far = 0;
        double fd = -1.0;
        for (std::size_t i = 0; i < n; ++i) {
            mind[i] = std::min(mind[i], cluster_dist2(pts[i], cr.centroids.back()));
            if (mind[i] > fd) {
                fd = mind[i];
                far = i;
            }
        }
        cr.centroids.push_back(pts[far]);
    }
    // Pad with empty clusters if there are fewer candidates than K.
    const std::size_t kk = static_cast<std::size_t>(K);
    cr.assignment.assign(n, -1);
    cr.loss.assign(kk, 0.0);
    cr.count.assign(kk, 0);
    while (cr.centroids.size() < kk) cr.centroids.push_back(cr.centroids.front());

    auto assign = [&]() {
        bool changed = false;
        std::fill(cr.loss.begin(), cr.loss.end(), 0.0);
        std::fill(cr.count.begin(), cr.count.end(), 0);
        cr.objective = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            int best = 0;
            double bd = std::numeric_limits<double>::infinity();
            for (int r = 0; r < k; ++r) {
                const double d = cluster_dist2(pts[i], cr.centroids[static_cast<std::size_t>(r)]);
                if (d < bd) {
                    bd = d;
                    best = r;
                }
            }
            if (cr.assignment[i] != best) changed = true;
            cr.assignment[i] = best;
            cr.loss[static_cast<std::size_t>(best)] += bd;
            cr.count[static_cast<std::size_t>(best)] += 1;
            cr.objective += bd;
        }
        return changed;
    };

    assign();
    cr.objective_trace.push_back(cr.objective);
    for (int it = 0; it < max_iter; ++it) {
        std::vector<double> sp(kk, 0.0), st(kk, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t r = static_cast<std::size_t>(cr.assignment[i]);
            sp[r] += wrap_pi(pts[i].phi - cr.centroids[r].phi);
            st[r] += wrap_pi(pts[i].theta - cr.centroids[r].theta);
        }
        for (std::size_t r = 0; r < kk; ++r) {
            if (cr.count[r] == 0) continue;
            cr.centroids[r].phi = wrap_pi(cr.centroids[r].phi + sp[r] / cr.count[r]);
            cr.centroids[r].theta = wrap_pi(cr.centroids[r].theta + st[r] / cr.count[r]);
        }
        const bool changed = assign();
        cr.objective_trace.push_back(cr.objective);
        cr.iterations = it + 1;
        if (!changed) break;
    }
    choose_dominant(cr, min_members, rule);
    return cr;
}

struct AlgorithmConfig {
    int n_max = 40;
    double r_th_deg = 5.0;
    int K = 3;
    std::uint64_t seed = 0;
    HarvestMode harvest = HarvestMode::Maxima;
    // A dominant cluster must hold at least this many candidates; a lone candidate has
    // radius zero and would otherwise end the search on its first appearance.
    int min_members = 2;
    DominantRule dominant = DominantRule::SmallestRadius;
    AngularGrid grid{};

    void validate() const {
        if (n_max < 1) throw Error(ErrorCode::InvalidConfig, "n_max must be >= 1");
        if (!(r_th_deg > 0)) throw Error(ErrorCode::InvalidConfig, "r_th must be > 0");
        if (K < 1) throw Error(ErrorCode::InvalidConfig, "K must be >= 1");
        if (min_members < 1) throw Error(ErrorCode::InvalidConfig, "min_members must be >= 1");
        grid.validate();
    }
};

struct IterationRecord {
    int M = 0;
    int n = 0;
    std::size_t candidates = 0;
    double radius_deg = 0.0;
    double centroid_phi_deg = 0.0;
    double centroid_theta_deg = 0.0;
    bool improved = false;
};

struct Algorithm1Result {
    DoaEstimate estimate;
    double radius = std::numeric_limits<double>::infinity();
    int sweeps = 0;
    bool early_exit = false;
    std::size_t candidates = 0;
    std::vector<IterationRecord> telemetry;
};

namespace detail {

// Of the two names of a direction, the one nearer ref in the clustering metric.
inline Candidate align_to(const SteeringDirection& d, const Candidate& ref) {
    const Candidate a{wrap_pi(d.phi), wrap_pi(d.theta)};
    const Candidate b{wrap_pi(-d.phi), wrap_pi(d.theta + kPi)};
    return cluster_dist2(a, ref) <= cluster_dist2(b, ref) ? a : b;
}

inline double wrapped_median(std::vector<double> v, double center) {
    for (auto& x : v) x = wrap_pi(x - center);
    const std::size_t h = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(h), v.end());
    double m = v[h];
    if (v.size() % 2 == 0) {
        const double lo = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(h));
        m = 0.5 * (m + lo);
    }
    return wrap_pi(center + m);
}

} // namespace detail

inline DoaEstimate single_sweep_doa(const std::vector<ArrayElement>& elems, double lambda, const AngularGrid& grid = {}) {
    return make_estimate(sweep(elems, lambda, grid).peak_dir, DoaSource::SingleSweep);
}

inline std::vector<ArrayElement> pick(const std::vector<ArrayElement>& e, const std::vector<int>& idx) {
    std::vector<ArrayElement> out;
    out.reserve(idx.size());
    for (int i : idx) out.push_back(e[static_cast<std::size_t>(i)]);
    return out;
}

// Subset expansion, lobe harvesting and k-means refinement over M = N-2 .. ceil(N/2).
inline Algorithm1Result algorithm1(const std::vector<ArrayElement>& elems, const AlgorithmConfig& cfg, double lambda) {
    cfg.validate();
    const int N = static_cast<int>(elems.size());
    if (N < 4) throw Error(ErrorCode::InvalidM, "at least 4 reception points are needed for subset expansion");

    Algorithm1Result res;
    std::vector<Candidate> D;
    Candidate ref{};
    bool have_ref = false;
    const double rth = deg2rad(cfg.r_th_deg);
    ClusterResult last;
    bool have_last = false;
    detail::SteeringCache cache(elems, lambda, cfg.grid);

    for (int M = N - 2; M >= (N + 1) / 2 && !res.early_exit; --M) {
        SubsetSampler sampler(N, M, cfg.seed);
        for (int n = 0; n < cfg.n_max && !sampler.exhausted(); ++n) {
            const std::vector<int> idx = sampler.next();
            const Beampattern bp = sweep_subset(cache, elems, idx);
            ++res.sweeps;
            if (!have_ref) {
                ref = {bp.peak_dir.phi, bp.peak_dir.theta};
                have_ref = true;
            }
            for (const auto& d : harvest_lobes(bp, cfg.harvest)) D.push_back(detail::align_to(d, ref));

            ClusterResult cr = kmeans(D, cfg.K, mix_seed(cfg.seed, static_cast<std::uint64_t>(res.sweeps)), cfg.min_members, 100, cfg.dominant);
            IterationRecord rec{M, n, D.size(), rad2deg(cr.dominant_radius), 0.0, 0.0, false};
            if (cr.dominant >= 0) {
                const Candidate& c = cr.centroids[static_cast<std::size_t>(cr.dominant)];
                rec.centroid_phi_deg = rad2deg(c.phi);
                rec.centroid_theta_deg = rad2deg(c.theta);
                if (cr.dominant_radius < res.radius) {
                    res.radius = cr.dominant_radius;
                    std::vector<double> ph, th;
                    for (std::size_t i = 0; i < D.size(); ++i)
                        if (cr.assignment[i] == cr.dominant) {
                            ph.push_back(D[i].phi);
                            th.push_back(D[i].theta);
                        }
                    res.estimate = make_estimate({detail::wrapped_median(ph, c.phi), detail::wrapped_median(th, c.theta)},
                                                 DoaSource::Clustered);
                    rec.improved = true;
                }
            }
            res.telemetry.push_back(rec);
            last = std::move(cr);
            have_last = true;
            if (res.radius < rth) {
                res.early_exit = true;
                break;
            }
        }
    }
    res.candidates = D.size();
    if (!std::isfinite(res.radius)) {
        // No cluster ever met the membership floor; fall back to the largest final cluster.
        if (!have_last) throw Error(ErrorCode::EmptyCandidates, "no sweep produced candidates");
        int big = 0;
        for (int r = 1; r < static_cast<int>(last.count.size()); ++r)
            if (last.count[static_cast<std::size_t>(r)] > last.count[static_cast<std::size_t>(big)]) big = r;
        const Candidate& c = last.centroids[static_cast<std::size_t>(big)];
        res.estimate = make_estimate({c.phi, c.theta}, DoaSource::Clustered);
        res.radius = last.radius(big);
    }
    return res;
}

} // namespace rfeye
