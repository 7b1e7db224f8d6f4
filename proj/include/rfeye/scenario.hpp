#pragma once

#include <algorithm>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "align.hpp"
#include "beamform.hpp"
#include "blinddetect.hpp"
#include "channel.hpp"
#include "clusterdoa.hpp"
#include "fix.hpp"
#include "geometry.hpp"
#include "music.hpp"
#include "signalgen.hpp"

namespace rfeye {

struct CaptureConfig {
    int buffer_len = 1024;
    int offset_min = 100;
    int offset_max = 600;
};

struct Scenario {
    std::string name = "scenario";
    WaveformSpec waveform{};
    Vec3 emitter{10.0, 20.0, 0.0};
    Vec3 location1{0.0, 0.0, 6.0};
    Vec3 location2{20.0, 0.0, 6.0};
    double sphere_radius = 1.0;
    int N = 20;
    ImpairmentConfig impairments{};
    // Common offset of every measured position at one location (receiver accuracy), per axis.
    double pos_bias_sigma = 0.0;
    // Each aligned capture is shifted by a uniform integer lag in [-misalignment, misalignment].
    int misalignment = 0;
    CaptureConfig capture{};
    DetectorConfig detector{};
    AlgorithmConfig algorithm{};
    bool clustering = true;
    bool music = false;
    int music_snapshots = 100;
    int trials = 1;
    std::uint64_t seed = 1;

    std::string sweep_key;
    std::vector<std::string> sweep_values;

    void validate() const {
        waveform.validate();
        impairments.validate();
        detector.validate();
        algorithm.validate();
        auto bad = [](const std::string& m) { throw Error(ErrorCode::InvalidConfig, m); };
        if (!(sphere_radius > 0)) bad("sphere_radius must be > 0");
        if (N < 4 || N > 64) bad("N must be in [4, 64]");
        if (trials < 1) bad("trials must be >= 1");
        if (!(pos_bias_sigma >= 0)) bad("pos_bias_sigma must be >= 0");
        if (misalignment < 0) bad("misalignment must be >= 0");
        if (capture.offset_min < 0 || capture.offset_max < capture.offset_min) bad("capture offsets are inconsistent");
        if (capture.offset_max + waveform.signature_length() + misalignment > capture.buffer_len)
            bad("capture buffer too short for the signature at offset_max");
        if (capture.buffer_len < detector.window_len) bad("capture buffer shorter than the detector window");
        if (music && (music_snapshots < N)) bad("music snapshots must be >= N");
        if (norm(location2 - location1) == 0.0) bad("locations coincide");
        for (const Vec3& c : {location1, location2})
            if (norm(emitter - c) < 10.0 * sphere_radius) bad("emitter violates the far-field bound at a location");
    }
};

struct LocationRecord {
    SteeringDirection truth;
    SteeringDirection estimate;
    double az_err = std::numeric_limits<double>::quiet_NaN(); // degrees
    double el_err = std::numeric_limits<double>::quiet_NaN();
    double ang_err = std::numeric_limits<double>::quiet_NaN();
    double single_az_err = std::numeric_limits<double>::quiet_NaN();
    double single_ang_err = std::numeric_limits<double>::quiet_NaN();
    double music_ang_err = std::numeric_limits<double>::quiet_NaN();
    double radius_deg = std::numeric_limits<double>::quiet_NaN();
    int sweeps = 0;
};

struct TrialRecord {
    int trial_id = 0;
    std::string status = "ok";
    LocationRecord loc[2];
    Vec3 fix{std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN(),
             std::numeric_limits<double>::quiet_NaN()};
    FixErrors err{std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN(),
                  std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN(),
                  std::numeric_limits<double>::quiet_NaN()};
    int iterations_used = 0;
    double wall_time = 0.0;
    std::vector<IterationRecord> telemetry[2];
};

struct DirectionErrors {
    double az = 0, el = 0, ang = 0; // degrees
};

inline DirectionErrors direction_errors(const SteeringDirection& est, const SteeringDirection& truth) {
    const AzEl a = az_el(est), b = az_el(truth);
    return {rad2deg(std::abs(wrap_pi(a.az - b.az))), rad2deg(std::abs(a.el - b.el)), rad2deg(angular_distance(est, truth))};
}

namespace detail {

inline Vec3 point_in_sphere(Rng& rng, double R) {
    std::normal_distribution<double> n(0.0, 1.0);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Vec3 v{n(rng), n(rng), n(rng)};
    double l = norm(v);
    while (l == 0.0) {
        v = {n(rng), n(rng), n(rng)};
        l = norm(v);
    }
    return (R * std::cbrt(u(rng)) / l) * v;
}

struct LocationCaptures {
    std::vector<ReceptionPoint> points;
    std::vector<IqTrace> buffers;
    std::vector<std::size_t> taus;
    std::vector<int> offsets;
    ImpairmentConfig channel;
    EmitterTruth truth;
    double cfo = 0.0;
};

// Clean-signature buffers captured at N seeded points around hover location c.
inline LocationCaptures synthesize_location(const Scenario& s, std::uint64_t ts, int j, const Vec3& c, const IqTrace& sig, Rng& rng) {
    LocationCaptures L;
    L.truth = EmitterTruth::from_position(s.emitter - c);
    L.channel = s.impairments;
    L.channel.seed = mix_seed(ts, 300 + static_cast<std::uint64_t>(j));
    L.channel.ground_z = -c[2];
    const Vec3 bias = perturb_position({0, 0, 0}, s.pos_bias_sigma, mix_seed(ts, 200 + static_cast<std::uint64_t>(j)));
    std::uniform_int_distribution<int> off(s.capture.offset_min, s.capture.offset_max);

    for (int k = 0; k < s.N; ++k) {
        const Vec3 p = point_in_sphere(rng, s.sphere_radius);
        const Vec3 pm = perturb_position(p, s.impairments.pos_error_sigma,
                                         mix_seed(ts, 1000 * static_cast<std::uint64_t>(j + 1) + static_cast<std::uint64_t>(k))) +
                        bias;
        const int o = off(rng);
        const IqTrace buf = embed(sig, static_cast<std::size_t>(s.capture.buffer_len), static_cast<std::size_t>(o));
        PropagationOptions po{s.sphere_radius, static_cast<std::uint64_t>(k), o};
        L.buffers.push_back(propagate(buf, to_spherical(p), L.truth, L.channel, po));
        L.offsets.push_back(o);
        ReceptionPoint rp;
        rp.position = to_spherical(p);
        rp.measured_position = to_spherical(pm);
        L.points.push_back(rp);
    }
    return L;
}

} // namespace detail

inline TrialRecord run_trial(const Scenario& s, int trial_id) {
    const auto t0 = std::chrono::steady_clock::now();
    TrialRecord rec;
    rec.trial_id = trial_id;
    const std::uint64_t ts = s.seed ^ static_cast<std::uint64_t>(trial_id);
    try {
        const IqTrace sig = make_signature(s.waveform, mix_seed(ts, 1));
        const double lambda = s.waveform.carrier_wavelength;
        const Vec3 centers[2] = {s.location1, s.location2};
        SignatureModel model;
        DoaEstimate doas[2];
        for (int j = 0; j < 2; ++j) {
            const Vec3 c = centers[j];
            Rng rng(mix_seed(ts, 100 + static_cast<std::uint64_t>(j)));
            detail::LocationCaptures L = detail::synthesize_location(s, ts, j, c, sig, rng);
            std::uniform_int_distribution<int> mis(-s.misalignment, s.misalignment);

            if (j == 0) {
                model = detect_signature(L.buffers[0], s.detector);
                derotate(model.signature, estimate_cfo(model.signature, model));
            }
            const std::size_t w = model.signature.size();
            for (int k = 0; k < s.N; ++k) {
                const IqTrace& raw = L.buffers[static_cast<std::size_t>(k)];
                const AlignResult ar = align_capture(raw, model, s.detector.corr_threshold);
                const long shift = mis(rng);
                const long hi = static_cast<long>(raw.size() - w);
                const std::size_t tau = static_cast<std::size_t>(std::clamp(static_cast<long>(ar.tau) + shift, 0L, hi));
                L.taus.push_back(tau);
                L.points[static_cast<std::size_t>(k)].aligned_signal = detail::slice(raw, tau, tau + w);
            }
            L.cfo = estimate_cfo(L.points[0].aligned_signal, model);
            L.points = correct_cfo(std::move(L.points), L.cfo);

            const std::vector<ArrayElement> elems = make_array(L.points, model.signature);
            LocationRecord& lr = rec.loc[j];
            lr.truth = L.truth.direction();

            const DoaEstimate single = single_sweep_doa(elems, lambda, s.algorithm.grid);
            const DirectionErrors se = direction_errors(single.direction(), lr.truth);
            lr.single_az_err = se.az;
            lr.single_ang_err = se.ang;

            DoaEstimate est = single;
            if (s.clustering) {
                AlgorithmConfig ac = s.algorithm;
                ac.seed = mix_seed(ts, 400 + static_cast<std::uint64_t>(j));
                Algorithm1Result a1 = algorithm1(elems, ac, lambda);
                est = a1.estimate;
                lr.radius_deg = rad2deg(a1.radius);
                lr.sweeps = a1.sweeps;
                rec.iterations_used += a1.sweeps;
                rec.telemetry[j] = std::move(a1.telemetry);
            }
            lr.estimate = est.direction();
            const DirectionErrors e = direction_errors(lr.estimate, lr.truth);
            lr.az_err = e.az;
            lr.el_err = e.el;
            lr.ang_err = e.ang;
            doas[j] = est;

            if (s.music) {
                // Snapshots: fresh noise on the same geometry, alignment and CFO correction.
                std::vector<std::vector<cplx>> snaps;
                std::vector<Vec3> pos;
                for (const auto& p : L.points) pos.push_back(to_rect(p.measured_position));
                for (int q = 0; q < s.music_snapshots; ++q) {
                    std::vector<cplx> v;
                    for (int k = 0; k < s.N; ++k) {
                        const std::size_t kk = static_cast<std::size_t>(k);
                        const IqTrace buf = embed(sig, static_cast<std::size_t>(s.capture.buffer_len), static_cast<std::size_t>(L.offsets[kk]));
                        PropagationOptions po{s.sphere_radius, static_cast<std::uint64_t>(k) + 100000ULL * static_cast<std::uint64_t>(q + 1),
                                              L.offsets[kk]};
                        IqTrace y = detail::slice(propagate(buf, L.points[kk].position, L.truth, L.channel, po), L.taus[kk], L.taus[kk] + w);
                        derotate(y, L.cfo);
                        v.push_back(channel_estimate(y, model.signature));
                    }
                    snaps.push_back(std::move(v));
                }
                const Beampattern mp = music_spectrum(covariance(snaps), pos, lambda, s.algorithm.grid);
                lr.music_ang_err = direction_errors(mp.peak_dir, lr.truth).ang;
            }
        }
        const FixResult f = localize(doas[0], doas[1], relative_location(s.location1, s.location2), s.location1);
        rec.fix = f.world;
        rec.err = error_metrics(f.world, s.emitter);
    } catch (const Error& e) {
        rec.status = to_string(e.code());
    }
    rec.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return rec;
}

inline std::vector<TrialRecord> run_scenario(const Scenario& s) {
    s.validate();
    std::vector<TrialRecord> out;
    out.reserve(static_cast<std::size_t>(s.trials));
    for (int t = 0; t < s.trials; ++t) out.push_back(run_trial(s, t));
    std::sort(out.begin(), out.end(), [](const TrialRecord& a, const TrialRecord& b) { return a.trial_id < b.trial_id; });
    return out;
}

// ---------------------------------------------------------------- summaries

inline double median(std::vector<double> v) {
    v.erase(std::remove_if(v.begin(), v.end(), [](double x) { return std::isnan(x); }), v.end());
    if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
    const std::size_t h = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(h), v.end());
    double m = v[h];
    if (v.size() % 2 == 0) m = 0.5 * (m + *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(h)));
    return m;
}

struct ScenarioSummary {
    int trials = 0;
    int failures = 0;
    double az_err = 0, el_err = 0, ang_err = 0, single_ang_err = 0, single_az_err = 0, music_ang_err = 0;
    double abs_dx = 0, abs_dy = 0, abs_dz = 0, e2d = 0, e3d = 0;
};

inline ScenarioSummary summarize(const std::vector<TrialRecord>& recs) {
    ScenarioSummary s;
    std::vector<double> az, el, ang, sang, saz, mang, dx, dy, dz, e2, e3;
    for (const auto& r : recs) {
        ++s.trials;
        const bool ok = r.status == "ok";
        if (!ok) ++s.failures;
        // A failed trial counts as an unbounded error rather than dropping out of the median.
        auto val = [ok](double v) { return (!ok && std::isnan(v)) ? std::numeric_limits<double>::infinity() : v; };
        for (const auto& l : r.loc) {
            az.push_back(val(l.az_err));
            el.push_back(val(l.el_err));
            ang.push_back(val(l.ang_err));
            sang.push_back(val(l.single_ang_err));
            saz.push_back(val(l.single_az_err));
            mang.push_back(l.music_ang_err);
        }
        dx.push_back(val(std::abs(r.err.dx)));
        dy.push_back(val(std::abs(r.err.dy)));
        dz.push_back(val(std::abs(r.err.dz)));
        e2.push_back(val(r.err.e2d));
        e3.push_back(val(r.err.e3d));
    }
    s.az_err = median(az);
    s.el_err = median(el);
    s.ang_err = median(ang);
    s.single_ang_err = median(sang);
    s.single_az_err = median(saz);
    s.music_ang_err = median(mang);
    s.abs_dx = median(dx);
    s.abs_dy = median(dy);
    s.abs_dz = median(dz);
    s.e2d = median(e2);
    s.e3d = median(e3);
    return s;
}

// ---------------------------------------------------------------- CSV output

namespace detail {

inline std::string fmt(double v, int prec) {
    if (std::isnan(v)) return "nan";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", prec, v);
    std::string s(buf);
    if (s == "-0.00" || s == "-0.000") s.erase(0, 1);
    return s;
}

} // namespace detail

inline void write_trials_csv(std::ostream& os, const std::vector<TrialRecord>& recs) {
    os << "trial_id,status";
    for (int j = 1; j <= 2; ++j)
        os << ",true_phi" << j << ",true_theta" << j << ",est_phi" << j << ",est_theta" << j << ",az_err" << j << ",el_err" << j
           << ",ang_err" << j << ",single_az_err" << j << ",single_ang_err" << j << ",music_ang_err" << j << ",dominant_radius" << j
           << ",sweeps" << j;
    os << ",fix_x,fix_y,fix_z,dx,dy,dz,e2d,e3d,iterations_used\n";
    using detail::fmt;
    for (const auto& r : recs) {
        os << r.trial_id << ',' << r.status;
        for (const auto& l : r.loc) {
            os << ',' << fmt(rad2deg(l.truth.phi), 2) << ',' << fmt(rad2deg(l.truth.theta), 2) << ',' << fmt(rad2deg(l.estimate.phi), 2)
               << ',' << fmt(rad2deg(l.estimate.theta), 2) << ',' << fmt(l.az_err, 2) << ',' << fmt(l.el_err, 2) << ','
               << fmt(l.ang_err, 2) << ',' << fmt(l.single_az_err, 2) << ',' << fmt(l.single_ang_err, 2) << ','
               << fmt(l.music_ang_err, 2) << ',' << fmt(l.radius_deg, 2) << ',' << l.sweeps;
        }
        os << ',' << fmt(r.fix[0], 3) << ',' << fmt(r.fix[1], 3) << ',' << fmt(r.fix[2], 3) << ',' << fmt(r.err.dx, 3) << ','
           << fmt(r.err.dy, 3) << ',' << fmt(r.err.dz, 3) << ',' << fmt(r.err.e2d, 3) << ',' << fmt(r.err.e3d, 3) << ','
           << r.iterations_used << '\n';
    }
}

// Wall-clock time lives in its own file so the results file stays byte-reproducible.
inline void write_timing_csv(std::ostream& os, const std::vector<TrialRecord>& recs) {
    os << "trial_id,wall_time\n";
    for (const auto& r : recs) os << r.trial_id << ',' << detail::fmt(r.wall_time, 6) << '\n';
}

inline void write_telemetry_csv(std::ostream& os, const std::vector<TrialRecord>& recs) {
    os << "trial_id,location,M,n,candidates,radius_deg,centroid_phi,centroid_theta,improved\n";
    using detail::fmt;
    for (const auto& r : recs)
        for (int j = 0; j < 2; ++j)
            for (const auto& t : r.telemetry[j])
                os << r.trial_id << ',' << (j + 1) << ',' << t.M << ',' << t.n << ',' << t.candidates << ',' << fmt(t.radius_deg, 2) << ','
                   << fmt(t.centroid_phi_deg, 2) << ',' << fmt(t.centroid_theta_deg, 2) << ',' << (t.improved ? 1 : 0) << '\n';
}

// ---------------------------------------------------------------- configuration

namespace detail {

inline double to_double(const std::string& k, const std::string& v) {
    try {
        std::size_t pos = 0;
        const double d = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return d;
    } catch (const std::exception&) {
        throw Error(ErrorCode::InvalidConfig, k + ": not a number: '" + v + "'");
    }
}

inline long long to_int(const std::string& k, const std::string& v) {
    const double d = to_double(k, v);
    if (d != std::floor(d)) throw Error(ErrorCode::InvalidConfig, k + ": not an integer: '" + v + "'");
    return static_cast<long long>(d);
}

inline bool to_bool(const std::string& k, const std::string& v) {
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw Error(ErrorCode::InvalidConfig, k + ": not a boolean: '" + v + "'");
}

inline std::vector<std::string> split_list(const std::string& v) {
    std::vector<std::string> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto b = item.find_first_not_of(" \t");
        const auto e = item.find_last_not_of(" \t");
        if (b != std::string::npos) out.push_back(item.substr(b, e - b + 1));
    }
    return out;
}

inline Vec3 to_vec3(const std::string& k, const std::string& v) {
    const auto parts = split_list(v);
    if (parts.size() != 3) throw Error(ErrorCode::InvalidConfig, k + ": expected x, y, z");
    return {to_double(k, parts[0]), to_double(k, parts[1]), to_double(k, parts[2])};
}

} // namespace detail

// Sets one "section.key" field. Unknown keys are rejected.
inline void set_field(Scenario& s, const std::string& key, const std::string& v) {
    using namespace detail;
    auto& w = s.waveform;
    auto& im = s.impairments;
    auto& al = s.algorithm;
    if (key == "scenario.name") s.name = v;
    else if (key == "scenario.trials") s.trials = static_cast<int>(to_int(key, v));
    else if (key == "scenario.seed") s.seed = static_cast<std::uint64_t>(to_int(key, v));
    else if (key == "scenario.N") s.N = static_cast<int>(to_int(key, v));
    else if (key == "scenario.sphere_radius") s.sphere_radius = to_double(key, v);
    else if (key == "waveform.kind") {
        if (v == "repeated_symbol") w.kind = WaveformKind::RepeatedSymbol;
        else if (v == "chirp") w.kind = WaveformKind::Chirp;
        else throw Error(ErrorCode::InvalidConfig, key + ": expected repeated_symbol or chirp");
    } else if (key == "waveform.pattern_width") w.pattern_width = static_cast<int>(to_int(key, v));
    else if (key == "waveform.repetitions") w.repetitions = static_cast<int>(to_int(key, v));
    else if (key == "waveform.sample_rate") w.sample_rate = to_double(key, v);
    else if (key == "waveform.wavelength") w.carrier_wavelength = to_double(key, v);
    else if (key == "waveform.bandwidth") w.bandwidth = to_double(key, v);
    else if (key == "geometry.emitter") s.emitter = to_vec3(key, v);
    else if (key == "geometry.location1") s.location1 = to_vec3(key, v);
    else if (key == "geometry.location2") s.location2 = to_vec3(key, v);
    else if (key == "capture.buffer_len") s.capture.buffer_len = static_cast<int>(to_int(key, v));
    else if (key == "capture.offset_min") s.capture.offset_min = static_cast<int>(to_int(key, v));
    else if (key == "capture.offset_max") s.capture.offset_max = static_cast<int>(to_int(key, v));
    else if (key == "impairments.snr_db") im.snr_db = (v == "inf") ? std::numeric_limits<double>::infinity() : to_double(key, v);
    else if (key == "impairments.multipath") {
        if (v == "none") im.multipath = Multipath::None;
        else if (v == "rayleigh") im.multipath = Multipath::Rayleigh;
        else if (v == "two_ray") im.multipath = Multipath::TwoRay;
        else throw Error(ErrorCode::InvalidConfig, key + ": expected none, rayleigh or two_ray");
    } else if (key == "impairments.cfo_hz") im.cfo_hz = to_double(key, v);
    else if (key == "impairments.pos_error_sigma") im.pos_error_sigma = to_double(key, v);
    else if (key == "impairments.pos_bias_sigma") s.pos_bias_sigma = to_double(key, v);
    else if (key == "impairments.misalignment") s.misalignment = static_cast<int>(to_int(key, v));
    else if (key == "impairments.rayleigh_taps") im.rayleigh_taps = static_cast<int>(to_int(key, v));
    else if (key == "impairments.rayleigh_decay") im.rayleigh_decay = to_double(key, v);
    else if (key == "impairments.reflection_coeff") im.reflection_coeff = to_double(key, v);
    else if (key == "detector.window_len") s.detector.window_len = static_cast<int>(to_int(key, v));
    else if (key == "detector.energy_threshold") s.detector.energy_threshold = to_double(key, v);
    else if (key == "detector.corr_threshold") s.detector.corr_threshold = to_double(key, v);
    else if (key == "algorithm.clustering") s.clustering = to_bool(key, v);
    else if (key == "algorithm.n_max") al.n_max = static_cast<int>(to_int(key, v));
    else if (key == "algorithm.r_th_deg") al.r_th_deg = to_double(key, v);
    else if (key == "algorithm.K") al.K = static_cast<int>(to_int(key, v));
    else if (key == "algorithm.min_members") al.min_members = static_cast<int>(to_int(key, v));
    else if (key == "algorithm.dominant") {
        if (v == "smallest_radius") al.dominant = DominantRule::SmallestRadius;
        else if (v == "most_members") al.dominant = DominantRule::MostMembers;
        else throw Error(ErrorCode::InvalidConfig, key + ": expected smallest_radius or most_members");
    }
    else if (key == "algorithm.harvest") {
        if (v == "maxima") al.harvest = HarvestMode::Maxima;
        else if (v == "band") al.harvest = HarvestMode::Band;
        else throw Error(ErrorCode::InvalidConfig, key + ": expected maxima or band");
    } else if (key == "algorithm.grid_resolution") {
        al.grid.az_resolution = al.grid.el_resolution = to_double(key, v);
    } else if (key == "algorithm.refinement_levels") al.grid.refinement_levels = static_cast<int>(to_int(key, v));
    else if (key == "music.enabled") s.music = to_bool(key, v);
    else if (key == "music.snapshots") s.music_snapshots = static_cast<int>(to_int(key, v));
    else if (key == "sweep.key") s.sweep_key = v;
    else if (key == "sweep.values") s.sweep_values = split_list(v);
    else throw Error(ErrorCode::InvalidConfig, "unknown key '" + key + "'");
}

inline Scenario parse_scenario(std::istream& is) {
    boost::property_tree::ptree pt;
    try {
        boost::property_tree::ini_parser::read_ini(is, pt);
    } catch (const boost::property_tree::ini_parser_error& e) {
        throw Error(ErrorCode::InvalidConfig, e.message() + " at line " + std::to_string(e.line()));
    }
    Scenario s;
    for (const auto& sec : pt) {
        if (sec.second.empty() && !sec.second.data().empty())
            throw Error(ErrorCode::InvalidConfig, "key '" + sec.first + "' outside a section");
        for (const auto& kv : sec.second) set_field(s, sec.first + "." + kv.first, kv.second.data());
    }
    if (!s.sweep_key.empty() && s.sweep_values.empty()) throw Error(ErrorCode::InvalidConfig, "sweep.key given without sweep.values");
    return s;
}

inline Scenario parse_scenario_string(const std::string& text) {
    std::istringstream is(text);
    return parse_scenario(is);
}

// One scenario per sweep value (or the scenario itself when no sweep is configured).
inline std::vector<Scenario> expand_sweep(const Scenario& s) {
    if (s.sweep_key.empty()) return {s};
    std::vector<Scenario> out;
    for (const auto& v : s.sweep_values) {
        Scenario c = s;
        c.sweep_key.clear();
        c.sweep_values.clear();
        if (s.sweep_key == "geometry.altitude") {
            // Altitude of both hover locations above the ground plane.
            const double h = detail::to_double(s.sweep_key, v);
            c.location1[2] = h;
            c.location2[2] = h;
        } else {
            set_field(c, s.sweep_key, v);
        }
        c.name = s.name + "_" + v;
        out.push_back(std::move(c));
    }
    return out;
}

} // namespace rfeye
