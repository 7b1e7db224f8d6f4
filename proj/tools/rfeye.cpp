// rfeye: command-line front end for the detection / DoA / localization pipeline.

#include <CLI11.hpp>
#include <json.hpp>
#include <rfeye/rfeye.hpp>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace rfeye;

namespace {

constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;
constexpr int kExitInvalid = 3;

struct Config {
    boost::property_tree::ptree tree;
    fs::path dir; // relative input paths resolve against the config file's directory
};

Config load_config(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw Error(ErrorCode::Io, "cannot open config " + path);
    Config c;
    try {
        boost::property_tree::ini_parser::read_ini(is, c.tree);
    } catch (const boost::property_tree::ini_parser_error& e) {
        throw Error(ErrorCode::InvalidConfig, e.message() + " at line " + std::to_string(e.line()));
    }
    c.dir = fs::path(path).parent_path();
    return c;
}

// Every section not in `own` is scenario configuration.
Scenario scenario_from(const Config& c, const std::set<std::string>& own = {}) {
    Scenario s;
    for (const auto& sec : c.tree) {
        if (own.count(sec.first)) continue;
        if (sec.second.empty() && !sec.second.data().empty())
            throw Error(ErrorCode::InvalidConfig, "key '" + sec.first + "' outside a section");
        for (const auto& kv : sec.second) set_field(s, sec.first + "." + kv.first, kv.second.data());
    }
    return s;
}

std::string need(const Config& c, const std::string& key) {
    const auto v = c.tree.get_optional<std::string>(key);
    if (!v) throw Error(ErrorCode::InvalidConfig, "missing key '" + key + "'");
    return *v;
}

fs::path input_path(const Config& c, const std::string& key) {
    const fs::path p = need(c, key);
    return p.is_absolute() ? p : c.dir / p;
}

std::ofstream open_out(const fs::path& p) {
    std::ofstream os(p);
    if (!os) throw Error(ErrorCode::Io, "cannot write " + p.string());
    return os;
}

void write_json(const fs::path& p, const json& j) { open_out(p) << j.dump(2) << '\n'; }

json direction_json(const SteeringDirection& d) {
    const AzEl ae = az_el(d);
    return {{"phi_deg", rad2deg(d.phi)}, {"theta_deg", rad2deg(d.theta)}, {"azimuth_deg", rad2deg(ae.az)}, {"elevation_deg", rad2deg(ae.el)}};
}

json model_json(const SignatureModel& m) {
    return {{"n_hat", m.n_hat}, {"m1", m.m1}, {"m2", m.m2}, {"m3", m.start_index}, {"m4", m.m4},
            {"pattern_width", m.pattern_width}, {"signature_width", m.signature_width}, {"repetitions", m.repetition_count}};
}

SteeringDirection parse_direction(const std::string& key, const std::string& v) {
    const auto parts = detail::split_list(v);
    if (parts.size() != 2) throw Error(ErrorCode::InvalidConfig, key + ": expected 'phi, theta' in degrees");
    return {deg2rad(detail::to_double(key, parts[0])), deg2rad(detail::to_double(key, parts[1]))};
}

// ---------------------------------------------------------------- subcommands

// Clean signature plus the N location-1 captures of trial 0, a point manifest and ready-made
// detect/doa configs that read them back.
void cmd_gen(const Config& c, const fs::path& out) {
    Scenario s = scenario_from(c);
    s.validate();
    const IqTrace sig = make_signature(s.waveform, mix_seed(s.seed, 1));
    write_iq((out / "signature.iq").string(), sig);
    Rng rng(mix_seed(s.seed, 100));
    const detail::LocationCaptures L = detail::synthesize_location(s, s.seed, 0, s.location1, sig, rng);
    std::ofstream pts = open_out(out / "points.csv");
    pts << "file,x,y,z\n";
    for (std::size_t k = 0; k < L.buffers.size(); ++k) {
        char name[32];
        std::snprintf(name, sizeof name, "capture_%02zu.iq", k);
        write_iq((out / name).string(), L.buffers[k]);
        const Vec3 p = to_rect(L.points[k].measured_position);
        pts << name << ',' << detail::fmt(p[0], 6) << ',' << detail::fmt(p[1], 6) << ',' << detail::fmt(p[2], 6) << '\n';
    }
    const SteeringDirection truth = L.truth.direction();
    write_json(out / "truth.json", {{"direction", direction_json(truth)},
                                    {"range", L.truth.a},
                                    {"offsets", L.offsets},
                                    {"pattern_width", s.waveform.pattern_width},
                                    {"repetitions", s.waveform.repetitions}});
    open_out(out / "detect.ini") << "[input]\niq = capture_00.iq\n";
    open_out(out / "doa.ini") << "[input]\npoints = points.csv\n";
}

void cmd_detect(const Config& c, const fs::path& out) {
    const Scenario s = scenario_from(c, {"input"});
    s.detector.validate();
    const IqTrace y = read_iq(input_path(c, "input.iq").string());
    const SignatureModel m = detect_signature(y, s.detector);
    write_json(out / "signature_model.json", model_json(m));
    write_iq((out / "detected_signature.iq").string(), m.signature);
}

void cmd_doa(const Config& c, const fs::path& out) {
    const Scenario s = scenario_from(c, {"input"});
    s.detector.validate();
    s.algorithm.validate();
    const fs::path manifest = input_path(c, "input.points");
    std::ifstream is(manifest);
    if (!is) throw Error(ErrorCode::Io, "cannot open " + manifest.string());
    std::vector<IqTrace> raw;
    std::vector<Vec3> pos;
    std::string line;
    std::getline(is, line); // header
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        const auto f = detail::split_list(line);
        if (f.size() != 4) throw Error(ErrorCode::InvalidConfig, "points row needs file,x,y,z: " + line);
        const fs::path p = fs::path(f[0]).is_absolute() ? fs::path(f[0]) : manifest.parent_path() / f[0];
        raw.push_back(read_iq(p.string()));
        pos.push_back({detail::to_double("x", f[1]), detail::to_double("y", f[2]), detail::to_double("z", f[3])});
    }
    if (raw.empty()) throw Error(ErrorCode::EmptyArray, "points manifest lists no captures");
    const double lambda = c.tree.get_optional<std::string>("input.wavelength")
                              ? detail::to_double("input.wavelength", need(c, "input.wavelength"))
                              : raw[0].carrier_wavelength;

    SignatureModel model = detect_signature(raw[0], s.detector);
    derotate(model.signature, estimate_cfo(model.signature, model));
    std::vector<ReceptionPoint> points;
    for (std::size_t k = 0; k < raw.size(); ++k) {
        ReceptionPoint rp;
        rp.position = rp.measured_position = to_spherical(pos[k]);
        rp.aligned_signal = align_capture(raw[k], model, s.detector.corr_threshold).y;
        points.push_back(std::move(rp));
    }
    const double cfo = estimate_cfo(points[0].aligned_signal, model);
    points = correct_cfo(std::move(points), cfo);
    const std::vector<ArrayElement> elems = make_array(points, model.signature);

    const Beampattern full = sweep(elems, lambda, s.algorithm.grid);
    std::ofstream bpo = open_out(out / "beampattern.csv");
    write_beampattern_csv(bpo, full);
    json j = {{"points", elems.size()}, {"cfo_hz", cfo}, {"single_sweep", direction_json(full.peak_dir)}};
    if (s.clustering) {
        AlgorithmConfig ac = s.algorithm;
        ac.seed = s.seed;
        const Algorithm1Result a1 = algorithm1(elems, ac, lambda);
        j["estimate"] = direction_json(a1.estimate.direction());
        j["dominant_radius_deg"] = rad2deg(a1.radius);
        j["sweeps"] = a1.sweeps;
        j["early_exit"] = a1.early_exit;
        TrialRecord r;
        r.telemetry[0] = a1.telemetry;
        std::ofstream to = open_out(out / "telemetry.csv");
        write_telemetry_csv(to, {r});
    } else {
        j["estimate"] = direction_json(canonical(full.peak_dir));
    }
    write_json(out / "doa.json", j);
}

void cmd_localize(const Config& c, const fs::path& out) {
    const DoaEstimate d1 = make_estimate(parse_direction("localize.doa1", need(c, "localize.doa1")), DoaSource::SingleSweep);
    const DoaEstimate d2 = make_estimate(parse_direction("localize.doa2", need(c, "localize.doa2")), DoaSource::SingleSweep);
    const Vec3 p1 = detail::to_vec3("localize.location1", need(c, "localize.location1"));
    const Vec3 p2 = detail::to_vec3("localize.location2", need(c, "localize.location2"));
    const FixResult f = localize(d1, d2, relative_location(p1, p2), p1);
    json j = {{"x", f.world[0]}, {"y", f.world[1]}, {"z", f.world[2]}, {"range", f.range}, {"residual", f.residual}};
    if (const auto t = c.tree.get_optional<std::string>("localize.truth")) {
        const FixErrors e = error_metrics(f.world, detail::to_vec3("localize.truth", *t));
        j["errors"] = {{"dx", e.dx}, {"dy", e.dy}, {"dz", e.dz}, {"e2d", e.e2d}, {"e3d", e.e3d}};
    }
    write_json(out / "fix.json", j);
}

void cmd_simulate(const Config& c, const fs::path& out) {
    const Scenario base = scenario_from(c);
    if (!base.sweep_key.empty() && base.sweep_values.empty())
        throw Error(ErrorCode::InvalidConfig, "sweep.key given without sweep.values");
    const std::vector<Scenario> all = expand_sweep(base);
    for (const auto& s : all) s.validate();
    std::ofstream sum = open_out(out / "summary.csv");
    sum << "scenario,trials,failures,az_err,el_err,ang_err,single_az_err,single_ang_err,music_ang_err,abs_dx,abs_dy,abs_dz,e2d,e3d\n";
    for (const auto& s : all) {
        const std::vector<TrialRecord> r = run_scenario(s);
        std::ofstream tr = open_out(out / (s.name + "_trials.csv")), ti = open_out(out / (s.name + "_timing.csv")),
                      te = open_out(out / (s.name + "_telemetry.csv"));
        write_trials_csv(tr, r);
        write_timing_csv(ti, r);
        write_telemetry_csv(te, r);
        const ScenarioSummary m = summarize(r);
        using detail::fmt;
        sum << s.name << ',' << m.trials << ',' << m.failures << ',' << fmt(m.az_err, 2) << ',' << fmt(m.el_err, 2) << ','
            << fmt(m.ang_err, 2) << ',' << fmt(m.single_az_err, 2) << ',' << fmt(m.single_ang_err, 2) << ','
            << fmt(m.music_ang_err, 2) << ',' << fmt(m.abs_dx, 3) << ',' << fmt(m.abs_dy, 3) << ',' << fmt(m.abs_dz, 3) << ','
            << fmt(m.e2d, 3) << ',' << fmt(m.e3d, 3) << '\n';
        std::cout << s.name << ": " << m.trials << " trials, " << m.failures << " failed, median az " << fmt(m.az_err, 2)
                  << " deg, e2d " << fmt(m.e2d, 3) << " m\n";
    }
}

void cmd_bench(const Config& c, const fs::path& out) {
    const Scenario s = scenario_from(c, {"bench"});
    s.validate();
    std::vector<int> Ms{8, 16, 24, 32};
    if (const auto v = c.tree.get_optional<std::string>("bench.M")) {
        Ms.clear();
        for (const auto& x : detail::split_list(*v)) Ms.push_back(static_cast<int>(detail::to_int("bench.M", x)));
    }
    const int repeats = static_cast<int>(detail::to_int("bench.repeats", c.tree.get<std::string>("bench.repeats", "7")));
    AngularGrid g = s.algorithm.grid;
    g.refinement_levels = static_cast<int>(detail::to_int("bench.refinement_levels", c.tree.get<std::string>("bench.refinement_levels", "1")));
    g.validate();
    const std::vector<BenchRow> rows = run_bench(s, Ms, g, repeats);
    std::ofstream os = open_out(out / "bench.csv");
    os << "M,sweep_s,music_s\n";
    std::vector<double> m, ts, tm;
    for (const auto& r : rows) {
        os << r.M << ',' << detail::fmt(r.sweep_s, 6) << ',' << detail::fmt(r.music_s, 6) << '\n';
        m.push_back(r.M);
        ts.push_back(r.sweep_s);
        tm.push_back(r.music_s);
    }
    const LinearFit f = linear_fit(m, ts);
    const json j = {{"sweep_slope_s_per_point", f.slope}, {"sweep_intercept_s", f.intercept}, {"sweep_r2", f.r2},
                    {"sweep_exponent", power_law_exponent(m, ts)}, {"music_exponent", power_law_exponent(m, tm)}};
    write_json(out / "bench_fit.json", j);
    std::cout << "sweep R^2 " << detail::fmt(f.r2, 4) << ", MUSIC exponent " << detail::fmt(j["music_exponent"].get<double>(), 2) << '\n';
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"rfeye: blind signature detection, distributed-array DoA and two-location emitter localization"};
    app.require_subcommand(1);
    std::string config;
    std::string out = ".";
    struct Sub {
        const char* name;
        const char* help;
        void (*run)(const Config&, const fs::path&);
    };
    const Sub subs[] = {
        {"gen", "synthesize a signature and one location's captures as IQ files", cmd_gen},
        {"detect", "blind signature detection on an IQ file", cmd_detect},
        {"doa", "direction of arrival from captures and point positions", cmd_doa},
        {"localize", "emitter position from two DoAs and the hover geometry", cmd_localize},
        {"simulate", "Monte-Carlo trials of the full pipeline", cmd_simulate},
        {"bench", "sweep and MUSIC runtime against the number of points", cmd_bench},
    };
    std::vector<std::pair<CLI::App*, const Sub*>> cmds;
    for (const auto& s : subs) {
        CLI::App* a = app.add_subcommand(s.name, s.help);
        a->add_option("config", config, "scenario / input config file (INI)")->required()->check(CLI::ExistingFile);
        a->add_option("-o,--out", out, "output directory")->capture_default_str();
        cmds.emplace_back(a, &s);
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "rfeye: " << e.what() << '\n';
        return kExitUsage;
    }
    try {
        fs::create_directories(out);
        const Config c = load_config(config);
        for (const auto& [a, s] : cmds)
            if (a->parsed()) s->run(c, out);
    } catch (const Error& e) {
        std::cerr << "rfeye: " << e.what() << '\n';
        const ErrorCode k = e.code();
        return (k == ErrorCode::InvalidConfig || k == ErrorCode::InvalidSpec) ? kExitInvalid : kExitFailure;
    } catch (const std::exception& e) {
        std::cerr << "rfeye: " << e.what() << '\n';
        return kExitFailure;
    }
    return 0;
}
