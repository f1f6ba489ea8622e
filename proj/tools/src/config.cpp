#include "sastirap_cli/config.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <initializer_list>
#include <sstream>

#include <yaml-cpp/yaml.h>

namespace sastirap::cli {

namespace {

std::string join(const std::string& path, const std::string& key) {
    return path.empty() ? key : path + "." + key;
}

void require_map(const YAML::Node& node, const std::string& path) {
    if (!node.IsMap()) throw ConfigError(path, "expected a mapping");
}

void check_keys(const YAML::Node& node, const std::string& path,
                std::initializer_list<const char*> allowed) {
    require_map(node, path);
    for (const auto& kv : node) {
        const std::string key = kv.first.as<std::string>();
        bool ok = false;
        for (const char* a : allowed) ok = ok || key == a;
        if (!ok) throw ConfigError(join(path, key), "unknown key");
    }
}

template <typename T>
std::optional<T> get(const YAML::Node& node, const char* key, const std::string& path) {
    const YAML::Node v = node[key];
    if (!v) return std::nullopt;
    try {
        return v.as<T>();
    } catch (const YAML::Exception&) {
        throw ConfigError(join(path, key), "wrong type");
    }
}

double get_finite(const YAML::Node& node, const char* key, const std::string& path, double fallback) {
    const double v = get<double>(node, key, path).value_or(fallback);
    if (!std::isfinite(v)) throw ConfigError(join(path, key), "must be finite");
    return v;
}

double get_range(const YAML::Node& node, const char* key, const std::string& path, double fallback,
                 double lo, double hi, bool lo_open = false) {
    const double v = get_finite(node, key, path, fallback);
    if ((lo_open ? v <= lo : v < lo) || v > hi) {
        std::ostringstream msg;
        msg << "value " << v << " outside " << (lo_open ? "(" : "[") << lo << ", " << hi << "]";
        throw ConfigError(join(path, key), msg.str());
    }
    return v;
}

template <typename F>
auto parse_enum(const YAML::Node& node, const char* key, const std::string& path, F&& from_string)
    -> std::optional<decltype(from_string(std::string{}))> {
    const auto s = get<std::string>(node, key, path);
    if (!s) return std::nullopt;
    try {
        return from_string(*s);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(join(path, key), e.what());
    }
}

QutritParams parse_system(const YAML::Node& node) {
    const std::string path = "system";
    check_keys(node, path, {"f01_mhz", "f12_mhz", "gamma10_mhz", "gamma21_mhz", "gamma_phi_mhz",
                            "rate_convention"});
    const double f01 = get_range(node, "f01_mhz", path, 5000.0, 0.0, 1e6, true);
    const double f12 = get_range(node, "f12_mhz", path, 4718.0, 0.0, 1e6, true);
    if (!(f12 < f01)) throw ConfigError(join(path, "f12_mhz"), "must be below f01_mhz (negative anharmonicity)");
    const double g10 = get_range(node, "gamma10_mhz", path, 5.0, 0.0, 1e4);
    const double g21 = get_range(node, "gamma21_mhz", path, 7.0, 0.0, 1e4);
    const double gphi = get_range(node, "gamma_phi_mhz", path, 0.0, 0.0, 1e4);
    const std::string conv = get<std::string>(node, "rate_convention", path).value_or("plain");
    RateConvention c = RateConvention::Plain;
    if (conv == "angular") {
        c = RateConvention::Angular;
    } else if (conv != "plain") {
        throw ConfigError(join(path, "rate_convention"), "expected plain | angular");
    }
    return QutritParams::from_mhz(f01, f12, g10, g21, gphi, c);
}

IntegratorConfig parse_integrator(const YAML::Node& node, const std::string& path, IntegratorConfig cfg) {
    check_keys(node, path, {"method", "dt_ns", "abs_tol", "rel_tol", "sample_ns", "min_dt_ns"});
    if (const auto m = get<std::string>(node, "method", path)) {
        if (*m == "rk4") {
            cfg.method = IntegratorMethod::Rk4;
        } else if (*m == "dopri5") {
            cfg.method = IntegratorMethod::AdaptiveDopri5;
        } else {
            throw ConfigError(join(path, "method"), "expected rk4 | dopri5");
        }
    }
    cfg.dt = get_range(node, "dt_ns", path, cfg.dt, 0.0, 10.0, true);
    cfg.abs_tol = get_range(node, "abs_tol", path, cfg.abs_tol, 0.0, 1e-2, true);
    cfg.rel_tol = get_range(node, "rel_tol", path, cfg.rel_tol, 0.0, 1e-2, true);
    cfg.sample_every = get_range(node, "sample_ns", path, cfg.sample_every, 0.0, 1e3, true);
    cfg.min_dt = get_range(node, "min_dt_ns", path, cfg.min_dt, 0.0, 1.0, true);
    return cfg;
}

// Applies protocol keys onto `p`; used for the base protocol and per-sweep overrides.
void apply_protocol(const YAML::Node& node, const std::string& path, ProtocolSpec& p) {
    check_keys(node, path, {"sigma_ns", "t_s_ns", "omega01_mhz", "omega12_mhz", "amplitude_scale",
                            "area_pi", "phases", "cd", "area02_pi", "two_photon_ratio", "tier",
                            "dissipation", "stark_correction", "readout", "readout_offset_ns",
                            "integrator", "thresholds"});
    p.sigma = get_range(node, "sigma_ns", path, p.sigma, 0.0, 1000.0, true);
    p.t_s = get_range(node, "t_s_ns", path, p.t_s, -1e4, 1e4);
    if (node["omega01_mhz"]) p.omega01_peak = mhz_to_angular(get_range(node, "omega01_mhz", path, 0, 0, 1e4));
    if (node["omega12_mhz"]) p.omega12_peak = mhz_to_angular(get_range(node, "omega12_mhz", path, 0, 0, 1e4));
    if (node["amplitude_scale"] && node["area_pi"]) {
        throw ConfigError(join(path, "area_pi"), "conflicts with amplitude_scale");
    }
    p.stirap_scale = get_range(node, "amplitude_scale", path, p.stirap_scale, 0.0, 1e3);

    if (const auto c = parse_enum(node, "cd", path, cd_mode_from_string)) p.cd = *c;
    p.two_photon_ratio = get_range(node, "two_photon_ratio", path, p.two_photon_ratio, 0.0, 100.0, true);
    if (const auto t = parse_enum(node, "tier", path, tier_from_string)) {
        p.tier = *t;
        p.integrator.reset();  // re-derive the tier default unless overridden below
    }
    if (const auto d = get<bool>(node, "dissipation", path)) p.dissipation = *d;
    if (const auto s = get<bool>(node, "stark_correction", path)) p.stark_correction = *s;
    if (const auto r = parse_enum(node, "readout", path, readout_mode_from_string)) p.readout = *r;
    p.readout_offset = get_range(node, "readout_offset_ns", path, p.readout_offset, -1e4, 1e4);

    if (const YAML::Node ph = node["phases"]) {
        const std::string pp = join(path, "phases");
        check_keys(ph, pp, {"phi01_pi", "phi12_pi", "phi_tilde_pi", "loop_phase_pi"});
        if (ph["phi_tilde_pi"] && ph["loop_phase_pi"]) {
            throw ConfigError(join(pp, "loop_phase_pi"), "conflicts with phi_tilde_pi");
        }
        const double phi01 = kPi * get_finite(ph, "phi01_pi", pp, p.phases.phi01 / kPi);
        const double phi12 = kPi * get_finite(ph, "phi12_pi", pp, p.phases.phi12 / kPi);
        if (ph["loop_phase_pi"]) {
            p.phases = LoopPhases::for_loop_phase(kPi * get_finite(ph, "loop_phase_pi", pp, 0.0), phi01, phi12);
        } else {
            p.phases = {phi01, phi12, kPi * get_finite(ph, "phi_tilde_pi", pp, p.phases.phi_tilde / kPi)};
        }
    }
    if (const YAML::Node th = node["thresholds"]) {
        const std::string tp = join(path, "thresholds");
        check_keys(th, tp, {"p0_start", "p2_end"});
        p.thresholds.p0_start = get_range(th, "p0_start", tp, p.thresholds.p0_start, 0.0, 1.0, true);
        p.thresholds.p2_end = get_range(th, "p2_end", tp, p.thresholds.p2_end, 0.0, 1.0, true);
    }
    if (const YAML::Node in = node["integrator"]) {
        p.integrator = parse_integrator(in, join(path, "integrator"), p.integrator_config());
    }

    // Areas are resolved last: they depend on the pulse shape.
    if (node["area_pi"]) {
        const double area = kPi * get_range(node, "area_pi", path, 0.0, 0.0, 1e3);
        const double unit = pulse_areas(p.shape_pair(), std::nullopt).stirap;
        if (!(unit > 0.0)) throw ConfigError(join(path, "area_pi"), "needs nonzero STIRAP peaks");
        p.stirap_scale = area / unit;
    }
    if (node["area02_pi"]) {
        const double area = kPi * get_range(node, "area02_pi", path, 0.0, 0.0, 1e3);
        if (p.cd == CdMode::Off) throw ConfigError(join(path, "area02_pi"), "requires cd != off");
        ProtocolSpec unit = p;
        unit.cd_area_scale = 1.0;
        try {
            p.cd_area_scale = area / pulse_areas(unit.shape_pair(), unit.cd_envelope()).cd;
        } catch (const std::exception& e) {
            throw ConfigError(join(path, "area02_pi"), e.what());
        }
    }
}

void validate_protocol(const ProtocolSpec& p, const std::string& path) {
    try {
        p.validate();
    } catch (const std::invalid_argument& e) {
        // The library names keys as "protocol.<key>"; rebase onto this path.
        std::string msg = e.what();
        if (msg.rfind("protocol", 0) == 0 && path != "protocol") msg = path + msg.substr(8);
        throw ConfigError(path, msg);
    }
}

NamedSweep parse_sweep(const YAML::Node& node, const std::string& path, const ProtocolSpec& base) {
    check_keys(node, path, {"name", "protocol", "axes", "optimize_phase", "phase_search", "shuffle_seed"});
    NamedSweep s;
    s.name = get<std::string>(node, "name", path).value_or("sweep");
    for (char c : s.name) {
        if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_')) {
            throw ConfigError(join(path, "name"), "use letters, digits, '-' and '_' only");
        }
    }
    s.spec.base = base;
    if (const YAML::Node p = node["protocol"]) apply_protocol(p, join(path, "protocol"), s.spec.base);
    validate_protocol(s.spec.base, join(path, "protocol"));

    const YAML::Node axes = node["axes"];
    if (!axes || !axes.IsSequence()) throw ConfigError(join(path, "axes"), "expected a list of one or two axes");
    for (std::size_t i = 0; i < axes.size(); ++i) {
        const std::string ap = join(path, "axes[" + std::to_string(i) + "]");
        check_keys(axes[i], ap, {"name", "min", "max", "count"});
        const auto name = get<std::string>(axes[i], "name", ap);
        if (!name) throw ConfigError(join(ap, "name"), "missing");
        AxisRange r{};
        try {
            r.axis = axis_from_name(*name);
        } catch (const std::invalid_argument& e) {
            throw ConfigError(join(ap, "name"), e.what());
        }
        const double unit = axis_display_unit(r.axis);
        if (!axes[i]["min"] || !axes[i]["max"]) throw ConfigError(ap, "min and max are required");
        r.min = unit * get_finite(axes[i], "min", ap, 0.0);
        r.max = unit * get_finite(axes[i], "max", ap, 0.0);
        const double count = get_range(axes[i], "count", ap, 41, 1, 100000);
        if (count != std::floor(count)) throw ConfigError(join(ap, "count"), "must be an integer");
        r.count = static_cast<int>(count);
        s.spec.axes.push_back(r);
    }
    if (const auto o = get<bool>(node, "optimize_phase", path)) s.spec.optimize_phase = *o;
    if (const YAML::Node ps = node["phase_search"]) {
        const std::string pp = join(path, "phase_search");
        check_keys(ps, pp, {"coarse_points", "tolerance", "flat_threshold"});
        s.spec.phase_search.coarse_points =
            static_cast<int>(get_range(ps, "coarse_points", pp, s.spec.phase_search.coarse_points, 4, 10000));
        s.spec.phase_search.tolerance = get_range(ps, "tolerance", pp, s.spec.phase_search.tolerance, 0.0, 1.0, true);
        s.spec.phase_search.flat_threshold =
            get_range(ps, "flat_threshold", pp, s.spec.phase_search.flat_threshold, 0.0, 1.0);
    }
    if (const auto seed = get<std::uint64_t>(node, "shuffle_seed", path)) s.shuffle_seed = *seed;
    try {
        s.spec.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(path, e.what());
    }
    return s;
}

Eigen::Vector3d parse_triple(const YAML::Node& node, const std::string& path) {
    if (!node.IsSequence() || node.size() != 3) throw ConfigError(path, "expected [p0, p1, p2]");
    Eigen::Vector3d v;
    for (int i = 0; i < 3; ++i) {
        try {
            v[i] = node[static_cast<std::size_t>(i)].as<double>();
        } catch (const YAML::Exception&) {
            throw ConfigError(path, "wrong type");
        }
    }
    if ((v.array() < 0.0).any() || std::abs(v.sum() - 1.0) > 1e-9) {
        throw ConfigError(path, "populations must be non-negative and sum to 1");
    }
    return v;
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
    const std::filesystem::path path(p);
    return path.is_absolute() ? path : base / path;
}

TomoConfig parse_tomo(const YAML::Node& node, const std::filesystem::path& base_dir) {
    const std::string path = "tomo";
    check_keys(node, path, {"calibration", "epsilon", "epsilon_file", "correct_calibration", "measured",
                            "synthesize", "noise_sigma", "seed", "project_simplex", "max_condition"});
    TomoConfig t;
    if (const YAML::Node cal = node["calibration"]) {
        const std::string cp = join(path, "calibration");
        check_keys(cal, cp, {"files", "cadence_ns", "samples", "templates"});
        if (cal["files"] && cal["templates"]) throw ConfigError(join(cp, "templates"), "conflicts with files");
        if (const YAML::Node files = cal["files"]) {
            if (!files.IsSequence() || files.size() != 3) {
                throw ConfigError(join(cp, "files"), "expected three trace files (|0>, |1>, |2>)");
            }
            for (std::size_t i = 0; i < 3; ++i) t.calibration_files[i] = resolve(base_dir, files[i].as<std::string>());
            t.synthetic_calibration = false;
        }
        t.cadence_ns = get_range(cal, "cadence_ns", cp, t.cadence_ns, 0.0, 1e4, true);
        t.samples = static_cast<int>(get_range(cal, "samples", cp, t.samples, 3, 1e7));
        if (const YAML::Node tpl = cal["templates"]) {
            if (!tpl.IsSequence() || tpl.size() != 3) throw ConfigError(join(cp, "templates"), "expected three entries");
            for (std::size_t i = 0; i < 3; ++i) {
                const std::string tp = join(cp, "templates[" + std::to_string(i) + "]");
                check_keys(tpl[i], tp, {"amplitude", "decay_ns", "freq_mhz", "phase_pi", "offset_i", "offset_q"});
                TraceTemplate& x = t.templates[i];
                x.amplitude = get_finite(tpl[i], "amplitude", tp, x.amplitude.real());
                x.decay_ns = get_range(tpl[i], "decay_ns", tp, x.decay_ns, 0.0, 1e6, true);
                x.freq_mhz = get_finite(tpl[i], "freq_mhz", tp, x.freq_mhz);
                x.phase = kPi * get_finite(tpl[i], "phase_pi", tp, x.phase / kPi);
                x.offset = {get_finite(tpl[i], "offset_i", tp, x.offset.real()),
                            get_finite(tpl[i], "offset_q", tp, x.offset.imag())};
            }
        }
    }
    if (node["epsilon"] && node["epsilon_file"]) throw ConfigError("tomo.epsilon_file", "conflicts with epsilon");
    if (const YAML::Node e = node["epsilon"]) {
        const std::string ep = join(path, "epsilon");
        check_keys(e, ep, {"eps01", "eps12", "eps02"});
        EpsilonMatrix m{get_range(e, "eps01", ep, 0, 0, 1), get_range(e, "eps12", ep, 0, 0, 1),
                        get_range(e, "eps02", ep, 0, 0, 1)};
        try {
            m.validate();
        } catch (const std::invalid_argument& ex) {
            throw ConfigError(ep, ex.what());
        }
        t.epsilon = m;
    }
    if (const auto f = get<std::string>(node, "epsilon_file", path)) t.epsilon_file = resolve(base_dir, *f);
    t.correct = get<bool>(node, "correct_calibration", path).value_or(t.epsilon || t.epsilon_file);
    if (t.correct && !t.epsilon && !t.epsilon_file) {
        throw ConfigError("tomo.correct_calibration", "needs epsilon or epsilon_file");
    }
    if (node["measured"] && node["synthesize"]) throw ConfigError("tomo.synthesize", "conflicts with measured");
    if (const YAML::Node m = node["measured"]) {
        if (!m.IsSequence() || m.size() == 0) throw ConfigError("tomo.measured", "expected a list of trace files");
        for (const auto& f : m) t.measured_files.push_back(resolve(base_dir, f.as<std::string>()));
    }
    if (const YAML::Node s = node["synthesize"]) {
        if (!s.IsSequence() || s.size() == 0) throw ConfigError("tomo.synthesize", "expected a list of [p0, p1, p2]");
        for (std::size_t i = 0; i < s.size(); ++i) {
            t.synthesize.push_back(parse_triple(s[i], "tomo.synthesize[" + std::to_string(i) + "]"));
        }
    }
    if (t.measured_files.empty() && t.synthesize.empty()) {
        throw ConfigError("tomo", "one of measured or synthesize is required");
    }
    t.noise_sigma = get_range(node, "noise_sigma", path, 0.0, 0.0, 1e3);
    t.seed = get<std::uint64_t>(node, "seed", path).value_or(1);
    t.extract.project_simplex = get<bool>(node, "project_simplex", path).value_or(false);
    t.extract.max_condition = get_range(node, "max_condition", path, t.extract.max_condition, 1.0, 1e16);
    return t;
}

}  // namespace

RunConfig parse_config(const std::string& yaml_text, const std::filesystem::path& base_dir) {
    YAML::Node root;
    try {
        root = YAML::Load(yaml_text);
    } catch (const YAML::Exception& e) {
        throw ConfigError("<yaml>", e.what());
    }
    if (!root || root.IsNull()) throw ConfigError("<root>", "empty configuration");
    check_keys(root, "", {"system", "protocol", "sweeps", "qsl", "tomo", "output"});

    RunConfig cfg;
    if (const YAML::Node s = root["system"]) cfg.system = parse_system(s);
    if (const YAML::Node p = root["protocol"]) apply_protocol(p, "protocol", cfg.protocol);
    validate_protocol(cfg.protocol, "protocol");

    if (const YAML::Node sw = root["sweeps"]) {
        if (!sw.IsSequence()) throw ConfigError("sweeps", "expected a list");
        for (std::size_t i = 0; i < sw.size(); ++i) {
            cfg.sweeps.push_back(parse_sweep(sw[i], "sweeps[" + std::to_string(i) + "]", cfg.protocol));
            for (std::size_t j = 0; j < i; ++j) {
                if (cfg.sweeps[j].name == cfg.sweeps[i].name) {
                    throw ConfigError("sweeps[" + std::to_string(i) + "].name", "duplicate sweep name");
                }
            }
        }
    }
    if (const YAML::Node q = root["qsl"]) {
        check_keys(q, "qsl", {"omega02_max_mhz"});
        if (q["omega02_max_mhz"]) {
            cfg.qsl.omega02_max = mhz_to_angular(get_range(q, "omega02_max_mhz", "qsl", 0.0, 0.0, 1e5, true));
        }
    }
    if (const YAML::Node t = root["tomo"]) cfg.tomo = parse_tomo(t, base_dir);
    if (const YAML::Node o = root["output"]) {
        check_keys(o, "output", {"directory", "plots", "prefix"});
        if (const auto d = get<std::string>(o, "directory", "output")) cfg.output.directory = resolve(base_dir, *d);
        cfg.output.plots = get<bool>(o, "plots", "output").value_or(true);
        cfg.output.prefix = get<std::string>(o, "prefix", "output").value_or("");
    }
    return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("--config", "cannot open " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    RunConfig cfg = parse_config(buf.str(), path.parent_path().empty() ? "." : path.parent_path());
    cfg.source = path;
    if (cfg.output.prefix.empty()) cfg.output.prefix = path.stem().string();
    return cfg;
}

}  // namespace sastirap::cli
