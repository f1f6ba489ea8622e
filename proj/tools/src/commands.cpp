#include "sastirap_cli/commands.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <ostream>

#include <nlohmann/json.hpp>

#include "sastirap/version.hpp"
#include "sastirap_cli/plot.hpp"

namespace sastirap::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kBlue = 0x1f77b4;
constexpr int kOrange = 0xff7f0e;
constexpr int kGreen = 0x2ca02c;
constexpr int kRed = 0xd62728;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::ofstream open_out(const fs::path& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + path.string());
    return f;
}

fs::path prepare(const CommandOptions& opt) {
    fs::create_directories(opt.out_dir);
    return opt.out_dir;
}

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

json protocol_json(const ProtocolSpec& p) {
    const IntegratorConfig ic = p.integrator_config();
    return {
        {"sigma_ns", p.sigma},
        {"t_s_ns", p.t_s},
        {"omega01_mhz", angular_to_mhz(p.omega01_peak * p.stirap_scale)},
        {"omega12_mhz", angular_to_mhz(p.omega12_peak * p.stirap_scale)},
        {"phases_pi", {{"phi01", p.phases.phi01 / kPi}, {"phi12", p.phases.phi12 / kPi},
                       {"phi_tilde", p.phases.phi_tilde / kPi}, {"loop_phase", p.phases.loop_phase() / kPi}}},
        {"cd", to_string(p.cd)},
        {"cd_area_scale", p.cd_area_scale},
        {"two_photon_ratio", p.two_photon_ratio},
        {"tier", to_string(p.tier)},
        {"dissipation", p.dissipation},
        {"stark_correction", p.stark_correction},
        {"readout", to_string(p.readout)},
        {"readout_offset_ns", p.readout_offset},
        {"integrator", {{"method", ic.method == IntegratorMethod::Rk4 ? "rk4" : "dopri5"},
                        {"dt_ns", ic.dt}, {"abs_tol", ic.abs_tol}, {"rel_tol", ic.rel_tol},
                        {"sample_ns", ic.sample_every}}},
    };
}

json system_json(const QutritParams& s) {
    return {{"f01_mhz", angular_to_mhz(s.omega01())},
            {"f12_mhz", angular_to_mhz(s.omega12())},
            {"gamma10_per_ns", s.gamma10()},
            {"gamma21_per_ns", s.gamma21()},
            {"gamma_phi_per_ns", s.gamma_phi()}};
}

void write_json(const fs::path& path, const json& j) {
    auto f = open_out(path);
    f << j.dump(2) << "\n";
}

json base_metadata(const RunConfig& cfg, const char* command) {
    return {{"command", command},
            {"software_version", version()},
            {"config", cfg.source.string()},
            {"system", system_json(cfg.system)}};
}

std::string opt_number(const std::optional<double>& v, const char* f) { return v ? fmt(f, *v) : "none"; }

void print_report(std::ostream& out, const ProtocolRun& run) {
    const TransferReport& r = run.report;
    out << "p2_final     " << fmt("%.6f", r.p2_final) << "\n"
        << "p2_peak      " << fmt("%.6f", run.p2_peak) << "\n"
        << "t_tr_ns      " << opt_number(r.t_tr, "%.3f") << "\n"
        << "omega02_mhz  " << fmt("%.4f", angular_to_mhz(run.omega02_peak)) << "\n"
        << "qsl_ns       " << fmt("%.4f", r.qsl) << "\n"
        << "area_pi      " << fmt("%.4f", r.area_stirap / kPi) << "\n"
        << "area02_pi    " << fmt("%.4f", r.area_cd / kPi) << "\n"
        << "loop_phase   " << fmt("%.4f", r.phi_used / kPi) << " pi\n";
}

std::vector<double> envelope_mhz(const std::vector<double>& t, const std::function<double(double)>& f) {
    std::vector<double> y;
    y.reserve(t.size());
    for (double x : t) y.push_back(angular_to_mhz(f(x)));
    return y;
}

LinePlot envelope_plot(const ProtocolSpec& p, const std::vector<double>& t) {
    const StirapPair pair = p.drive_pair();
    LinePlot lp{"pulse envelopes", "t (ns)", "Rabi frequency (MHz)", t, {}, std::nullopt};
    lp.series.push_back({"Omega01", envelope_mhz(t, [&](double x) { return pair.omega01(x); }), kBlue});
    lp.series.push_back({"Omega12", envelope_mhz(t, [&](double x) { return pair.omega12(x); }), kOrange});
    if (const auto cd = p.cd_envelope()) {
        lp.series.push_back({"Omega02", envelope_mhz(t, [&](double x) { return (*cd)(x); }), kGreen});
    }
    return lp;
}

}  // namespace

fs::path resolve_out_dir(const std::optional<fs::path>& flag, const RunConfig& cfg) {
    if (flag) return *flag;
    if (cfg.output.directory) return *cfg.output.directory;
    if (const char* env = std::getenv("SASTIRAP_OUT"); env && *env) return env;
    return "sastirap-out";
}

int cmd_simulate(const RunConfig& cfg, const CommandOptions& opt, std::ostream& out) {
    const fs::path dir = prepare(opt);
    const std::string stem = cfg.output.prefix.empty() ? "simulate" : cfg.output.prefix;
    const ProtocolRun run = run_protocol(cfg.protocol, cfg.system);

    const fs::path traj_csv = dir / (stem + "-trajectory.csv");
    const fs::path report_csv = dir / (stem + "-report.csv");
    {
        auto f = open_out(traj_csv);
        write_trajectory_csv(f, run.trajectory);
    }
    {
        auto f = open_out(report_csv);
        write_report_csv_header(f);
        write_report_csv_row(f, run.report);
    }
    print_report(out, run);

    json meta = base_metadata(cfg, "simulate");
    meta["protocol"] = protocol_json(cfg.protocol);
    meta["outputs"] = {traj_csv.filename().string(), report_csv.filename().string()};
    const DensityDefects d = density_defects(run.trajectory);
    meta["defects"] = {{"trace", d.trace}, {"hermiticity", d.hermiticity}, {"min_eigenvalue", d.min_eigenvalue}};
    if (cfg.output.plots) {
        const PopulationTrace pt = populations(run.trajectory);
        LinePlot pops{"populations", "t (ns)", "population", pt.times,
                      {{"p0", pt.p0, kBlue}, {"p1", pt.p1, kOrange}, {"p2", pt.p2, kGreen}},
                      std::make_pair(0.0, 1.0)};
        const fs::path pop_png = dir / (stem + "-populations.png");
        const fs::path env_png = dir / (stem + "-envelopes.png");
        write_line_plot(pop_png, pops);
        write_line_plot(env_png, envelope_plot(cfg.protocol, pt.times));
        meta["outputs"].push_back(pop_png.filename().string());
        meta["outputs"].push_back(env_png.filename().string());
    }
    write_json(dir / (stem + ".json"), meta);
    return 0;
}

int cmd_sweep(const RunConfig& cfg, const CommandOptions& opt, std::ostream& out) {
    if (cfg.sweeps.empty()) throw ConfigError("sweeps", "the sweep command needs at least one sweep");
    const fs::path dir = prepare(opt);
    const std::string stem = cfg.output.prefix.empty() ? "sweep" : cfg.output.prefix;
    json meta = base_metadata(cfg, "sweep");
    meta["sweeps"] = json::array();

    for (const NamedSweep& ns : cfg.sweeps) {
        const std::string name = stem + "-" + ns.name;
        SweepOptions so;
        so.jobs = opt.jobs;
        so.cache_path = dir / (name + ".cache");
        so.shuffle_seed = ns.shuffle_seed;
        if (!opt.resume) fs::remove(*so.cache_path);
        if (!opt.quiet) {
            so.progress = [&ns](std::size_t done, std::size_t total) {
                if (done == total || done % 16 == 0) {
                    std::fprintf(stderr, "\r%s: %zu/%zu", ns.name.c_str(), done, total);
                    if (done == total) std::fprintf(stderr, "\n");
                }
            };
        }
        const SweepResult r = run_sweep(ns.spec, cfg.system, so);

        const fs::path csv = dir / (name + ".csv");
        {
            auto f = open_out(csv);
            write_sweep_csv(f, r);
        }
        std::size_t failed = 0;
        std::size_t insensitive = 0;
        double best = 0.0;
        for (const SweepPoint& p : r.points) {
            failed += (p.flags & kFlagFailed) != 0;
            insensitive += (p.flags & kFlagInsensitive) != 0;
            if (!(p.flags & kFlagFailed)) best = std::max(best, p.report.p2_final);
        }
        out << ns.name << ": " << r.points.size() << " points, max p2 " << fmt("%.4f", best);
        if (failed) out << ", " << failed << " failed";
        if (insensitive) out << ", " << insensitive << " phase-insensitive";
        out << " -> " << csv.string() << "\n";

        json sj = {{"name", ns.name},
                   {"csv", csv.filename().string()},
                   {"tier", r.metadata.tier},
                   {"started_utc", r.metadata.started_utc},
                   {"finished_utc", r.metadata.finished_utc},
                   {"points", r.points.size()},
                   {"failed", failed},
                   {"optimize_phase", ns.spec.optimize_phase},
                   {"protocol", protocol_json(ns.spec.base)}};
        char hash[20];
        std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(r.metadata.config_hash));
        sj["config_hash"] = hash;
        if (ns.shuffle_seed) sj["shuffle_seed"] = *ns.shuffle_seed;
        sj["axes"] = json::array();
        for (const AxisRange& a : r.axes) {
            const double u = axis_display_unit(a.axis);
            sj["axes"].push_back({{"name", axis_name(a.axis)}, {"min", a.min / u}, {"max", a.max / u}, {"count", a.count}});
        }

        if (cfg.output.plots) {
            sj["plots"] = json::array();
            const AxisRange& ax = r.axes[0];
            const double ux = axis_display_unit(ax.axis);
            if (r.axes.size() == 1) {
                LinePlot lp{ns.name, axis_name(ax.axis), "p2", {}, {}, std::make_pair(0.0, 1.0)};
                Series p2{"p2", {}, kBlue};
                Series peak{"p2 peak", {}, kRed};
                for (const SweepPoint& p : r.points) {
                    lp.x.push_back(p.coordinates[0] / ux);
                    p2.y.push_back(p.flags & kFlagFailed ? kNaN : p.report.p2_final);
                    peak.y.push_back(p.flags & kFlagFailed ? kNaN : p.p2_peak);
                }
                lp.series = {p2, peak};
                if (lp.x.size() >= 2) {
                    const fs::path png = dir / (name + ".png");
                    write_line_plot(png, lp);
                    sj["plots"].push_back(png.filename().string());
                }
            } else {
                const AxisRange& ay = r.axes[1];
                const double uy = axis_display_unit(ay.axis);
                Heatmap hm;
                hm.title = ns.name + ": p2 (black: transfer time contours)";
                hm.xlabel = axis_name(ax.axis);
                hm.ylabel = axis_name(ay.axis);
                hm.zlabel = "p2";
                hm.nx = ax.count;
                hm.ny = ay.count;
                hm.x0 = ax.min / ux;
                hm.x1 = ax.max / ux;
                hm.y0 = ay.min / uy;
                hm.y1 = ay.max / uy;
                hm.zlim = std::make_pair(0.0, 1.0);
                double tmax = 0.0;
                for (const SweepPoint& p : r.points) {
                    const bool bad = p.flags & kFlagFailed;
                    hm.z.push_back(bad ? kNaN : p.report.p2_final);
                    const double t = !bad && p.report.t_tr ? *p.report.t_tr : kNaN;
                    hm.contour.push_back(t);
                    if (std::isfinite(t)) tmax = std::max(tmax, t);
                }
                if (tmax > 0.0) {
                    const std::vector<double> ticks = nice_ticks(0.0, tmax, 6);
                    hm.contour_levels.assign(ticks.begin() + 1, ticks.end());
                    sj["t_tr_contours_ns"] = hm.contour_levels;
                }
                const fs::path png = dir / (name + ".png");
                write_heatmap(png, hm);
                sj["plots"].push_back(png.filename().string());
                if (ns.spec.optimize_phase) {
                    Heatmap ph = hm;
                    ph.title = ns.name + ": optimal loop phase";
                    ph.zlabel = "Phi/pi";
                    ph.zlim = std::make_pair(-1.0, 1.0);
                    ph.contour.clear();
                    ph.contour_levels.clear();
                    for (std::size_t i = 0; i < r.points.size(); ++i) {
                        const SweepPoint& p = r.points[i];
                        ph.z[i] = p.phi_opt && !(p.flags & kFlagFailed) ? *p.phi_opt / kPi : kNaN;
                    }
                    const fs::path png2 = dir / (name + "-phase.png");
                    write_heatmap(png2, ph);
                    sj["plots"].push_back(png2.filename().string());
                }
            }
        }
        meta["sweeps"].push_back(sj);
    }
    write_json(dir / (stem + ".json"), meta);
    return 0;
}

int cmd_qsl(const RunConfig& cfg, const CommandOptions&, std::ostream& out) {
    double omega = 0.0;
    if (cfg.qsl.omega02_max) {
        omega = *cfg.qsl.omega02_max;
    } else if (const auto cd = cfg.protocol.cd_envelope()) {
        omega = cd->peak();
    }
    if (!(omega > 0.0)) {
        throw ConfigError("qsl.omega02_max_mhz", "zero coupling: set it or enable the CD drive");
    }
    const auto [ti, tf] = threshold_angles(cfg.protocol.thresholds);
    const double t = qsl_bhattacharyya(ti, tf, omega);
    out << "omega02_max_mhz " << fmt("%.4f", angular_to_mhz(omega)) << "\n"
        << "theta_i         " << fmt("%.10f", ti) << "\n"
        << "theta_f         " << fmt("%.10f", tf) << "\n"
        << "t_qsl_ns        " << fmt("%.4f", t) << "\n";
    return 0;
}

int cmd_tomo(const RunConfig& cfg, const CommandOptions& opt, std::ostream& out) {
    if (!cfg.tomo) throw ConfigError("tomo", "the tomo command needs a tomo section");
    const TomoConfig& t = *cfg.tomo;
    const fs::path dir = prepare(opt);
    const std::string stem = cfg.output.prefix.empty() ? "tomo" : cfg.output.prefix;

    std::optional<EpsilonMatrix> eps = t.epsilon;
    if (t.epsilon_file) eps = read_epsilon_sidecar(*t.epsilon_file);

    // `ideal` generates synthetic measurements; `cal` is what the fit sees.
    std::optional<CalibrationSet> ideal;
    std::optional<CalibrationSet> raw;
    if (t.synthetic_calibration) {
        ideal = make_calibration(t.templates, t.cadence_ns, t.samples);
        raw = eps ? contaminate_calibration(*ideal, *eps) : *ideal;
    } else {
        raw = CalibrationSet({read_trace_csv(t.calibration_files[0]), read_trace_csv(t.calibration_files[1]),
                              read_trace_csv(t.calibration_files[2])});
    }
    const CalibrationSet cal = t.correct ? correct_calibration(*raw, *eps) : *raw;

    std::vector<std::pair<std::string, Trace>> measured;
    for (const fs::path& f : t.measured_files) measured.emplace_back(f.filename().string(), read_trace_csv(f));
    for (std::size_t i = 0; i < t.synthesize.size(); ++i) {
        const CalibrationSet& source = ideal ? *ideal : cal;
        measured.emplace_back("synthetic-" + std::to_string(i),
                              synthesize_measured_trace(t.synthesize[i], source, t.noise_sigma, t.seed + i));
    }

    const fs::path csv = dir / (stem + "-populations.csv");
    auto f = open_out(csv);
    f << "# sastirap populations v1 corrected=" << (t.correct ? "yes" : "no") << "\n";
    f << "trace,p0,p1,p2,p0_raw,p1_raw,p2_raw,condition,residual_rms\n";
    out << "trace                 p0        p1        p2        cond\n";
    for (const auto& [name, tr] : measured) {
        const Extraction e = extract_populations(tr, cal, t.extract);
        char line[256];
        std::snprintf(line, sizeof line, "%s,%.9f,%.9f,%.9f,%.9f,%.9f,%.9f,%.6g,%.6g\n", name.c_str(), e.p[0], e.p[1],
                      e.p[2], e.p_raw[0], e.p_raw[1], e.p_raw[2], e.condition, e.residual_rms);
        f << line;
        std::snprintf(line, sizeof line, "%-20s %9.5f %9.5f %9.5f %9.3g\n", name.c_str(), e.p[0], e.p[1], e.p[2],
                      e.condition);
        out << line;
    }
    json meta = base_metadata(cfg, "tomo");
    meta["outputs"] = {csv.filename().string()};
    meta["corrected"] = t.correct;
    if (eps) meta["epsilon"] = {{"eps01", eps->eps01}, {"eps12", eps->eps12}, {"eps02", eps->eps02}};
    meta["project_simplex"] = t.extract.project_simplex;
    meta["noise_sigma"] = t.noise_sigma;
    meta["seed"] = t.seed;
    write_json(dir / (stem + ".json"), meta);
    return 0;
}

int cmd_export_pulses(const RunConfig& cfg, const CommandOptions& opt, std::ostream& out) {
    const fs::path dir = prepare(opt);
    const std::string stem = cfg.output.prefix.empty() ? "pulses" : cfg.output.prefix;
    const ProtocolSpec& p = cfg.protocol;
    const TimeWindow w = p.evolution_window();
    const double step = p.integrator_config().sample_every;
    const fs::path csv = dir / (stem + "-envelopes.csv");
    {
        auto f = open_out(csv);
        write_envelope_csv(f, p.drive_pair(), p.cd_envelope(), w, step);
    }
    out << "envelopes -> " << csv.string() << "\n";
    json meta = base_metadata(cfg, "export-pulses");
    meta["protocol"] = protocol_json(p);
    meta["outputs"] = {csv.filename().string()};
    if (cfg.output.plots) {
        std::vector<double> t;
        for (double x = w.t_min; x <= w.t_max + 1e-9; x += step) t.push_back(x);
        const fs::path png = dir / (stem + "-envelopes.png");
        write_line_plot(png, envelope_plot(p, t));
        meta["outputs"].push_back(png.filename().string());
    }
    write_json(dir / (stem + ".json"), meta);
    return 0;
}

}  // namespace sastirap::cli
