#include "sastirap/sweeps.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <ctime>
#include <fstream>
#include <map>
#include <mutex>
#include <numeric>
#include <ostream>
#include <random>
#include <stdexcept>
#include <thread>

#include "sastirap/version.hpp"

namespace sastirap {

namespace {

struct AxisInfo {
    SweepAxis axis;
    const char* name;
    double unit;
};

constexpr AxisInfo kAxes[] = {
    {SweepAxis::Sigma, "sigma_ns", 1.0},
    {SweepAxis::Ts, "t_s_ns", 1.0},
    {SweepAxis::TsOverSigma, "ts_over_sigma", 1.0},
    {SweepAxis::Phi01, "phi01_pi", kPi},
    {SweepAxis::Phi12, "phi12_pi", kPi},
    {SweepAxis::PhiTilde, "phi_tilde_pi", kPi},
    {SweepAxis::Area, "area_pi", kPi},
    {SweepAxis::Area02, "area02_pi", kPi},
    {SweepAxis::AmplitudeScale, "amplitude_scale", 1.0},
};

const AxisInfo& info(SweepAxis axis) {
    for (const AxisInfo& a : kAxes) {
        if (a.axis == axis) return a;
    }
    throw std::logic_error("unknown sweep axis");
}

// Geometry first, then amplitudes and areas (which depend on the shape), then phases.
int apply_order(SweepAxis axis) {
    switch (axis) {
        case SweepAxis::Sigma: return 0;
        case SweepAxis::Ts:
        case SweepAxis::TsOverSigma: return 1;
        case SweepAxis::AmplitudeScale:
        case SweepAxis::Area:
        case SweepAxis::Area02: return 2;
        default: return 3;
    }
}

void apply_axis(ProtocolSpec& p, SweepAxis axis, double value) {
    switch (axis) {
        case SweepAxis::Sigma: p.sigma = value; break;
        case SweepAxis::Ts: p.t_s = value; break;
        case SweepAxis::TsOverSigma: p.t_s = -std::abs(value) * p.sigma; break;
        case SweepAxis::Phi01: p.phases.phi01 = value; break;
        case SweepAxis::Phi12: p.phases.phi12 = value; break;
        case SweepAxis::PhiTilde: p.phases.phi_tilde = value; break;
        case SweepAxis::AmplitudeScale: p.stirap_scale = value; break;
        case SweepAxis::Area: {
            const double unit_area = pulse_areas(p.shape_pair(), std::nullopt).stirap;
            if (!(unit_area > 0.0)) throw std::invalid_argument("area axis needs nonzero STIRAP peaks");
            p.stirap_scale = value / unit_area;
            break;
        }
        case SweepAxis::Area02: {
            ProtocolSpec unit = p;
            unit.cd_area_scale = 1.0;
            const auto cd = unit.cd_envelope();
            if (!cd) throw std::invalid_argument("area02 axis requires the CD drive");
            p.cd_area_scale = value / pulse_areas(p.shape_pair(), cd).cd;
            break;
        }
    }
}

std::string utc_now() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

}  // namespace

const char* axis_name(SweepAxis axis) { return info(axis).name; }

SweepAxis axis_from_name(const std::string& name) {
    for (const AxisInfo& a : kAxes) {
        if (name == a.name) return a.axis;
    }
    std::string known;
    for (const AxisInfo& a : kAxes) known += std::string(known.empty() ? "" : ", ") + a.name;
    throw std::invalid_argument("unknown sweep axis '" + name + "' (" + known + ")");
}

double axis_display_unit(SweepAxis axis) { return info(axis).unit; }

std::vector<double> AxisRange::values() const {
    std::vector<double> v(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) {
        v[static_cast<std::size_t>(i)] =
            count == 1 ? min : min + (max - min) * static_cast<double>(i) / (count - 1);
    }
    return v;
}

PhaseOptimum optimize_phase(const ProtocolSpec& point, const QutritParams& params,
                            const PhaseSearchOptions& options) {
    if (point.cd == CdMode::Off) {
        throw std::invalid_argument("optimize_phase: the CD drive must be enabled");
    }
    if (options.coarse_points < 3) throw std::invalid_argument("optimize_phase: need >= 3 coarse points");

    PhaseOptimum best;
    auto p2_at = [&](double loop_phase) {
        ProtocolSpec p = point;
        p.phases = LoopPhases::for_loop_phase(loop_phase, point.phases.phi01, point.phases.phi12);
        ++best.evaluations;
        return final_p2(p, params);
    };

    const double step = kTwoPi / options.coarse_points;
    double lo = 1.0;
    double hi = -1.0;
    double best_phase = 0.0;
    double best_p2 = -1.0;
    for (int k = 0; k < options.coarse_points; ++k) {
        const double phi = -kPi + step * (k + 1);
        const double p2 = p2_at(phi);
        lo = std::min(lo, p2);
        hi = std::max(hi, p2);
        if (p2 > best_p2) {
            best_p2 = p2;
            best_phase = phi;
        }
    }
    if (hi - lo < options.flat_threshold) {
        best.phi_opt = wrap_phase(best_phase);
        best.p2 = best_p2;
        best.insensitive = true;
        return best;
    }

    // Golden-section search for the maximum on the bracketing interval.
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = best_phase - step;
    double b = best_phase + step;
    double c = b - inv_phi * (b - a);
    double d = a + inv_phi * (b - a);
    double fc = p2_at(c);
    double fd = p2_at(d);
    while (b - a > options.tolerance) {
        if (fc > fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = p2_at(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = p2_at(d);
        }
    }
    const double refined = fc > fd ? c : d;
    const double refined_p2 = std::max(fc, fd);
    if (refined_p2 >= best_p2) {
        best.phi_opt = wrap_phase(refined);
        best.p2 = refined_p2;
    } else {
        best.phi_opt = wrap_phase(best_phase);
        best.p2 = best_p2;
    }
    return best;
}

void SweepSpec::validate() const {
    if (axes.empty() || axes.size() > 2) throw std::invalid_argument("sweep: need one or two axes");
    if (axes.size() == 2 && axes[0].axis == axes[1].axis) {
        throw std::invalid_argument("sweep: axes must be distinct");
    }
    bool has_ts = false;
    bool has_ratio = false;
    for (const AxisRange& a : axes) {
        if (a.count < 1) throw std::invalid_argument(std::string("sweep axis ") + axis_name(a.axis) + ": count must be >= 1");
        if (a.count == 1 && a.min != a.max) {
            throw std::invalid_argument(std::string("sweep axis ") + axis_name(a.axis) +
                                        ": a single-point axis needs min == max");
        }
        if (a.count >= 2 && !(a.max > a.min)) {
            throw std::invalid_argument(std::string("sweep axis ") + axis_name(a.axis) + ": need max > min");
        }
        has_ts = has_ts || a.axis == SweepAxis::Ts;
        has_ratio = has_ratio || a.axis == SweepAxis::TsOverSigma;
        if (optimize_phase && a.axis == SweepAxis::PhiTilde) {
            throw std::invalid_argument("sweep: phi_tilde axis conflicts with optimize_phase");
        }
        if (a.axis == SweepAxis::Area02 && base.cd == CdMode::Off) {
            throw std::invalid_argument("sweep: area02 axis requires the CD drive");
        }
    }
    if (has_ts && has_ratio) throw std::invalid_argument("sweep: t_s and |t_s|/sigma axes conflict");
    if (optimize_phase && base.cd == CdMode::Off) {
        throw std::invalid_argument("sweep: optimize_phase requires the CD drive");
    }
    base.validate();
}

std::size_t SweepSpec::point_count() const {
    std::size_t n = 1;
    for (const AxisRange& a : axes) n *= static_cast<std::size_t>(a.count);
    return n;
}

std::vector<double> SweepSpec::coordinates(std::size_t index) const {
    std::vector<double> coords(axes.size());
    for (std::size_t k = axes.size(); k-- > 0;) {
        const auto count = static_cast<std::size_t>(axes[k].count);
        coords[k] = axes[k].values()[index % count];
        index /= count;
    }
    return coords;
}

ProtocolSpec SweepSpec::point_spec(std::size_t index) const {
    const std::vector<double> coords = coordinates(index);
    std::vector<std::size_t> order(axes.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [this](std::size_t a, std::size_t b) {
        return apply_order(axes[a].axis) < apply_order(axes[b].axis);
    });
    ProtocolSpec p = base;
    for (std::size_t k : order) apply_axis(p, axes[k].axis, coords[k]);
    return p;
}

std::uint64_t SweepSpec::config_hash(const QutritParams& params) const {
    std::string s;
    char buf[64];
    auto add = [&](double v) {
        std::snprintf(buf, sizeof buf, "%a;", v);
        s += buf;
    };
    auto add_int = [&](long long v) {
        std::snprintf(buf, sizeof buf, "%lld;", v);
        s += buf;
    };
    add(params.omega01()); add(params.omega12()); add(params.gamma10());
    add(params.gamma21()); add(params.gamma_phi());
    const ProtocolSpec& b = base;
    add(b.sigma); add(b.t_s); add(b.omega01_peak); add(b.omega12_peak); add(b.stirap_scale);
    add(b.phases.phi01); add(b.phases.phi12); add(b.phases.phi_tilde);
    add_int(static_cast<int>(b.cd)); add(b.cd_area_scale); add(b.two_photon_ratio);
    add_int(static_cast<int>(b.tier)); add_int(b.dissipation); add_int(b.stark_correction);
    add_int(static_cast<int>(b.readout)); add(b.readout_offset);
    const IntegratorConfig cfg = b.integrator_config();
    add_int(static_cast<int>(cfg.method)); add(cfg.dt); add(cfg.abs_tol); add(cfg.rel_tol);
    add(cfg.sample_every); add(cfg.min_dt);
    add(b.thresholds.p0_start); add(b.thresholds.p2_end);
    for (const AxisRange& a : axes) {
        add_int(static_cast<int>(a.axis)); add(a.min); add(a.max); add_int(a.count);
    }
    add_int(optimize_phase);
    add_int(phase_search.coarse_points); add(phase_search.tolerance); add(phase_search.flat_threshold);

    // FNV-1a
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char ch : s) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    return h;
}

SweepPoint evaluate_point(const SweepSpec& spec, const QutritParams& params, std::size_t index) {
    SweepPoint point;
    point.coordinates = spec.coordinates(index);
    try {
        ProtocolSpec p = spec.point_spec(index);
        if (spec.optimize_phase) {
            const PhaseOptimum opt = optimize_phase(p, params, spec.phase_search);
            p.phases = LoopPhases::for_loop_phase(opt.phi_opt, p.phases.phi01, p.phases.phi12);
            point.phi_opt = opt.phi_opt;
            if (opt.insensitive) point.flags |= kFlagInsensitive;
        }
        const ProtocolRun run = run_protocol(p, params);
        point.report = run.report;
        point.p2_peak = run.p2_peak;
        point.defects = density_defects(run.trajectory);
    } catch (const std::exception& e) {
        point.flags |= kFlagFailed;
        point.error = e.what();
    }
    return point;
}

namespace {

constexpr char kCacheMagic[8] = {'S', 'A', 'S', 'T', 'C', 'A', 'C', 'H'};
constexpr std::uint32_t kCacheVersion = 1;

template <class T>
void put(std::ostream& out, const T& v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <class T>
bool get(std::istream& in, T& v) {
    return static_cast<bool>(in.read(reinterpret_cast<char*>(&v), sizeof v));
}

void write_record(std::ostream& out, std::uint64_t index, const SweepPoint& p) {
    put(out, index);
    put(out, p.report.p2_final);
    put(out, static_cast<std::uint8_t>(p.report.t_tr.has_value()));
    put(out, p.report.t_tr.value_or(0.0));
    put(out, p.report.qsl);
    put(out, p.report.area_stirap);
    put(out, p.report.area_cd);
    put(out, p.report.phi_used);
    put(out, p.p2_peak);
    put(out, static_cast<std::uint8_t>(p.phi_opt.has_value()));
    put(out, p.phi_opt.value_or(0.0));
    put(out, p.defects.trace);
    put(out, p.defects.hermiticity);
    put(out, p.defects.min_eigenvalue);
    put(out, static_cast<std::uint32_t>(p.flags));
    put(out, static_cast<std::uint32_t>(p.error.size()));
    out.write(p.error.data(), static_cast<std::streamsize>(p.error.size()));
}

bool read_record(std::istream& in, std::uint64_t& index, SweepPoint& p) {
    std::uint8_t has_ttr = 0;
    std::uint8_t has_phi = 0;
    double ttr = 0.0;
    double phi = 0.0;
    std::uint32_t flags = 0;
    std::uint32_t len = 0;
    if (!get(in, index) || !get(in, p.report.p2_final) || !get(in, has_ttr) || !get(in, ttr) ||
        !get(in, p.report.qsl) || !get(in, p.report.area_stirap) || !get(in, p.report.area_cd) ||
        !get(in, p.report.phi_used) || !get(in, p.p2_peak) || !get(in, has_phi) ||
        !get(in, phi) || !get(in, p.defects.trace) || !get(in, p.defects.hermiticity) ||
        !get(in, p.defects.min_eigenvalue) || !get(in, flags) || !get(in, len)) {
        return false;
    }
    if (len > (1u << 16)) return false;
    p.error.resize(len);
    if (len > 0 && !in.read(p.error.data(), len)) return false;
    if (has_ttr) p.report.t_tr = ttr;
    if (has_phi) p.phi_opt = phi;
    p.flags = flags;
    return true;
}

// Loads completed points; a missing file, a mismatched header or a truncated
// tail simply yields fewer points.
std::map<std::uint64_t, SweepPoint> load_cache(const std::filesystem::path& path,
                                               std::uint64_t hash, std::uint64_t n_points) {
    std::map<std::uint64_t, SweepPoint> done;
    std::ifstream in(path, std::ios::binary);
    if (!in) return done;
    char magic[8];
    std::uint32_t version = 0;
    std::uint64_t file_hash = 0;
    std::uint64_t file_points = 0;
    if (!in.read(magic, sizeof magic) || std::memcmp(magic, kCacheMagic, sizeof magic) != 0 ||
        !get(in, version) || version != kCacheVersion || !get(in, file_hash) ||
        file_hash != hash || !get(in, file_points) || file_points != n_points) {
        return done;
    }
    std::uint64_t index = 0;
    SweepPoint p;
    while (read_record(in, index, p)) {
        if (index < n_points) done[index] = p;
        p = SweepPoint{};
    }
    return done;
}

}  // namespace

SweepResult run_sweep(const SweepSpec& spec, const QutritParams& params,
                      const SweepOptions& options) {
    spec.validate();
    const std::size_t n = spec.point_count();
    const std::uint64_t hash = spec.config_hash(params);

    SweepResult result;
    result.axes = spec.axes;
    result.points.resize(n);
    result.metadata.tier = to_string(spec.base.tier);
    result.metadata.config_hash = hash;
    result.metadata.seed = options.shuffle_seed.value_or(0);
    result.metadata.started_utc = utc_now();
    result.metadata.software_version = version();

    std::vector<bool> done(n, false);
    std::ofstream cache;
    if (options.cache_path) {
        auto cached = load_cache(*options.cache_path, hash, n);
        for (auto& [index, point] : cached) {
            point.coordinates = spec.coordinates(index);
            result.points[index] = std::move(point);
            done[index] = true;
        }
        if (!options.cache_path->parent_path().empty()) {
            std::filesystem::create_directories(options.cache_path->parent_path());
        }
        if (cached.empty()) {
            cache.open(*options.cache_path, std::ios::binary | std::ios::trunc);
            cache.write(kCacheMagic, sizeof kCacheMagic);
            put(cache, kCacheVersion);
            put(cache, hash);
            put(cache, static_cast<std::uint64_t>(n));
        } else {
            cache.open(*options.cache_path, std::ios::binary | std::ios::app);
        }
        cache.flush();
    }

    std::vector<std::size_t> todo;
    for (std::size_t i = 0; i < n; ++i) {
        if (!done[i]) todo.push_back(i);
    }
    if (options.shuffle_seed) {
        std::mt19937_64 rng(*options.shuffle_seed);
        std::shuffle(todo.begin(), todo.end(), rng);
    }

    unsigned jobs = options.jobs != 0 ? options.jobs : std::thread::hardware_concurrency();
    jobs = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(std::max<std::size_t>(todo.size(), 1))));

    std::atomic<std::size_t> next{0};
    std::atomic<std::size_t> completed{n - todo.size()};
    std::mutex sink;
    auto worker = [&] {
        for (;;) {
            const std::size_t k = next.fetch_add(1);
            if (k >= todo.size()) return;
            const std::size_t index = todo[k];
            SweepPoint point = evaluate_point(spec, params, index);
            std::lock_guard<std::mutex> lock(sink);
            if (cache.is_open()) {
                write_record(cache, index, point);
                cache.flush();
            }
            result.points[index] = std::move(point);
            const std::size_t c = ++completed;
            if (options.progress) options.progress(c, n);
        }
    };
    if (jobs == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(jobs);
        for (unsigned j = 0; j < jobs; ++j) pool.emplace_back(worker);
        for (std::thread& t : pool) t.join();
    }
    result.metadata.finished_utc = utc_now();
    return result;
}

void write_sweep_csv(std::ostream& out, const SweepResult& result) {
    out << "# sastirap sweep v1";
    for (std::size_t k = 0; k < result.axes.size(); ++k) {
        out << " axis" << k + 1 << '=' << axis_name(result.axes[k].axis);
    }
    char hash[32];
    std::snprintf(hash, sizeof hash, "%016llx",
                  static_cast<unsigned long long>(result.metadata.config_hash));
    out << " tier=" << result.metadata.tier << " config=" << hash << '\n';
    out << "axis1,axis2,p2,t_tr,phi_opt,flags,p2_peak,qsl_ns,area_pi,area02_pi\n";
    char line[512];
    for (const SweepPoint& p : result.points) {
        char a1[32] = "";
        char a2[32] = "";
        char ttr[32] = "";
        char phi[32] = "";
        if (!p.coordinates.empty()) {
            std::snprintf(a1, sizeof a1, "%.8g", p.coordinates[0] / axis_display_unit(result.axes[0].axis));
        }
        if (p.coordinates.size() > 1) {
            std::snprintf(a2, sizeof a2, "%.8g", p.coordinates[1] / axis_display_unit(result.axes[1].axis));
        }
        if (p.report.t_tr) std::snprintf(ttr, sizeof ttr, "%.4f", *p.report.t_tr);
        if (p.phi_opt) std::snprintf(phi, sizeof phi, "%.6f", *p.phi_opt / kPi);
        std::string flags;
        if (p.flags & kFlagInsensitive) flags += "insensitive";
        if (p.flags & kFlagFailed) flags += std::string(flags.empty() ? "" : "|") + "failed";
        std::snprintf(line, sizeof line, "%s,%s,%.10f,%s,%s,%s,%.10f,%.6f,%.8f,%.8f\n", a1, a2,
                      p.report.p2_final, ttr, phi, flags.c_str(), p.p2_peak, p.report.qsl,
                      p.report.area_stirap / kPi, p.report.area_cd / kPi);
        out << line;
    }
}

}  // namespace sastirap
