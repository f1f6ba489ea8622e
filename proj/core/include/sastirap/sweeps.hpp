#pragma once

// Grid sweeps over protocol parameters with optional per-point phase search.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "sastirap/protocol.hpp"

namespace sastirap {

enum class SweepAxis {
    Sigma,           // ns
    Ts,              // ns (signed)
    TsOverSigma,     // |t_s|/sigma; resolves to t_s = -ratio * sigma
    Phi01,           // rad
    Phi12,           // rad
    PhiTilde,        // rad
    Area,            // STIRAP area, rad (peaks rescaled at fixed ratio)
    Area02,          // CD area, rad
    AmplitudeScale,  // common STIRAP amplitude factor
};

// Config/CSV name including the display unit, e.g. "sigma_ns", "area_pi".
const char* axis_name(SweepAxis axis);
SweepAxis axis_from_name(const std::string& name);
// Internal value per display unit (pi for angles and areas, 1 otherwise).
double axis_display_unit(SweepAxis axis);

struct AxisRange {
    SweepAxis axis;
    double min;  // internal units
    double max;
    int count;

    std::vector<double> values() const;
};

struct PhaseSearchOptions {
    int coarse_points = 24;
    double tolerance = 1e-3;         // rad, golden-section bracket width
    double flat_threshold = 1e-6;    // p2 spread below which the landscape is flat
};

struct PhaseOptimum {
    double phi_opt = 0.0;   // loop phase, (-pi, pi]
    double p2 = 0.0;
    bool insensitive = false;
    int evaluations = 0;
};

// argmax over Phi of p2: coarse grid then golden-section refinement.
// The STIRAP phases of `point` are kept; phi_tilde is varied.
PhaseOptimum optimize_phase(const ProtocolSpec& point, const QutritParams& params,
                            const PhaseSearchOptions& options = {});

struct SweepSpec {
    ProtocolSpec base;
    std::vector<AxisRange> axes;  // one or two, distinct
    bool optimize_phase = false;
    PhaseSearchOptions phase_search{};

    void validate() const;
    std::size_t point_count() const;
    // Axis coordinates of point `index` (row-major, first axis outermost).
    std::vector<double> coordinates(std::size_t index) const;
    // Protocol at a grid point, before any phase optimization.
    ProtocolSpec point_spec(std::size_t index) const;

    // Stable 64-bit digest of every field that influences results.
    std::uint64_t config_hash(const QutritParams& params) const;
};

enum SweepFlag : unsigned {
    kFlagNone = 0,
    kFlagInsensitive = 1u << 0,  // phase landscape flat
    kFlagFailed = 1u << 1,       // integration or configuration failure at this point
};

struct SweepPoint {
    std::vector<double> coordinates;
    TransferReport report;
    double p2_peak = 0.0;
    std::optional<double> phi_opt;
    unsigned flags = kFlagNone;
    std::string error;
    DensityDefects defects;  // worst invariant violations along the final run
};

struct SweepMetadata {
    std::string tier;
    std::uint64_t config_hash = 0;
    std::uint64_t seed = 0;
    std::string started_utc;
    std::string finished_utc;
    std::string software_version;
};

struct SweepResult {
    std::vector<AxisRange> axes;
    std::vector<SweepPoint> points;  // index order
    SweepMetadata metadata;
};

struct SweepOptions {
    unsigned jobs = 0;  // 0 = hardware concurrency
    // Binary cache for resumable sweeps; points found there are not recomputed.
    std::optional<std::filesystem::path> cache_path;
    // Execute grid points in a seeded random order (results stay index-ordered).
    std::optional<std::uint64_t> shuffle_seed;
    std::function<void(std::size_t done, std::size_t total)> progress;
};

// Evaluates one grid point (phase search included when requested).
SweepPoint evaluate_point(const SweepSpec& spec, const QutritParams& params, std::size_t index);

SweepResult run_sweep(const SweepSpec& spec, const QutritParams& params,
                      const SweepOptions& options = {});

// Long-format CSV: axis1, axis2, p2, t_tr, phi_opt, flags, then extra columns.
void write_sweep_csv(std::ostream& out, const SweepResult& result);

}  // namespace sastirap
