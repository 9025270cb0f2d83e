#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "carl/dynamics.hpp"
#include "carl/model.hpp"

namespace carl {

/// SharedSeed prepares every sweep point from the same ensemble;
/// PerPoint derives an independent seed per grid index.
enum class SeedPolicy { Shared, PerPoint };

struct SweepGrid {
    double delta21_min = -10.0;
    double delta21_max = 25.0;
    std::size_t points = 141;
    SeedPolicy seed_policy = SeedPolicy::Shared;
};

/// Everything needed to reproduce a run. Serialized as one flat JSON object;
/// see config_from_json for the accepted keys.
struct RunConfig {
    SystemParams params;
    InitialConditionSpec initial;
    RunSchedule schedule{0.005, 100.0, 20, {}};
    MotionMode motion = MotionMode::Full;
    std::string out_dir = "out";
    std::optional<double> predict_at; ///< snapshot time feeding the predictor
    int n_max = 0;                    ///< 0 selects the n_max rule
    SweepGrid sweep;
};

class ConfigError : public InvalidParameter {
public:
    explicit ConfigError(const std::string& what, std::optional<std::size_t> line = {},
                         std::optional<std::size_t> column = {})
        : InvalidParameter(what), line_(line), column_(column) {}

    std::optional<std::size_t> line() const noexcept { return line_; }
    std::optional<std::size_t> column() const noexcept { return column_; }

private:
    std::optional<std::size_t> line_;
    std::optional<std::size_t> column_;
};

/// Keys: nu gamma kappa rho a2 delta20 delta21 n_atoms theta_span p_mean
/// p_sigma a1_0 [re, im] seed theta_loading ("lattice" | "random") dtau
/// tau_end record_stride snapshot_times motion ("full" | "motionless")
/// out_dir predict_at n_max delta21_min delta21_max points seed_policy
/// ("shared" | "per_point"). Missing keys keep defaults; unknown keys and
/// wrong types throw ConfigError.
RunConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const RunConfig& cfg);

/// Parses JSON text; syntax errors carry 1-based line and column.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::filesystem::path& path);

/// All parameter, initial-condition, schedule and grid errors.
std::vector<std::string> validate_config(const RunConfig& cfg);

/// 64-bit FNV-1a of the canonical (key-sorted) JSON form, as 16 hex digits.
std::string config_digest(const RunConfig& cfg);

std::string to_string(MotionMode m);
std::string to_string(SeedPolicy p);
std::string to_string(ThetaLoading l);

} // namespace carl
