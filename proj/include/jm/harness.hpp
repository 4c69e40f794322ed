#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Core>

#include "jm/matrix.hpp"
#include "jm/regions.hpp"
#include "jm/simulate.hpp"

namespace jm {

/// A named generator with its parameters.
///
/// Preset strings look like `name`, `name:key=value,key=value` or
/// `name key=value key=value`. Names: pointmass, pointmass-pc (no single-null states),
/// mediation, mediation-{gnull,snull,dnull,salter,dalter}, replicability, directional.
struct StudySpec {
    std::string name;
    std::variant<PointMassConfig, MediationConfig, ReplicabilityConfig, DirectionalSimConfig> generator;
    /// name plus every parameter in a fixed order; the basis of config_hash.
    std::string canonical;

    bool directional() const noexcept { return std::holds_alternative<DirectionalSimConfig>(generator); }
};

/// Throws ConfigError for unknown names, unknown keys or unparseable values.
StudySpec parse_preset(const std::string& text);

struct GeneratedData {
    /// p-values, or z-values for the directional preset.
    Matrix values;
    TruthTable truth;
    /// Directional preset only.
    std::vector<int> true_signs;
};

GeneratedData generate(const StudySpec& spec, std::uint64_t seed);

struct StudyOptions {
    double q = 0.1;
    MaskingScheme scheme = MaskingScheme::standard();
    std::optional<Eigen::MatrixXd> fixed_bandwidth;
    /// Replication r uses seed + r for both the generator and the procedure.
    std::uint64_t seed = 0;
    std::size_t reps = 1;
    std::size_t threads = 1;
};

/// jm-max, jm-product, jm-empty and bh-maxp; jm-directional for the directional preset.
std::vector<std::string> study_methods(const StudySpec& spec);

struct SummaryRow {
    std::size_t replication = 0;
    std::string method;
    double q = 0.0;
    std::string config_hash;
    Metrics metrics;
    double runtime_ms = 0.0;
};

/// 64-bit FNV-1a of the canonical generator string, q, scheme and bandwidth, as hex.
std::string config_hash(const StudySpec& spec, const StudyOptions& options);

/// Runs every method on every replication with up to options.threads workers.
/// Rows are ordered by replication, then method, whatever the thread count.
std::vector<SummaryRow> run_study(const StudySpec& spec, const StudyOptions& options);

/// replication,method,q,config_hash,fdp,mfdp,power,rejections
void write_summary(std::ostream& out, const std::vector<SummaryRow>& rows);
/// replication,method,runtime_ms
void write_timing(std::ostream& out, const std::vector<SummaryRow>& rows);

}  // namespace jm
