#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "jm/engine.hpp"
#include "jm/io.hpp"
#include "jm/regions.hpp"

namespace jm {

inline constexpr const char* kVersion = "0.1.0";

/// Process exit codes.
enum ExitCode : int { kExitOk = 0, kExitFailure = 1, kExitInput = 2, kExitConfig = 3 };

/// Everything that determines a run's outputs.
struct RunManifest {
    std::filesystem::path input;
    InputMode mode = InputMode::PValue;
    Variant variant = Variant::Product;
    double q = 0.1;
    MaskingScheme scheme = MaskingScheme::standard();
    std::uint64_t seed = 0;
    /// "silverman" or "fixed:PATH" (K x K delimited matrix).
    std::string bandwidth = "silverman";
    std::filesystem::path out_dir = ".";
    /// Preset string; when set the data come from the generator instead of `input`.
    std::optional<std::string> simulate;
    /// Replication count; with `simulate` this switches to the summary study.
    std::optional<std::size_t> reps;
    std::size_t threads = 1;
};

/// Parses "alpha,lambda,nu". Throws ConfigError.
MaskingScheme parse_scheme(const std::string& text);

/// Executes a manifest and writes its artifacts into out_dir:
/// results.csv, trajectory.csv and metadata.json for single runs;
/// summary.csv, timing.csv and metadata.json for replication studies.
/// Throws InputError, ConfigError or std::filesystem::filesystem_error.
void run(const RunManifest& manifest);

/// Command-line entry: parses `args` (without the program name), runs, reports
/// errors on `err` and returns an ExitCode.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Sets the global log level from the JM_LOG environment variable (default warn)
/// and routes log output to stderr.
void configure_logging();

}  // namespace jm
