#include "jm/cli.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>
#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include "jm/directional.hpp"
#include "jm/harness.hpp"
#include "jm/simulate.hpp"

namespace jm {

namespace {

using json = nlohmann::ordered_json;

std::ofstream open_output(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw InputError("cannot write '" + path.string() + "'");
    return out;
}

void close_output(std::ofstream& out, const std::filesystem::path& path) {
    out.close();
    if (!out) throw InputError("failed writing '" + path.string() + "'");
}

std::optional<Eigen::MatrixXd> load_bandwidth(const std::string& spec) {
    if (spec == "silverman") return std::nullopt;
    if (spec.rfind("fixed:", 0) != 0 || spec.size() == 6) {
        throw ConfigError("--bandwidth must be 'silverman' or 'fixed:PATH', got '" + spec + "'");
    }
    const Matrix h = ingest(spec.substr(6), InputMode::ZValue);
    if (h.rows() != h.cols()) throw ConfigError("fixed bandwidth matrix must be square");
    Eigen::MatrixXd out(static_cast<Eigen::Index>(h.rows()), static_cast<Eigen::Index>(h.cols()));
    for (std::size_t i = 0; i < h.rows(); ++i) {
        for (std::size_t k = 0; k < h.cols(); ++k) out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = h(i, k);
    }
    return out;
}

json manifest_json(const RunManifest& m) {
    json j;
    if (m.simulate) j["simulate"] = *m.simulate;
    else j["input"] = m.input.string();
    j["mode"] = to_string(m.mode);
    j["variant"] = to_string(m.variant);
    j["q"] = m.q;
    j["scheme"] = {m.scheme.alpha_m(), m.scheme.lambda(), m.scheme.nu()};
    j["seed"] = m.seed;
    j["bandwidth"] = m.bandwidth;
    if (m.reps) j["reps"] = *m.reps;
    j["threads"] = m.threads;
    return j;
}

json metrics_json(const Metrics& metrics) {
    return {{"fdp", metrics.fdp},
            {"mfdp", metrics.mfdp},
            {"power", metrics.power},
            {"rejections", metrics.rejections},
            {"false_discoveries", metrics.false_discoveries}};
}

void write_metadata(const std::filesystem::path& dir, const RunManifest& manifest, json summary, double seconds) {
    json j;
    j["version"] = kVersion;
    j["config"] = manifest_json(manifest);
    j["seed"] = manifest.seed;
    j["wall_time_seconds"] = seconds;
    for (auto& [key, value] : summary.items()) j[key] = value;
    const auto path = dir / "metadata.json";
    auto out = open_output(path);
    out << j.dump(2) << '\n';
    close_output(out, path);
}

json run_pvalues(const RunManifest& manifest, const Matrix& pvals, const TruthTable* truth) {
    JMConfig config;
    config.q = manifest.q;
    config.variant = manifest.variant;
    config.scheme = manifest.scheme;
    config.seed = manifest.seed;
    config.fixed_bandwidth = load_bandwidth(manifest.bandwidth);
    const JMResult result = run_jm(pvals, config);

    std::vector<std::uint8_t> rejected(pvals.rows(), 0);
    for (std::size_t i : result.rejected) rejected[i] = 1;

    const auto results_path = manifest.out_dir / "results.csv";
    auto results = open_output(results_path);
    results << "index,rejected,unmask_rank,region\n";
    for (std::size_t i = 0; i < pvals.rows(); ++i) {
        results << i << ',' << int{rejected[i]} << ',';
        if (result.unmask_rank[i] == kNeverRevealed) results << "inf";
        else results << result.unmask_rank[i];
        results << ',' << to_string(result.labels[i]) << '\n';
    }
    close_output(results, results_path);

    const auto trajectory_path = manifest.out_dir / "trajectory.csv";
    auto trajectory = open_output(trajectory_path);
    trajectory << "t,A,R,fdp_hat\n";
    for (const TrajectoryPoint& p : result.trajectory) {
        trajectory << p.step << ',' << p.mirror_count << ',' << p.rejection_count << ',' << format_double(p.fdp_hat)
                   << '\n';
    }
    close_output(trajectory, trajectory_path);

    json summary;
    summary["m"] = pvals.rows();
    summary["K"] = pvals.cols();
    summary["rejections"] = result.rejected.size();
    summary["reveals"] = result.trajectory.size() - 1;
    summary["terminal_fdp_hat"] = result.terminal_fdp_hat;
    if (truth) summary["metrics"] = metrics_json(metrics(result.rejected, *truth));
    return summary;
}

json run_zvalues(const RunManifest& manifest, const Matrix& z, const std::vector<int>* truth) {
    const DirectionalResult result = run_directional(z, manifest.q);

    const auto results_path = manifest.out_dir / "results.csv";
    auto results = open_output(results_path);
    results << "index,rejected,sign,region\n";
    for (std::size_t i = 0; i < z.rows(); ++i) {
        const std::string region =
            result.threshold ? to_string(classify_directional(z.row(i), *result.threshold)) : "outside";
        results << i << ',' << (result.signs[i] != 0 ? 1 : 0) << ',' << result.signs[i] << ',' << region << '\n';
    }
    close_output(results, results_path);

    const auto trajectory_path = manifest.out_dir / "trajectory.csv";
    auto trajectory = open_output(trajectory_path);
    trajectory << "t,threshold,A,R,dfdp_hat\n";
    for (std::size_t s = 0; s < result.trajectory.size(); ++s) {
        const DirectionalPoint& p = result.trajectory[s];
        trajectory << s << ',' << format_double(p.threshold) << ',' << p.mirror_total << ',' << p.rejection_total
                   << ',' << format_double(p.dfdp_hat) << '\n';
    }
    close_output(trajectory, trajectory_path);

    json summary;
    summary["m"] = z.rows();
    summary["K"] = z.cols();
    summary["rejections"] = static_cast<std::size_t>(
        std::count_if(result.signs.begin(), result.signs.end(), [](int s) { return s != 0; }));
    summary["threshold"] = result.threshold ? json(*result.threshold) : json(nullptr);
    if (truth) summary["dfdp"] = directional_fdp(result.signs, *truth);
    return summary;
}

}  // namespace

MaskingScheme parse_scheme(const std::string& text) {
    double values[3];
    std::size_t start = 0;
    for (int n = 0; n < 3; ++n) {
        const auto end = text.find(',', start);
        if ((n < 2) != (end != std::string::npos)) {
            throw ConfigError("--scheme expects alpha,lambda,nu, got '" + text + "'");
        }
        const std::string field = text.substr(start, end == std::string::npos ? std::string::npos : end - start);
        const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), values[n]);
        if (field.empty() || ec != std::errc() || ptr != field.data() + field.size()) {
            throw ConfigError("--scheme: cannot parse '" + field + "'");
        }
        start = end + 1;
    }
    return MaskingScheme(values[0], values[1], values[2]);
}

void run(const RunManifest& manifest) {
    JMConfig probe;
    probe.q = manifest.q;
    validate(probe);
    if (manifest.threads == 0) throw ConfigError("--threads must be at least 1");
    if (manifest.reps && !manifest.simulate) throw ConfigError("--reps requires --simulate");
    if (manifest.reps && *manifest.reps == 0) throw ConfigError("--reps must be at least 1");
    if (!manifest.simulate && manifest.input.empty()) throw ConfigError("one of --input or --simulate is required");

    const auto start = std::chrono::steady_clock::now();
    std::filesystem::create_directories(manifest.out_dir);
    auto elapsed = [&] { return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count(); };

    if (manifest.simulate) {
        const StudySpec spec = parse_preset(*manifest.simulate);
        if (manifest.reps) {
            StudyOptions options;
            options.q = manifest.q;
            options.scheme = manifest.scheme;
            options.fixed_bandwidth = load_bandwidth(manifest.bandwidth);
            options.seed = manifest.seed;
            options.reps = *manifest.reps;
            options.threads = manifest.threads;
            const auto rows = run_study(spec, options);

            const auto summary_path = manifest.out_dir / "summary.csv";
            auto summary = open_output(summary_path);
            write_summary(summary, rows);
            close_output(summary, summary_path);
            const auto timing_path = manifest.out_dir / "timing.csv";
            auto timing = open_output(timing_path);
            write_timing(timing, rows);
            close_output(timing, timing_path);

            json meta;
            meta["config_hash"] = config_hash(spec, options);
            meta["methods"] = study_methods(spec);
            meta["rows"] = rows.size();
            write_metadata(manifest.out_dir, manifest, meta, elapsed());
            return;
        }
        const GeneratedData data = generate(spec, manifest.seed);
        json meta = spec.directional() ? run_zvalues(manifest, data.values, &data.true_signs)
                                       : run_pvalues(manifest, data.values, &data.truth);
        write_metadata(manifest.out_dir, manifest, std::move(meta), elapsed());
        return;
    }

    const Matrix values = ingest(manifest.input, manifest.mode);
    spdlog::info("read {} x {} matrix from {}", values.rows(), values.cols(), manifest.input.string());
    json meta = manifest.mode == InputMode::PValue ? run_pvalues(manifest, values, nullptr)
                                                   : run_zvalues(manifest, values, nullptr);
    write_metadata(manifest.out_dir, manifest, std::move(meta), elapsed());
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Joint mirror FDR procedure for multi-experiment p-values"};
    app.set_version_flag("--version", kVersion);

    std::string input;
    std::string mode = "pvalue";
    std::string variant = "product";
    double q = 0.1;
    std::string scheme = "0.5,0.5,1";
    std::uint64_t seed = 0;
    std::string bandwidth = "silverman";
    std::string out_dir = ".";
    std::string simulate;
    std::size_t reps = 0;
    std::size_t threads = 1;

    app.add_option("--input", input, "Delimited matrix, one feature per row");
    app.add_option("--mode", mode, "pvalue or zvalue");
    app.add_option("--variant", variant, "max, product or empty");
    app.add_option("--q", q, "Target FDR level in (0,1)");
    app.add_option("--scheme", scheme, "Masking parameters alpha,lambda,nu");
    app.add_option("--seed", seed, "Seed for tie-breaking and simulation");
    app.add_option("--bandwidth", bandwidth, "silverman or fixed:PATH");
    app.add_option("--out-dir", out_dir, "Directory for the output files");
    auto* simulate_opt = app.add_option("--simulate", simulate, "Generator preset, e.g. pointmass or 'replicability:K=4'");
    auto* reps_opt = app.add_option("--reps", reps, "Replications for a simulation study");
    app.add_option("--threads", threads, "Worker threads for replications");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::Success& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return kExitConfig;
    }

    try {
        RunManifest manifest;
        manifest.input = input;
        manifest.mode = parse_input_mode(mode);
        manifest.variant = parse_variant(variant);
        manifest.q = q;
        manifest.scheme = parse_scheme(scheme);
        manifest.seed = seed;
        manifest.bandwidth = bandwidth;
        manifest.out_dir = out_dir;
        if (simulate_opt->count() > 0) manifest.simulate = simulate;
        if (reps_opt->count() > 0) manifest.reps = reps;
        manifest.threads = threads;
        run(manifest);
    } catch (const InputError& e) {
        err << "error: " << e.what() << '\n';
        return kExitInput;
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::filesystem::filesystem_error& e) {
        err << "error: " << e.what() << '\n';
        return kExitInput;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitFailure;
    }
    return kExitOk;
}

void configure_logging() {
    auto logger = spdlog::get("jm");
    if (!logger) logger = spdlog::stderr_logger_mt("jm");
    spdlog::set_default_logger(logger);
    spdlog::level::level_enum level = spdlog::level::warn;
    if (const char* env = std::getenv("JM_LOG"); env && *env) {
        level = spdlog::level::from_str(env);
    }
    spdlog::set_level(level);
}

}  // namespace jm
