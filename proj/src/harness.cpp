#include "jm/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <charconv>
#include <chrono>
#include <cstdio>
#include <map>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include <spdlog/spdlog.h>

#include "jm/directional.hpp"
#include "jm/engine.hpp"
#include "jm/io.hpp"

namespace jm {

namespace {

using Params = std::map<std::string, std::string>;

struct ParamReader {
    Params params;
    std::string preset;
    std::ostringstream canonical;

    double real(const std::vector<std::string>& keys, double fallback) {
        double value = fallback;
        for (const auto& key : keys) {
            const auto it = params.find(key);
            if (it == params.end()) continue;
            const std::string& text = it->second;
            const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
            if (ec != std::errc() || ptr != text.data() + text.size()) {
                throw ConfigError("preset " + preset + ": cannot parse " + key + "=" + text);
            }
            params.erase(it);
        }
        canonical << ";" << keys.front() << "=" << format_double(value);
        return value;
    }

    std::size_t count(const std::vector<std::string>& keys, std::size_t fallback) {
        std::size_t value = fallback;
        for (const auto& key : keys) {
            const auto it = params.find(key);
            if (it == params.end()) continue;
            const std::string& text = it->second;
            const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
            if (ec != std::errc() || ptr != text.data() + text.size()) {
                throw ConfigError("preset " + preset + ": cannot parse " + key + "=" + text);
            }
            params.erase(it);
        }
        canonical << ";" << keys.front() << "=" << value;
        return value;
    }

    void finish() const {
        if (!params.empty()) {
            throw ConfigError("preset " + preset + ": unknown parameter '" + params.begin()->first + "'");
        }
    }
};

std::vector<std::string> tokenize(const std::string& text) {
    std::vector<std::string> tokens;
    std::string current;
    for (char c : text) {
        if (c == ':' || c == ',' || c == ';' || std::isspace(static_cast<unsigned char>(c))) {
            if (!current.empty()) tokens.push_back(std::move(current));
            current.clear();
        } else {
            current.push_back(c);
        }
    }
    if (!current.empty()) tokens.push_back(std::move(current));
    return tokens;
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

void read_mediation(ParamReader& reader, MediationConfig& config) {
    config.n = reader.count({"n"}, config.n);
    config.m = reader.count({"m"}, config.m);
    config.pi00 = reader.real({"pi00"}, config.pi00);
    config.tilde_pi1 = reader.real({"pi1", "tilde_pi1"}, config.tilde_pi1);
    config.alpha_effect = reader.real({"alpha"}, config.alpha_effect);
    config.beta_effect = reader.real({"beta"}, config.beta_effect);
    config.beta0 = reader.real({"beta0"}, config.beta0);
}

Metrics directional_metrics(std::span<const int> signs, std::span<const int> truth) {
    Metrics out;
    std::size_t alternatives = 0;
    std::size_t correct = 0;
    for (std::size_t i = 0; i < signs.size(); ++i) {
        alternatives += truth[i] != 0;
        if (signs[i] == 0) continue;
        ++out.rejections;
        if (signs[i] == truth[i]) ++correct;
        else ++out.false_discoveries;
    }
    out.weighted_false_discoveries = out.false_discoveries;
    out.fdp = directional_fdp(signs, truth);
    out.mfdp = out.fdp;
    out.power = static_cast<double>(correct) / static_cast<double>(std::max<std::size_t>(alternatives, 1));
    return out;
}

Metrics run_method(const std::string& method, const GeneratedData& data, const StudyOptions& options,
                   std::uint64_t seed) {
    if (method == "bh-maxp") {
        return metrics(bh_max_p(data.values, options.q), data.truth);
    }
    if (method == "jm-directional") {
        const DirectionalResult result = run_directional(data.values, options.q);
        return directional_metrics(result.signs, data.true_signs);
    }
    JMConfig config;
    config.q = options.q;
    config.scheme = options.scheme;
    config.seed = seed;
    config.fixed_bandwidth = options.fixed_bandwidth;
    config.variant = parse_variant(method.substr(3));
    return metrics(run_jm(data.values, config).rejected, data.truth);
}

}  // namespace

StudySpec parse_preset(const std::string& text) {
    const auto tokens = tokenize(text);
    if (tokens.empty()) throw ConfigError("empty simulation preset");
    ParamReader reader;
    reader.preset = lower(tokens.front());
    for (std::size_t t = 1; t < tokens.size(); ++t) {
        const auto eq = tokens[t].find('=');
        if (eq == std::string::npos || eq == 0) {
            throw ConfigError("preset " + reader.preset + ": expected key=value, got '" + tokens[t] + "'");
        }
        std::string key = tokens[t].substr(0, eq);
        // Greek letters are accepted as written in the literature: π1, π0.
        if (key.rfind("\xCF\x80", 0) == 0) key = "pi" + key.substr(2);
        reader.params[lower(key)] = tokens[t].substr(eq + 1);
    }

    StudySpec spec;
    spec.name = reader.preset;
    reader.canonical << spec.name;
    const std::string& name = spec.name;
    if (name == "pointmass" || name == "pointmass-pc") {
        PointMassConfig config;
        if (name == "pointmass-pc") config.weights = {0.4, 0.0, 0.0, 0.2};
        config.m = reader.count({"m"}, config.m);
        spec.generator = config;
    } else if (name == "mediation") {
        MediationConfig config;
        read_mediation(reader, config);
        spec.generator = config;
    } else if (name.rfind("mediation-", 0) == 0) {
        MediationConfig config = mediation_preset(name.substr(10));
        read_mediation(reader, config);
        spec.generator = config;
    } else if (name == "replicability") {
        ReplicabilityConfig config;
        config.m = reader.count({"m"}, config.m);
        config.experiments = reader.count({"k"}, config.experiments);
        config.pi1 = reader.real({"pi1"}, config.pi1);
        config.pi0_global = reader.real({"pi0", "pi0_global"}, config.pi0_global);
        config.w0 = reader.real({"w0"}, config.w0);
        config.blocks = reader.count({"b", "blocks"}, config.blocks);
        config.rho = reader.real({"rho"}, config.rho);
        spec.generator = config;
    } else if (name == "directional") {
        DirectionalSimConfig config;
        config.m = reader.count({"m"}, config.m);
        config.experiments = reader.count({"k"}, config.experiments);
        config.pi_pos = reader.real({"pi_pos"}, config.pi_pos);
        config.pi_neg = reader.real({"pi_neg"}, config.pi_neg);
        config.effect = reader.real({"effect"}, config.effect);
        config.zero_prob = reader.real({"zero_prob"}, config.zero_prob);
        spec.generator = config;
    } else {
        throw ConfigError("unknown simulation preset '" + name + "'");
    }
    reader.finish();
    spec.canonical = reader.canonical.str();
    return spec;
}

GeneratedData generate(const StudySpec& spec, std::uint64_t seed) {
    GeneratedData out;
    std::visit(
        [&](const auto& config) {
            using T = std::decay_t<decltype(config)>;
            if constexpr (std::is_same_v<T, PointMassConfig>) {
                SimData d = gen_pointmass(config, seed);
                out.values = std::move(d.pvals);
                out.truth = std::move(d.truth);
            } else if constexpr (std::is_same_v<T, MediationConfig>) {
                SimData d = gen_mediation(config, seed);
                out.values = std::move(d.pvals);
                out.truth = std::move(d.truth);
            } else if constexpr (std::is_same_v<T, ReplicabilityConfig>) {
                SimData d = gen_replicability(config, seed);
                out.values = std::move(d.pvals);
                out.truth = std::move(d.truth);
            } else {
                DirectionalData d = gen_directional(config, seed);
                out.values = std::move(d.z);
                out.true_signs = std::move(d.true_signs);
                std::vector<std::uint8_t> theta(out.true_signs.size(), 0);
                for (std::size_t i = 0; i < theta.size(); ++i) theta[i] = out.true_signs[i] != 0;
                out.truth = TruthTable(1, std::move(theta));
            }
        },
        spec.generator);
    return out;
}

std::vector<std::string> study_methods(const StudySpec& spec) {
    if (spec.directional()) return {"jm-directional"};
    return {"jm-max", "jm-product", "jm-empty", "bh-maxp"};
}

std::string config_hash(const StudySpec& spec, const StudyOptions& options) {
    std::ostringstream text;
    text << spec.canonical << ";q=" << format_double(options.q) << ";scheme=" << format_double(options.scheme.alpha_m())
         << "," << format_double(options.scheme.lambda()) << "," << format_double(options.scheme.nu());
    if (options.fixed_bandwidth) {
        text << ";bandwidth=";
        for (Eigen::Index i = 0; i < options.fixed_bandwidth->size(); ++i) {
            text << format_double(options.fixed_bandwidth->data()[i]) << " ";
        }
    }
    std::uint64_t hash = 0xcbf29ce484222325ULL;
    for (unsigned char c : text.str()) {
        hash ^= c;
        hash *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(hash));
    return buf;
}

std::vector<SummaryRow> run_study(const StudySpec& spec, const StudyOptions& options) {
    JMConfig probe;
    probe.q = options.q;
    validate(probe);
    const auto methods = study_methods(spec);
    const std::string hash = config_hash(spec, options);
    std::vector<SummaryRow> rows(options.reps * methods.size());

    std::atomic<std::size_t> next{0};
    std::mutex error_mutex;
    std::exception_ptr error;
    auto worker = [&] {
        while (true) {
            const std::size_t r = next.fetch_add(1);
            if (r >= options.reps) return;
            try {
                const std::uint64_t seed = options.seed + r;
                const GeneratedData data = generate(spec, seed);
                for (std::size_t j = 0; j < methods.size(); ++j) {
                    const auto start = std::chrono::steady_clock::now();
                    SummaryRow& row = rows[r * methods.size() + j];
                    row.metrics = run_method(methods[j], data, options, seed);
                    row.runtime_ms =
                        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
                    row.replication = r;
                    row.method = methods[j];
                    row.q = options.q;
                    row.config_hash = hash;
                }
                spdlog::debug("replication {} done", r);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error) error = std::current_exception();
                next.store(options.reps);
                return;
            }
        }
    };

    const std::size_t workers = std::max<std::size_t>(1, std::min(options.threads, options.reps));
    if (workers == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
    }
    if (error) std::rethrow_exception(error);
    return rows;
}

void write_summary(std::ostream& out, const std::vector<SummaryRow>& rows) {
    out << "replication,method,q,config_hash,fdp,mfdp,power,rejections\n";
    for (const SummaryRow& row : rows) {
        out << row.replication << ',' << row.method << ',' << format_double(row.q) << ',' << row.config_hash << ','
            << format_double(row.metrics.fdp) << ',' << format_double(row.metrics.mfdp) << ','
            << format_double(row.metrics.power) << ',' << row.metrics.rejections << '\n';
    }
}

void write_timing(std::ostream& out, const std::vector<SummaryRow>& rows) {
    out << "replication,method,runtime_ms\n";
    for (const SummaryRow& row : rows) {
        out << row.replication << ',' << row.method << ',' << format_double(row.runtime_ms) << '\n';
    }
}

}  // namespace jm
