#ifndef GRAND_CLI_HPP
#define GRAND_CLI_HPP

// Front end for grand_sim: configuration parsing/validation and mode dispatch.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "grand/channel.hpp"
#include "grand/codes.hpp"
#include "grand/decoder.hpp"
#include "grand/harness.hpp"
#include "grand/io.hpp"
#include "json.hpp"

namespace grand::cli {

enum ExitCode : int { ok = 0, io_failure = 1, config_error = 2, guard_failure = 3 };

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Help/usage requested or nothing to do; carries the text to print.
class UsageRequest : public std::runtime_error {
public:
    UsageRequest(std::string text, int exit_code) : std::runtime_error(std::move(text)), exit_code(exit_code) {}
    int exit_code;
};

enum class Mode { Sweep, Fig1, Oracle, Markers, DumpCode };

inline const char* to_string(Mode m) {
    switch (m) {
        case Mode::Sweep: return "sweep";
        case Mode::Fig1: return "fig1";
        case Mode::Oracle: return "oracle";
        case Mode::Markers: return "markers";
        default: return "dump-code";
    }
}

struct CodeSpec {
    CodeKind kind = CodeKind::Rlc;
    std::size_t n = 0;
    std::size_t k = 0;
    std::optional<std::uint64_t> seed;  // RLC construction seed
    std::optional<std::uint64_t> poly;  // CRC polynomial, Koopman notation
};

struct RunConfig {
    std::string code_text;
    CodeSpec code;
    OrderKind decoder = OrderKind::LogisticRank;
    std::vector<std::optional<double>> taus{std::nullopt};
    std::string ebn0_text;
    std::vector<double> ebn0_points;
    std::uint64_t trials = 1000;
    std::uint64_t seed = 1;
    bool seed_given = false;
    unsigned workers = 1;
    std::string out_dir = ".";
    Mode mode = Mode::Sweep;
    std::uint64_t target_errors = 2000;
    bool trial_csv = false;
    bool codebook_model = false;  // oracle: compare against 2^k / (2^n - 1) per query
    std::string config_file;

    std::uint64_t code_seed() const { return code.seed.value_or(seed); }

    nlohmann::json to_json() const {
        nlohmann::json j;
        j["code"] = code_text;
        j["decoder"] = decoder == OrderKind::Hamming ? "grand" : "orbgrand";
        std::vector<nlohmann::json> t;
        for (const auto& x : taus) t.push_back(x ? nlohmann::json(*x) : nlohmann::json("none"));
        j["tau"] = t;
        j["ebn0"] = ebn0_text;
        j["ebn0_points"] = ebn0_points;
        j["trials"] = trials;
        j["seed"] = seed;
        j["code_seed"] = code.kind == CodeKind::Rlc ? nlohmann::json(code_seed()) : nlohmann::json(nullptr);
        j["workers"] = workers;
        j["out"] = out_dir;
        j["mode"] = to_string(mode);
        j["target_errors"] = target_errors;
        j["trial_csv"] = trial_csv;
        j["incorrect_model"] = codebook_model ? "codebook" : "geometric";
        return j;
    }
};

namespace detail {

inline std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream is(s);
    while (std::getline(is, cur, sep)) out.push_back(cur);
    if (!s.empty() && s.back() == sep) out.emplace_back();
    return out;
}

inline std::uint64_t parse_uint(const std::string& s, const char* what) {
    try {
        std::size_t used = 0;
        const auto v = std::stoull(s, &used, 0);
        if (used != s.size() || s.empty() || s[0] == '-') throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ConfigError(std::string("invalid ") + what + ": '" + s + "'");
    }
}

inline double parse_double(const std::string& s, const char* what) {
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size() || !std::isfinite(v)) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ConfigError(std::string("invalid ") + what + ": '" + s + "'");
    }
}

}  // namespace detail

/// "rlc:n:k[:seed]" or "crc:n:k:poly" (poly in Koopman hex, e.g. 0xbae).
inline CodeSpec parse_code(const std::string& text) {
    const auto f = detail::split(text, ':');
    if (f.size() < 3 || f.size() > 4) throw ConfigError("--code expects kind:n:k[:seed|poly], got '" + text + "'");
    CodeSpec c;
    if (f[0] == "rlc")
        c.kind = CodeKind::Rlc;
    else if (f[0] == "crc")
        c.kind = CodeKind::Crc;
    else
        throw ConfigError("--code kind must be rlc or crc, got '" + f[0] + "'");
    c.n = detail::parse_uint(f[1], "code length n");
    c.k = detail::parse_uint(f[2], "code dimension k");
    if (c.k == 0 || c.k >= c.n) throw ConfigError("--code requires 0 < k < n");
    if (f.size() == 4) {
        if (c.kind == CodeKind::Rlc)
            c.seed = detail::parse_uint(f[3], "RLC seed");
        else
            c.poly = detail::parse_uint(f[3], "CRC polynomial");
    }
    return c;
}

/// "start:step:stop" (inclusive) or a single value.
inline std::vector<double> parse_ebn0(const std::string& text) {
    const auto f = detail::split(text, ':');
    if (f.size() == 1) return {detail::parse_double(f[0], "Eb/N0")};
    if (f.size() != 3) throw ConfigError("--ebn0 expects start:step:stop or a single value, got '" + text + "'");
    const double start = detail::parse_double(f[0], "Eb/N0 start");
    const double step = detail::parse_double(f[1], "Eb/N0 step");
    const double stop = detail::parse_double(f[2], "Eb/N0 stop");
    if (!(step > 0.0)) throw ConfigError("--ebn0 step must be positive");
    if (stop < start) throw ConfigError("--ebn0 stop must be >= start");
    std::vector<double> pts;
    for (std::size_t i = 0;; ++i) {
        const double v = start + static_cast<double>(i) * step;
        if (v > stop + 1e-9 * std::max(1.0, std::fabs(stop))) break;
        pts.push_back(std::round(v * 1e9) / 1e9);
        if (pts.size() > 100000) throw ConfigError("--ebn0 sweep has too many points");
    }
    return pts;
}

inline std::vector<std::optional<double>> parse_taus(const std::string& text) {
    std::vector<std::optional<double>> out;
    for (const auto& t : detail::split(text, ',')) {
        if (t == "none")
            out.emplace_back(std::nullopt);
        else
            out.emplace_back(detail::parse_double(t, "tau"));
    }
    if (out.empty()) throw ConfigError("--tau needs at least one value");
    return out;
}

inline LinearCode build_code(const RunConfig& cfg) {
    try {
        if (cfg.code.kind == CodeKind::Crc) return make_crc(cfg.code.n, cfg.code.k, *cfg.code.poly);
        return make_rlc(cfg.code.n, cfg.code.k, cfg.code_seed());
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
}

inline std::vector<DecodePolicy> build_policies(const RunConfig& cfg, const LinearCode& code) {
    std::vector<DecodePolicy> out;
    for (const auto& t : cfg.taus) out.push_back({t, default_max_queries(code), cfg.decoder});
    return out;
}

/// Parses flags (and an optional --config file; flags win) into a validated
/// RunConfig. Throws UsageRequest for help or empty input, ConfigError for
/// anything invalid.
inline RunConfig parse_and_validate(int argc, const char* const* argv) {
    CLI::App app{"GRAND / ORBGRAND decoding with soft-output confidence and LLR abandonment"};
    app.name("grand_sim");
    app.allow_config_extras(CLI::config_extras_mode::error);
    app.set_config("--config", "", "Plain-text config file (key = value per line, same names as the flags)");

    RunConfig cfg;
    std::string decoder = "orbgrand", mode = "sweep", incorrect_model = "geometric";
    std::vector<std::string> tau_items{"none"};
    std::optional<std::uint64_t> seed;
    app.add_option("--code", cfg.code_text, "Code descriptor: rlc:n:k[:seed] or crc:n:k:0xpoly (Koopman)")->required();
    app.add_option("--decoder", decoder, "grand (Hamming order, BSC accounting) or orbgrand")
        ->check(CLI::IsMember({"grand", "orbgrand"}));
    app.add_option("--tau", tau_items, "Comma-separated LLR thresholds in bits; 'none' disables abandonment")
        ->delimiter(',');
    app.add_option("--ebn0", cfg.ebn0_text, "Eb/N0 in dB: start:step:stop or a single value");
    app.add_option("--trials", cfg.trials, "Trials per Eb/N0 point");
    app.add_option("--seed", seed, "Master seed (also the RLC seed when the descriptor has none)");
    app.add_option("--workers", cfg.workers, "Worker threads");
    app.add_option("--out", cfg.out_dir, "Output directory");
    app.add_option("--mode", mode, "sweep | fig1 | oracle | markers | dump-code")
        ->check(CLI::IsMember({"sweep", "fig1", "oracle", "markers", "dump-code"}));
    app.add_option("--target-errors", cfg.target_errors, "fig1: incorrect decodings to collect");
    app.add_flag("--trial-csv", cfg.trial_csv, "sweep: also write per-trial records");
    app.add_option("--incorrect-model", incorrect_model, "oracle: geometric (1-(1-2^-(n-k))^q) or codebook (2^k/(2^n-1) per query)")
        ->check(CLI::IsMember({"geometric", "codebook"}));

    if (argc <= 1) throw UsageRequest(app.help(), config_error);
    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        throw UsageRequest(app.help(), ok);
    } catch (const CLI::ParseError& e) {
        throw ConfigError(e.what());
    }
    if (auto* opt = app.get_config_ptr(); opt && opt->count() > 0) cfg.config_file = opt->as<std::string>();

    cfg.code = parse_code(cfg.code_text);
    if (seed) {
        cfg.seed = *seed;
        cfg.seed_given = true;
    }
    if (cfg.code.kind == CodeKind::Crc && !cfg.code.poly)
        throw ConfigError(cfg.seed_given ? "crc codes are defined by a polynomial (crc:n:k:0xpoly), not a seed"
                                         : "crc codes need a polynomial: crc:n:k:0xpoly");
    cfg.decoder = decoder == "grand" ? OrderKind::Hamming : OrderKind::LogisticRank;
    cfg.codebook_model = incorrect_model == "codebook";
    std::string tau;
    for (const auto& t : tau_items) tau += (tau.empty() ? "" : ",") + t;
    cfg.taus = parse_taus(tau);
    if (mode == "sweep") cfg.mode = Mode::Sweep;
    if (mode == "fig1") cfg.mode = Mode::Fig1;
    if (mode == "oracle") cfg.mode = Mode::Oracle;
    if (mode == "markers") cfg.mode = Mode::Markers;
    if (mode == "dump-code") cfg.mode = Mode::DumpCode;

    const bool needs_ebn0 = cfg.mode == Mode::Sweep || cfg.mode == Mode::Fig1 || cfg.mode == Mode::Oracle;
    if (needs_ebn0 && cfg.ebn0_text.empty()) throw ConfigError(std::string("--ebn0 is required in ") + mode + " mode");
    if (!cfg.ebn0_text.empty()) cfg.ebn0_points = parse_ebn0(cfg.ebn0_text);
    if ((cfg.mode == Mode::Fig1 || cfg.mode == Mode::Oracle) && cfg.ebn0_points.size() != 1)
        throw ConfigError(std::string("--ebn0 must be a single value in ") + mode + " mode");
    if (cfg.trials < 1) throw ConfigError("--trials must be >= 1");
    if (cfg.workers < 1) throw ConfigError("--workers must be >= 1");
    if (cfg.target_errors < 1) throw ConfigError("--target-errors must be >= 1");
    if (cfg.mode == Mode::Oracle && cfg.code.n > 12) throw ConfigError("oracle mode needs n <= 12");

    build_code(cfg);  // surfaces construction errors as config errors
    return cfg;
}

namespace detail {

inline std::ofstream open_output(const std::filesystem::path& path) {
    std::ofstream os(path);
    if (!os) throw std::ios_base::failure("cannot open " + path.string() + " for writing");
    return os;
}

inline nlohmann::json sidecar(const RunConfig& cfg, const LinearCode& code) {
    nlohmann::json j;
    j["version"] = version;
    j["config"] = cfg.to_json();
    j["code"] = {{"descriptor", code.descriptor()}, {"n", code.n()}, {"k", code.k()}, {"rate", code.rate()}};
    const auto m = capacity_markers(code.rate());
    j["capacity_markers"] = {{"shannon_ebn0_db", m.shannon_ebn0_db}, {"mincap_ebn0_db", m.mincap_ebn0_db}};
    j["seeds"] = {{"master", cfg.seed}, {"code", code.kind() == CodeKind::Rlc ? nlohmann::json(cfg.code_seed()) : nlohmann::json(nullptr)}};
    return j;
}

inline Metadata csv_metadata(const RunConfig& cfg, const LinearCode& code) {
    const auto m = capacity_markers(code.rate());
    return {{"code", code.descriptor()},
            {"rate", format_number(code.rate())},
            {"shannon_ebn0_db", format_number(m.shannon_ebn0_db)},
            {"mincap_ebn0_db", format_number(m.mincap_ebn0_db)},
            {"seed", std::to_string(cfg.seed)},
            {"version", version}};
}

}  // namespace detail

/// Executes a validated configuration. Returns the process exit status.
inline int run(const RunConfig& cfg, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    const LinearCode code = build_code(cfg);
    const std::filesystem::path dir(cfg.out_dir);

    switch (cfg.mode) {
        case Mode::Markers: {
            const auto m = capacity_markers(code.rate());
            out << "rate=" << format_number(code.rate()) << '\n'
                << "shannon_ebn0_db=" << format_number(m.shannon_ebn0_db) << '\n'
                << "mincap_ebn0_db=" << format_number(m.mincap_ebn0_db) << '\n';
            return ok;
        }
        case Mode::DumpCode: {
            out << "# " << code.descriptor() << " parity_check rows (bit 0 = MSB of first hex digit)\n";
            for (const auto& row : code.parity_check()) out << row.to_hex() << '\n';
            return ok;
        }
        case Mode::Oracle: {
            constexpr double tolerance = 1e-10;
            const auto t0 = std::chrono::steady_clock::now();
            Rng rng = make_stream(cfg.seed, 0x6f7261636c65ull);
            BitBlock message(code.k());
            for (std::size_t i = 0; i < code.k(); ++i)
                if (rng() & 1u) message.set(i, true);
            const auto obs = transmit(encode(code, message), {cfg.ebn0_points[0], code.rate()}, rng);
            const auto model = cfg.codebook_model ? IncorrectModel::exact_random_codebook(code.n(), code.k())
                                                  : IncorrectModel::geometric(code.redundancy());
            const auto ex = oracle_exact_accounting(code, obs, cfg.decoder, model);
            const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            const double total_dev = std::fabs(ex.p_correct_direct.back() - 1.0);

            std::filesystem::create_directories(dir);
            auto os = detail::open_output(dir / "oracle.csv");
            write_metadata(os, detail::csv_metadata(cfg, code));
            os << "q,p_correct_direct,p_correct_ledger,p_incorrect_exact,p_incorrect_approx\n";
            for (std::size_t q = 0; q < ex.p_correct_direct.size(); ++q)
                os << q + 1 << ',' << format_number(ex.p_correct_direct[q]) << ','
                   << format_number(ex.p_correct_ledger[q]) << ',' << format_number(ex.p_incorrect_exact[q]) << ','
                   << format_number(ex.p_incorrect_approx[q]) << '\n';

            const bool pass = ex.max_ledger_deviation < tolerance && total_dev < tolerance;
            out << "queries=" << ex.p_correct_direct.size() << '\n'
                << "max_ledger_deviation=" << format_number(ex.max_ledger_deviation) << '\n'
                << "total_mass_deviation=" << format_number(total_dev) << '\n'
                << "max_incorrect_model_deviation=" << format_number(ex.max_incorrect_deviation) << '\n'
                << "seconds=" << format_number(secs) << '\n'
                << (pass ? "PASS" : "FAIL") << '\n';
            return pass ? ok : guard_failure;
        }
        case Mode::Fig1: {
            const auto dist = collect_error_query_distribution(code, cfg.ebn0_points[0], cfg.target_errors, cfg.seed,
                                                               cfg.workers, cfg.decoder);
            const double p = std::ldexp(1.0, -static_cast<int>(code.redundancy()));
            const double ks = ks_distance_geometric(dist.samples, p);
            std::filesystem::create_directories(dir);
            {
                auto os = detail::open_output(dir / "fig1_histogram.csv");
                auto meta = detail::csv_metadata(cfg, code);
                meta.emplace_back("ebn0_db", format_number(cfg.ebn0_points[0]));
                meta.emplace_back("ks_distance", format_number(ks));
                write_histogram_csv(os, dist, code.redundancy(), meta);
            }
            auto j = detail::sidecar(cfg, code);
            j["result"] = {{"samples", dist.samples.size()}, {"trials", dist.trials}, {"mean", dist.mean},
                           {"geometric_mean", 1.0 / p}, {"ks_distance", ks}, {"error_rate", dist.error_rate}};
            detail::open_output(dir / "fig1.json") << j.dump(2) << '\n';
            out << "samples=" << dist.samples.size() << " trials=" << dist.trials << " mean=" << format_number(dist.mean)
                << " geometric_mean=" << format_number(1.0 / p) << " ks=" << format_number(ks) << '\n';
            return ok;
        }
        case Mode::Sweep: {
            SweepOptions opt;
            opt.policies = build_policies(cfg, code);
            opt.ebn0_points = cfg.ebn0_points;
            opt.trials_per_point = cfg.trials;
            opt.master_seed = cfg.seed;
            opt.workers = cfg.workers;
            opt.keep_records = cfg.trial_csv;
            const auto res = run_sweep(code, opt);

            std::filesystem::create_directories(dir);
            {
                auto os = detail::open_output(dir / "sweep.csv");
                write_sweep_csv(os, res, opt.policies, detail::csv_metadata(cfg, code));
            }
            if (cfg.trial_csv) {
                auto os = detail::open_output(dir / "trials.csv");
                write_trial_csv(os, res.records);
            }
            auto j = detail::sidecar(cfg, code);
            std::vector<nlohmann::json> pols;
            for (const auto& p : opt.policies) pols.push_back(to_json(p));
            j["policies"] = pols;
            j["monotonicity_violations"] = res.monotonicity_violations();
            detail::open_output(dir / "sweep.json") << j.dump(2) << '\n';

            out << "wrote " << (dir / "sweep.csv").string() << " (" << res.cells.size() << " cells)\n";
            if (res.monotonicity_violations() > 0) {
                err << "tau-monotonicity violated in " << res.monotonicity_violations() << " trial comparisons\n";
                return guard_failure;
            }
            return ok;
        }
    }
    return ok;
}

/// Full command-line entry point with exit-code mapping.
inline int main(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    try {
        return run(parse_and_validate(argc, argv), out, err);
    } catch (const UsageRequest& u) {
        (u.exit_code == ok ? out : err) << u.what();
        return u.exit_code;
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return config_error;
    } catch (const GuardError& e) {
        err << "guard: " << e.what() << '\n';
        return guard_failure;
    } catch (const std::ios_base::failure& e) {
        err << "io error: " << e.what() << '\n';
        return io_failure;
    } catch (const std::filesystem::filesystem_error& e) {
        err << "io error: " << e.what() << '\n';
        return io_failure;
    }
}

}  // namespace grand::cli

#endif  // GRAND_CLI_HPP
