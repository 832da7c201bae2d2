#ifndef NUCBOUND_CLI_HPP
#define NUCBOUND_CLI_HPP

#include <nucbound/bounds.hpp>
#include <nucbound/io.hpp>
#include <nucbound/oracle.hpp>

#include <CLI11.hpp>

#include <cstdint>
#include <cstdlib>
#include <ios>
#include <optional>
#include <ostream>
#include <string>
#include <thread>

namespace nucbound::cli {

/// Process exit codes, one per failure class.
enum class Exit : int {
    Ok             = 0,
    NotCertified   = 1,
    ParseFailure   = 2, /// malformed tensor file (line/column reported)
    NonFinite      = 3, /// NaN, Inf or overflowing entry
    ModeOutOfRange = 4,
    WrongOrder     = 5, /// certify on a tensor that is not order 3
    TooLarge       = 6, /// oracle size gate
    Usage          = 7, /// bad flags or environment
    Io             = 8, /// input file cannot be read
};

inline constexpr std::size_t kOracleWarnEntries   = 10'000;
inline constexpr std::size_t kOracleRefuseEntries = 100'000;

struct Settings {
    std::string   input;
    long long     mode         = 0;
    double        tol          = kDefaultCertifyTol;
    std::size_t   restarts     = 50;
    std::uint64_t seed         = 0;
    std::size_t   max_terms    = 0;
    double        residual_tol = PrimalOptions{}.residual_tol;
    bool          pretty       = false;
    unsigned      threads      = 1;
};

namespace detail {

inline int code(Exit e) { return static_cast<int>(e); }

/// NUCBOUND_THREADS caps parallelism; unset means hardware concurrency.
inline std::optional<unsigned> thread_cap(std::ostream& err) {
    const char* env = std::getenv("NUCBOUND_THREADS");
    if (env == nullptr || *env == '\0') {
        return std::max(1u, std::thread::hardware_concurrency());
    }
    char*               end   = nullptr;
    const unsigned long value = std::strtoul(env, &end, 10);
    if (*end != '\0' || value == 0 || value > 4096) {
        err << "error: NUCBOUND_THREADS must be a positive integer, got '" << env << "'\n";
        return std::nullopt;
    }
    return static_cast<unsigned>(value);
}

inline std::size_t checked_mode(const DenseTensor& a, long long mode) {
    if (mode < 1 || static_cast<unsigned long long>(mode) > a.order()) {
        throw Error(ErrorKind::ModeOutOfRange, "mode " + std::to_string(mode) + " is not in 1.." + std::to_string(a.order()));
    }
    return static_cast<std::size_t>(mode);
}

inline int cmd_bounds(const Settings& s, std::ostream& out) {
    const auto a      = read_tensor_file(s.input);
    const auto report = full_report(a, s.tol, {kDefaultTruncTol, s.threads});
    if (s.pretty) {
        out << format_report_pretty(report);
    } else {
        out << to_json(report).dump(2) << "\n";
    }
    return code(Exit::Ok);
}

inline int cmd_flatten(const Settings& s, std::ostream& out) {
    const auto a = read_tensor_file(s.input);
    out << format_matrix_text(flatten(a, checked_mode(a, s.mode)));
    return code(Exit::Ok);
}

inline int cmd_certify(const Settings& s, std::ostream& out) {
    const auto a = read_tensor_file(s.input);
    if (a.order() != 3) {
        throw Error(ErrorKind::InvalidOrder, "certify needs an order-3 tensor, got order " + std::to_string(a.order()));
    }
    const BoundsOptions opts{kDefaultTruncTol, s.threads};
    std::vector<std::size_t> modes;
    if (s.mode != 0) {
        modes.push_back(checked_mode(a, s.mode));
    } else {
        modes = {1, 2, 3};
    }

    std::optional<TightnessCertificate> cert;
    std::size_t                         closestMode = modes.front();
    double                              closest     = std::numeric_limits<double>::infinity();
    for (std::size_t m : modes) {
        if ((cert = certify_tightness(a, m, s.tol, opts))) {
            break;
        }
        if (const double dev = max_z_deviation(a, m, opts); dev < closest) {
            closest     = dev;
            closestMode = m;
        }
    }

    nlohmann::json doc = {{"tool", kToolName}, {"version", kToolVersion}, {"shape", a.shape()}, {"tol", s.tol}, {"certified", cert.has_value()}};
    if (cert) {
        doc.update(to_json(*cert));
    } else {
        doc["mode"]            = closestMode;
        doc["max_z_deviation"] = a.is_zero() ? 0.0 : closest;
    }
    if (s.pretty) {
        if (cert) {
            out << "certified via mode " << cert->mode << ": nuclear norm " << format_number(cert->value) << ", max fiber deviation " << format_number(cert->max_z_deviation) << "\n";
            for (std::size_t i = 0; i < cert->weights.size(); ++i) {
                out << "  term " << i + 1 << ": weight " << format_number(cert->weights[i]) << "\n";
            }
        } else {
            out << "not certified (closest mode " << closestMode << ", max fiber deviation " << format_number(doc["max_z_deviation"].get<double>()) << ")\n";
        }
    } else {
        out << doc.dump(2) << "\n";
    }
    return code(cert ? Exit::Ok : Exit::NotCertified);
}

inline int cmd_oracle(const Settings& s, std::ostream& out, std::ostream& err) {
    const auto a = read_tensor_file(s.input);
    if (a.size() > kOracleRefuseEntries) {
        err << "error: oracle refuses tensors above " << kOracleRefuseEntries << " entries (got " << a.size() << ")\n";
        return code(Exit::TooLarge);
    }
    if (a.size() > kOracleWarnEntries) {
        err << "warning: oracle is meant for small tensors; " << a.size() << " entries may take a long time\n";
    }
    PrimalOptions opts;
    opts.restarts     = s.restarts;
    opts.seed         = s.seed;
    opts.max_terms    = s.max_terms;
    opts.residual_tol = s.residual_tol;
    opts.threads      = s.threads;
    const auto est    = primal_estimate(a, opts);
    if (s.pretty) {
        out << "dual lower " << format_number(est.dual_lower) << "\n"
            << "primal upper " << format_number(est.primal_upper) << (est.converged ? "" : " (residual tolerance not met)") << "\n"
            << "residual " << format_number(est.residual) << ", " << est.decomposition.size() << " terms\n"
            << "restarts " << est.restarts_used << ", seed " << est.seed << ", max terms " << est.max_terms << "\n";
    } else {
        out << to_json(est, a.shape(), s.residual_tol).dump(2) << "\n";
    }
    return code(Exit::Ok);
}

} // namespace detail

/// Entry point shared by the executable and the tests.
inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Certified bounds on the nuclear norm of a dense tensor", "nucbound"};
    app.set_version_flag("--version", std::string(kToolVersion));
    app.require_subcommand(1);

    Settings s;
    auto*    bounds  = app.add_subcommand("bounds", "Flattening bounds report");
    auto*    flat    = app.add_subcommand("flatten", "Print a mode-m flattening");
    auto*    certify = app.add_subcommand("certify", "Check the tightness criterion of an order-3 tensor");
    auto*    oracle  = app.add_subcommand("oracle", "Small-scale primal/dual nuclear norm estimates");
    for (auto* sub : {bounds, flat, certify, oracle}) {
        sub->add_option("input", s.input, "Tensor file")->required();
    }
    for (auto* sub : {bounds, certify, oracle}) {
        sub->add_flag("--pretty", s.pretty, "Human-readable summary instead of JSON");
    }
    for (auto* sub : {bounds, certify}) {
        sub->add_option("--tol", s.tol, "Certification tolerance on | ||Z_i||_* - 1 |")->capture_default_str();
    }
    flat->add_option("--mode", s.mode, "Mode to flatten (1-based)")->required();
    certify->add_option("--mode", s.mode, "Mode to test (1-based); default tries 1, 2, 3");
    oracle->add_option("--restarts", s.restarts, "Random restarts")->capture_default_str()->check(CLI::PositiveNumber);
    oracle->add_option("--seed", s.seed, "Base seed; restart k uses seed + k")->capture_default_str();
    oracle->add_option("--max-terms", s.max_terms, "Terms per decomposition (0: product of the two smallest dimensions)")->capture_default_str();
    oracle->add_option("--residual-tol", s.residual_tol, "Relative residual required of a decomposition")->capture_default_str()->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e, out, err);
        return rc == 0 ? detail::code(Exit::Ok) : detail::code(Exit::Usage);
    }
    const auto threads = detail::thread_cap(err);
    if (!threads) {
        return detail::code(Exit::Usage);
    }
    s.threads = *threads;

    try {
        if (bounds->parsed()) {
            return detail::cmd_bounds(s, out);
        }
        if (flat->parsed()) {
            return detail::cmd_flatten(s, out);
        }
        if (certify->parsed()) {
            return detail::cmd_certify(s, out);
        }
        return detail::cmd_oracle(s, out, err);
    } catch (const ParseError& e) {
        err << "error: " << s.input << ": " << e.what() << "\n";
        return detail::code(Exit::ParseFailure);
    } catch (const std::ios_base::failure& e) {
        err << "error: " << e.what() << "\n";
        return detail::code(Exit::Io);
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        switch (e.kind()) {
        case ErrorKind::NonFiniteEntry: return detail::code(Exit::NonFinite);
        case ErrorKind::ModeOutOfRange: return detail::code(Exit::ModeOutOfRange);
        case ErrorKind::InvalidOrder: return detail::code(Exit::WrongOrder);
        case ErrorKind::ShapeDataMismatch: return detail::code(Exit::ParseFailure);
        default: return detail::code(Exit::Usage);
        }
    }
}

} // namespace nucbound::cli

#endif // NUCBOUND_CLI_HPP
