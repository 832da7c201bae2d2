#ifndef NUCBOUND_IO_HPP
#define NUCBOUND_IO_HPP

// Text formats and report serialization.
//
// Tensor file:
//   # optional comment lines (first non-blank character '#'), anywhere
//   shape: I1 I2 ... IN
//   <prod(Ik) whitespace-separated decimals, lexicographic order, last index fastest>
//
// Matrix file: the same grammar with a "matrix: ROWS COLS" header and
// row-major entries.

#include <nucbound/bounds.hpp>
#include <nucbound/oracle.hpp>
#include <nucbound/tensor.hpp>

#include <json.hpp>

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <cstddef>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace nucbound {

inline constexpr std::string_view kToolName    = "nucbound";
inline constexpr std::string_view kToolVersion = "1.0.0";

/// Malformed text input; line and column are one-based.
class ParseError : public std::runtime_error {
public:
    ParseError(std::size_t line, std::size_t column, const std::string& what)
        : std::runtime_error("line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + what), line_(line), column_(column) {}

    [[nodiscard]] std::size_t line() const noexcept { return line_; }
    [[nodiscard]] std::size_t column() const noexcept { return column_; }

private:
    std::size_t line_;
    std::size_t column_;
};

/// Shortest decimal that reads back to the same double.
[[nodiscard]] inline std::string format_number(double x) { return nlohmann::json(x).dump(); }

namespace detail {

struct Token {
    std::string_view text;
    std::size_t      line;
    std::size_t      column;
};

/// Splits text into tokens, skipping comment lines.
inline std::vector<Token> tokenize(std::string_view text) {
    std::vector<Token> tokens;
    std::size_t        line = 1;
    std::size_t        pos  = 0;
    while (pos <= text.size()) {
        const std::size_t eol      = std::min(text.find('\n', pos), text.size());
        std::string_view  row      = text.substr(pos, eol - pos);
        const std::size_t firstNon = row.find_first_not_of(" \t\r\f\v");
        if (firstNon != std::string_view::npos && row[firstNon] != '#') {
            std::size_t i = firstNon;
            while (i < row.size()) {
                const std::size_t start = i;
                while (i < row.size() && std::string_view(" \t\r\f\v").find(row[i]) == std::string_view::npos) {
                    ++i;
                }
                tokens.push_back({row.substr(start, i - start), line, start + 1});
                while (i < row.size() && std::string_view(" \t\r\f\v").find(row[i]) != std::string_view::npos) {
                    ++i;
                }
            }
        }
        if (eol == text.size()) {
            break;
        }
        pos = eol + 1;
        ++line;
    }
    return tokens;
}

inline std::pair<std::size_t, std::size_t> end_position(std::string_view text) {
    std::size_t line = 1;
    std::size_t col  = 1;
    for (char c : text) {
        if (c == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return {line, col};
}

inline double parse_entry(const Token& tok) {
    std::string_view s = tok.text;
    if (s.size() > 1 && s.front() == '+') {
        s.remove_prefix(1);
    }
    double     value = 0.0;
    const auto res   = std::from_chars(s.data(), s.data() + s.size(), value);
    if (res.ptr != s.data() + s.size() || (res.ec != std::errc{} && res.ec != std::errc::result_out_of_range)) {
        throw ParseError(tok.line, tok.column, "invalid number '" + std::string(tok.text) + "'");
    }
    if (res.ec == std::errc::result_out_of_range) {
        value = std::strtod(std::string(s).c_str(), nullptr); // tiny magnitudes underflow harmlessly
    }
    if (!std::isfinite(value)) {
        throw Error(ErrorKind::NonFiniteEntry, "line " + std::to_string(tok.line) + ", column " + std::to_string(tok.column) + ": entry '" + std::string(tok.text) + "' is not a finite number");
    }
    return value;
}

inline std::size_t parse_dimension(const Token& tok) {
    std::size_t value = 0;
    const auto  res   = std::from_chars(tok.text.data(), tok.text.data() + tok.text.size(), value);
    if (res.ec != std::errc{} || res.ptr != tok.text.data() + tok.text.size() || value == 0) {
        throw ParseError(tok.line, tok.column, "dimension must be a positive integer, got '" + std::string(tok.text) + "'");
    }
    return value;
}

struct ParsedBlock {
    std::vector<std::size_t> dims;
    std::vector<double>      entries;
};

/// Header line "<keyword> d1 d2 ..." followed by exactly prod(d) entries.
inline ParsedBlock parse_block(std::string_view text, std::string_view keyword, std::size_t fixedDims) {
    const auto tokens = tokenize(text);
    if (tokens.empty()) {
        const auto [line, col] = end_position(text);
        throw ParseError(line, col, "missing '" + std::string(keyword) + "' line");
    }
    if (tokens.front().text != keyword) {
        throw ParseError(tokens.front().line, tokens.front().column, "expected '" + std::string(keyword) + "' line, got '" + std::string(tokens.front().text) + "'");
    }
    const std::size_t headerLine = tokens.front().line;
    ParsedBlock       out;
    std::size_t       i = 1;
    for (; i < tokens.size() && tokens[i].line == headerLine; ++i) {
        out.dims.push_back(parse_dimension(tokens[i]));
    }
    if (out.dims.empty()) {
        throw ParseError(tokens.front().line, tokens.front().column, "'" + std::string(keyword) + "' line lists no dimensions");
    }
    if (fixedDims != 0 && out.dims.size() != fixedDims) {
        throw ParseError(tokens.front().line, tokens.front().column, "'" + std::string(keyword) + "' line needs " + std::to_string(fixedDims) + " dimensions");
    }
    std::size_t expected = 1;
    for (std::size_t d : out.dims) {
        if (expected > std::numeric_limits<std::size_t>::max() / d) {
            throw ParseError(tokens.front().line, tokens.front().column, "dimension product overflows");
        }
        expected *= d;
    }
    const std::size_t found = tokens.size() - i;
    if (found > expected) {
        const auto& extra = tokens[i + expected];
        throw ParseError(extra.line, extra.column, "expected " + std::to_string(expected) + " entries, found " + std::to_string(found));
    }
    if (found < expected) {
        const auto [line, col] = end_position(text);
        throw ParseError(line, col, "expected " + std::to_string(expected) + " entries, found " + std::to_string(found));
    }
    out.entries.reserve(expected);
    for (; i < tokens.size(); ++i) {
        out.entries.push_back(parse_entry(tokens[i]));
    }
    return out;
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::ios_base::failure("cannot open '" + path + "'");
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

} // namespace detail

[[nodiscard]] inline DenseTensor parse_tensor_text(std::string_view text) {
    auto block = detail::parse_block(text, "shape:", 0);
    return DenseTensor(std::move(block.dims), std::move(block.entries));
}

[[nodiscard]] inline DenseTensor read_tensor_file(const std::string& path) { return parse_tensor_text(detail::read_file(path)); }

/// One text line per last-mode fiber.
[[nodiscard]] inline std::string format_tensor_text(const DenseTensor& a) {
    std::string out = "shape:";
    for (std::size_t d : a.shape()) {
        out += " " + std::to_string(d);
    }
    out += "\n";
    const std::size_t width = a.shape().back();
    for (std::size_t i = 0; i < a.size(); ++i) {
        out += format_number(a.data()[i]);
        out += (i + 1) % width == 0 ? "\n" : " ";
    }
    return out;
}

[[nodiscard]] inline Matrix parse_matrix_text(std::string_view text) {
    auto block = detail::parse_block(text, "matrix:", 2);
    return Matrix(block.dims[0], block.dims[1], std::move(block.entries));
}

[[nodiscard]] inline std::string format_matrix_text(const Matrix& m) {
    std::string out = "matrix: " + std::to_string(m.rows()) + " " + std::to_string(m.cols()) + "\n";
    for (std::size_t r = 0; r < m.rows(); ++r) {
        for (std::size_t c = 0; c < m.cols(); ++c) {
            out += format_number(m(r, c));
            out += c + 1 == m.cols() ? "\n" : " ";
        }
    }
    return out;
}

// JSON documents. Field names are a stable interface.

[[nodiscard]] inline nlohmann::json to_json(const ModeAnalysis& m) {
    return {
        {"mode", m.mode},
        {"flattening_nuclear", m.flattening_nuclear},
        {"sigma", m.sigma},
        {"z_nuclear", m.z_nuclear},
        {"z_nuclear_exact", m.z_nuclear_exact},
        {"z_nuclear_max", m.z_nuclear_max},
        {"refined_upper", m.refined_upper},
        {"coarse_upper", m.coarse_upper},
    };
}

[[nodiscard]] inline nlohmann::json to_json(const TightnessCertificate& c) {
    return {
        {"mode", c.mode},
        {"value", c.value},
        {"max_z_deviation", c.max_z_deviation},
        {"weights", c.weights},
        {"x", c.x},
        {"u", c.u},
        {"v", c.v},
    };
}

[[nodiscard]] inline nlohmann::json to_json(const BoundsReport& r) {
    nlohmann::json perMode = nlohmann::json::array();
    for (const auto& m : r.per_mode) {
        perMode.push_back(to_json(m));
    }
    return {
        {"tool", kToolName},
        {"version", kToolVersion},
        {"shape", r.shape},
        {"tolerances", {{"certify_tol", r.certify_tol}, {"trunc_tol", r.trunc_tol}}},
        {"per_mode", perMode},
        {"lower", r.lower},
        {"lower_mode", r.lower_mode},
        {"upper", r.upper},
        {"upper_mode", r.upper_mode},
        {"hash_norm", r.hash_norm},
        {"hs_upper", r.hs_upper},
        {"certificate", r.certificate ? to_json(*r.certificate) : nlohmann::json(nullptr)},
    };
}

[[nodiscard]] inline nlohmann::json to_json(const OracleEstimate& e, const Shape& shape, double residualTol) {
    nlohmann::json terms = nlohmann::json::array();
    for (const auto& t : e.decomposition) {
        terms.push_back({{"weight", t.weight}, {"factors", t.factors}});
    }
    return {
        {"tool", kToolName},
        {"version", kToolVersion},
        {"shape", shape},
        {"seed", e.seed},
        {"max_terms", e.max_terms},
        {"residual_tol", residualTol},
        {"dual_lower", e.dual_lower},
        {"primal_upper", e.primal_upper},
        {"restarts_used", e.restarts_used},
        {"residual", e.residual},
        {"converged", e.converged},
        {"decomposition", terms},
    };
}

namespace detail {

inline std::string join_shape(const Shape& shape) {
    std::string out;
    for (std::size_t i = 0; i < shape.size(); ++i) {
        out += (i ? " x " : "") + std::to_string(shape[i]);
    }
    return out;
}

} // namespace detail

[[nodiscard]] inline std::string format_report_pretty(const BoundsReport& r) {
    std::ostringstream out;
    out << "tensor " << detail::join_shape(r.shape) << "\n";
    for (const auto& m : r.per_mode) {
        out << "  mode " << m.mode << ": flattening nuclear " << format_number(m.flattening_nuclear) << ", refined upper " << format_number(m.refined_upper) << ", coarse upper " << format_number(m.coarse_upper) << ", max fiber nuclear "
            << format_number(m.z_nuclear_max) << (m.z_nuclear_exact ? "" : " (bound)") << "\n";
        out << "    sigma:";
        for (double x : m.sigma) {
            out << " " << format_number(x);
        }
        out << "\n    fiber nuclear:";
        for (double x : m.z_nuclear) {
            out << " " << format_number(x);
        }
        out << "\n";
    }
    out << "nuclear norm in [" << format_number(r.lower) << ", " << format_number(r.upper) << "]  (lower from mode " << r.lower_mode << ", upper from mode " << r.upper_mode << ")\n";
    out << "mean flattening norm " << format_number(r.hash_norm) << "\n";
    out << "Hilbert-Schmidt bound " << format_number(r.hs_upper) << "\n";
    if (r.certificate) {
        out << "certified tight via mode " << r.certificate->mode << ": value " << format_number(r.certificate->value) << ", " << r.certificate->weights.size() << " terms, max fiber deviation " << format_number(r.certificate->max_z_deviation) << "\n";
    } else {
        out << "not certified\n";
    }
    out << "tolerances: certify " << format_number(r.certify_tol) << ", truncation " << format_number(r.trunc_tol) << "\n";
    out << kToolName << " " << kToolVersion << "\n";
    return out.str();
}

} // namespace nucbound

#endif // NUCBOUND_IO_HPP
