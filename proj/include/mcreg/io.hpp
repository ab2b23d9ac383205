#pragma once

#include <charconv>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include <json.hpp>

#include <mcreg/errors.hpp>
#include <mcreg/linalg.hpp>
#include <mcreg/mcr.hpp>

namespace mcreg {

/// Shortest decimal text that parses back to exactly `v`.
inline std::string format_double(double v)
{
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return {buf, res.ptr};
}

inline std::string read_text_file(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FileError(path.string(), "cannot open for reading");
    std::ostringstream ss;
    ss << in.rdbuf();
    if (in.bad()) throw FileError(path.string(), "read failed");
    return ss.str();
}

inline void write_text_file(const std::filesystem::path& path, std::string_view text)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw FileError(path.string(), "cannot open for writing");
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    out.flush();
    if (!out) throw FileError(path.string(), "write failed");
}

// ---- CSV ----

inline std::string to_csv(const DenseMatrix& m)
{
    std::string out;
    for (std::size_t i = 0; i < m.rows(); ++i) {
        for (std::size_t j = 0; j < m.cols(); ++j) {
            if (j) out += ',';
            out += format_double(m(i, j));
        }
        out += '\n';
    }
    return out;
}

namespace detail {

inline std::string_view trim(std::string_view s)
{
    const auto ws = [](char c) { return c == ' ' || c == '\t' || c == '\r'; };
    while (!s.empty() && ws(s.front())) s.remove_prefix(1);
    while (!s.empty() && ws(s.back())) s.remove_suffix(1);
    return s;
}

}  // namespace detail

/**
 * Parses a headerless comma-separated numeric matrix. Blank lines are
 * skipped; every other line must have the same number of cells. Errors carry
 * the 1-based line and cell of the offending entry.
 */
inline DenseMatrix parse_csv(std::string_view text, const std::string& source = "<csv>")
{
    std::vector<double> values;
    std::size_t cols = 0, rows = 0, line_no = 0;
    while (!text.empty()) {
        const auto nl = text.find('\n');
        std::string_view line = text.substr(0, nl);
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        ++line_no;
        if (detail::trim(line).empty()) continue;
        std::size_t cell = 0;
        while (true) {
            const auto comma = line.find(',');
            const std::string_view tok = detail::trim(line.substr(0, comma));
            ++cell;
            double v = 0.0;
            const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
            if (tok.empty() || res.ec != std::errc{} || res.ptr != tok.data() + tok.size())
                throw IngestionError(source, line_no, cell, "not a number: '" + std::string(tok) + "'");
            if (!std::isfinite(v)) throw IngestionError(source, line_no, cell, "non-finite value");
            values.push_back(v);
            if (comma == std::string_view::npos) break;
            line.remove_prefix(comma + 1);
        }
        if (rows == 0) cols = cell;
        else if (cell != cols)
            throw IngestionError(source, line_no, cell,
                                 "ragged row: expected " + std::to_string(cols) + " cells");
        ++rows;
    }
    if (rows == 0) throw IngestionError(source, 0, 0, "no data rows");
    return {rows, cols, std::move(values)};
}

inline DenseMatrix read_csv(const std::filesystem::path& path)
{
    return parse_csv(read_text_file(path), path.string());
}

inline void write_csv(const std::filesystem::path& path, const DenseMatrix& m) { write_text_file(path, to_csv(m)); }

/// One label per non-blank line.
inline std::vector<std::string> read_labels(const std::filesystem::path& path)
{
    const std::string text = read_text_file(path);
    std::vector<std::string> out;
    std::istringstream in(text);
    for (std::string line; std::getline(in, line);) {
        const auto t = detail::trim(line);
        if (!t.empty()) out.emplace_back(t);
    }
    return out;
}

inline std::vector<std::string> default_labels(std::size_t q)
{
    std::vector<std::string> out;
    for (std::size_t k = 0; k < q; ++k) out.push_back("y" + std::to_string(k + 1));
    return out;
}

// ---- precision pattern ----

struct LabeledPattern {
    PrecisionPattern pattern;
    std::vector<std::string> labels;
};

/// {"q": q, "nodes": [labels], "edges": [{"s": i, "k": j, "sign": ±1}]} with 0-based s < k.
inline nlohmann::json pattern_to_json(const PrecisionPattern& pattern, const std::vector<std::string>& labels = {})
{
    const std::size_t q = pattern.q();
    if (!labels.empty() && labels.size() != q) throw DimensionError("pattern_to_json: label count differs from q");
    nlohmann::json j;
    j["q"] = q;
    j["nodes"] = labels.empty() ? default_labels(q) : labels;
    j["edges"] = nlohmann::json::array();
    for (const Edge& e : pattern.edges()) j["edges"].push_back({{"s", e.s}, {"k", e.k}, {"sign", e.sign}});
    return j;
}

inline LabeledPattern pattern_from_json(const nlohmann::json& j, const std::string& source = "<pattern>")
{
    try {
        if (!j.is_object()) throw IngestionError(source, 0, 0, "expected a JSON object");
        const auto q = j.at("q").get<std::size_t>();
        LabeledPattern out{PrecisionPattern(q), {}};
        if (j.contains("nodes")) {
            out.labels = j.at("nodes").get<std::vector<std::string>>();
            if (out.labels.size() != q) throw IngestionError(source, 0, 0, "node count differs from q");
        } else {
            out.labels = default_labels(q);
        }
        std::size_t idx = 0;
        for (const auto& e : j.at("edges")) {
            ++idx;
            const auto s = e.at("s").get<std::size_t>(), k = e.at("k").get<std::size_t>();
            const int sign = e.at("sign").get<int>();
            if (s >= q || k >= q || s == k)
                throw IngestionError(source, idx, 0, "edge endpoints out of range or on the diagonal");
            if (sign != 1 && sign != -1) throw IngestionError(source, idx, 0, "edge sign must be +1 or -1");
            out.pattern.set_edge(s, k, sign);
        }
        return out;
    } catch (const nlohmann::json::exception& e) {
        throw IngestionError(source, 0, 0, e.what());
    }
}

inline LabeledPattern read_pattern(const std::filesystem::path& path)
{
    const std::string text = read_text_file(path);
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw IngestionError(path.string(), 0, e.byte, e.what());
    }
    return pattern_from_json(j, path.string());
}

namespace detail {

inline std::string dot_quote(std::string_view s)
{
    std::string out = "\"";
    for (char c : s) {
        if (c == '"' || c == '\\') out += '\\';
        out += c;
    }
    return out + '"';
}

}  // namespace detail

/// Undirected DOT graph: one node per response, one edge per pattern edge with sign="+1" or sign="-1".
inline std::string pattern_to_dot(const PrecisionPattern& pattern, const std::vector<std::string>& labels = {})
{
    const std::size_t q = pattern.q();
    const auto names = labels.empty() ? default_labels(q) : labels;
    if (names.size() != q) throw DimensionError("pattern_to_dot: label count differs from q");
    std::string out = "graph responses {\n";
    for (const auto& n : names) out += "  " + detail::dot_quote(n) + ";\n";
    for (const Edge& e : pattern.edges()) {
        out += "  " + detail::dot_quote(names[e.s]) + " -- " + detail::dot_quote(names[e.k]);
        out += e.sign > 0 ? " [sign=\"+1\"];\n" : " [sign=\"-1\"];\n";
    }
    return out + "}\n";
}

}  // namespace mcreg
