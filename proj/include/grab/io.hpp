#pragma once

#include "grab/bandwidth.hpp"
#include "grab/core.hpp"

#include <json.hpp>

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace grab::io {

using json = nlohmann::json;

/// Shortest decimal form that round-trips a double.
inline std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    for (int prec = 15; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof buf, "%.*g", prec, v);
        if (std::strtod(buf, nullptr) == v) break;
    }
    return buf;
}

inline void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path + " for writing");
    out << text;
    if (!out) throw IoError("write failed: " + path);
}

inline std::string read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// ============================================================
// CSV
// ============================================================

inline std::vector<std::string> split(const std::string& line, char sep = ',') {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, sep)) out.push_back(cell);
    if (!line.empty() && line.back() == sep) out.emplace_back();
    return out;
}

inline std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

inline bool parse_double(const std::string& s, double& out) {
    const std::string t = trim(s);
    if (t.empty()) return false;
    char* end = nullptr;
    out = std::strtod(t.c_str(), &end);
    return end == t.c_str() + t.size();
}

inline std::string matrix_to_csv(const Matrix& m, const std::vector<std::string>& header = {}) {
    std::string out;
    if (!header.empty()) {
        for (std::size_t c = 0; c < header.size(); ++c) out += (c ? "," : "") + header[c];
        out += '\n';
    }
    for (Index i = 0; i < m.rows(); ++i) {
        for (Index c = 0; c < m.cols(); ++c) {
            if (c) out += ',';
            out += format_double(m(i, c));
        }
        out += '\n';
    }
    return out;
}

inline void write_matrix_csv(const std::string& path, const Matrix& m, const std::vector<std::string>& header = {}) {
    write_text(path, matrix_to_csv(m, header));
}

/// Numeric CSV; a first line that does not parse as numbers is treated as a header.
inline Matrix parse_matrix_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    std::vector<std::vector<double>> rows;
    bool first = true;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line).empty()) continue;
        std::vector<double> row;
        bool numeric = true;
        for (const auto& cell : split(line)) {
            double v = 0.0;
            if (!parse_double(cell, v)) {
                numeric = false;
                break;
            }
            row.push_back(v);
        }
        if (!numeric) {
            if (first) {
                first = false;
                continue;
            }
            throw ShapeError("non-numeric CSV row: " + line);
        }
        first = false;
        if (!rows.empty() && row.size() != rows.front().size()) throw ShapeError("ragged CSV rows");
        rows.push_back(std::move(row));
    }
    Matrix m(static_cast<Index>(rows.size()), rows.empty() ? 0 : static_cast<Index>(rows.front().size()));
    for (Index i = 0; i < m.rows(); ++i)
        for (Index c = 0; c < m.cols(); ++c) m(i, c) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(c)];
    return m;
}

inline Matrix read_matrix_csv(const std::string& path) { return parse_matrix_csv(read_text(path)); }

inline void write_labels_csv(const std::string& path, const std::vector<int>& labels) {
    std::string out = "label\n";
    for (int v : labels) out += std::to_string(v) + '\n';
    write_text(path, out);
}

inline std::vector<int> read_labels_csv(const std::string& path) {
    const Matrix m = read_matrix_csv(path);
    if (m.cols() != 1) throw ShapeError("labels CSV must have one column");
    std::vector<int> out(static_cast<std::size_t>(m.rows()));
    for (Index i = 0; i < m.rows(); ++i) out[static_cast<std::size_t>(i)] = static_cast<int>(m(i, 0));
    return out;
}

// ============================================================
// JSON
// ============================================================

inline json to_json(const Vector& v) {
    json a = json::array();
    for (Index i = 0; i < v.size(); ++i) a.push_back(v(i));
    return a;
}

inline json to_json(const Matrix& m) {
    json a = json::array();
    for (Index i = 0; i < m.rows(); ++i) a.push_back(to_json(Vector(m.row(i).transpose())));
    return a;
}

inline json to_json(const BandwidthReport& r) {
    json j;
    j["h"] = to_json(r.h);
    j["omega"] = r.omega;
    j["c_grid"] = r.c_grid;
    j["spectral_dist"] = to_json(r.spectral_dist);
    j["S_sizes"] = r.S_sizes;
    j["delta"] = r.delta;
    j["delta_auto"] = r.delta_auto;
    j["top_n"] = r.top_n;
    j["c_star_index"] = r.c_star_index;
    j["c_star"] = r.c_star;
    j["epsilon"] = to_json(r.epsilon);
    j["effective_neighbours"] = to_json(r.effective_neighbours);
    j["admissible"] = r.admissible;
    j["admissibility_fallback"] = r.admissibility_fallback;
    return j;
}

inline json to_json(const TuningReport& r) {
    json j;
    j["m_selected"] = r.m_selected;
    j["eigen_ratios"] = r.eigen_ratios;
    j["e_threshold"] = r.e_threshold;
    j["fallback"] = r.fallback;
    j["omega_selected"] = r.omega_selected;
    j["k_counts"] = r.k_counts;
    return j;
}

/// Config file: a JSON object, or `key = value` lines with `#` comments.
/// Values in the key-value form become numbers or booleans when they parse as such.
inline json parse_config(const std::string& text) {
    const std::string t = trim(text);
    if (!t.empty() && t.front() == '{') {
        try {
            return json::parse(t);
        } catch (const json::exception& e) {
            throw ConfigError(std::string("invalid JSON config: ") + e.what());
        }
    }
    json j = json::object();
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        if (key.empty()) throw ConfigError("config line " + std::to_string(lineno) + ": empty key");
        double num = 0.0;
        if (val == "true" || val == "false")
            j[key] = (val == "true");
        else if (parse_double(val, num))
            j[key] = num;
        else
            j[key] = val;
    }
    return j;
}

inline json load_config_file(const std::string& path) { return parse_config(read_text(path)); }

}  // namespace grab::io
