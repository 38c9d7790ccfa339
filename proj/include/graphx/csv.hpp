#pragma once

#include <charconv>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>
#include <system_error>
#include <utility>
#include <vector>

#include "graphx/datasets.hpp"
#include "graphx/error.hpp"
#include "graphx/graph.hpp"
#include "graphx/solver.hpp"

// Text formats (UTF-8, LF, 0-based indices):
//   features  optional '#' header line(s), then one comma-separated row per node
//   truth     "node,class" header, one row per node
//   labels    "node,class" header, one row per seed
//   scores    "node,score_0,...,score_{L-1},label,tie"

namespace graphx::csv {

namespace detail {

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
        s.remove_suffix(1);
    }
    return s;
}

inline std::vector<std::string_view> split(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        fields.push_back(trim(line.substr(start, comma - start)));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return fields;
}

[[noreturn]] inline void parse_error(std::size_t line, const std::string& what) {
    throw Error(ErrorKind::ParseError, "line " + std::to_string(line) + ": " + what, line);
}

inline double parse_double(std::string_view field, std::size_t line) {
    double value = 0.0;
    const auto* first = field.data();
    const auto* last = field.data() + field.size();
    if (!field.empty() && *first == '+') ++first;
    const auto [ptr, ec] = std::from_chars(first, last, value);
    if (field.empty() || ec != std::errc() || ptr != last) {
        parse_error(line, "not a number: '" + std::string(field) + "'");
    }
    if (!std::isfinite(value)) {
        throw Error(ErrorKind::NonFiniteValue,
                    "line " + std::to_string(line) + ": non-finite value '" + std::string(field) +
                        "'",
                    line);
    }
    return value;
}

inline std::size_t parse_index(std::string_view field, std::size_t line) {
    std::size_t value = 0;
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (field.empty() || ec != std::errc() || ptr != field.data() + field.size()) {
        parse_error(line, "not a non-negative integer: '" + std::string(field) + "'");
    }
    return value;
}

inline void append_double(std::string& out, double value) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value,
                                         std::chars_format::general, 17);
    out.append(buf, ptr);
}

inline std::ifstream open_in(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::Io, "cannot open " + path);
    return in;
}

inline std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw Error(ErrorKind::Io, "cannot open " + path + " for writing");
    return out;
}

} // namespace detail

inline FeatureMatrix read_features(std::istream& in) {
    std::vector<double> values;
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto body = detail::trim(line);
        if (body.empty() || body.front() == '#') continue;
        const auto fields = detail::split(body);
        if (rows == 0) cols = fields.size();
        if (fields.size() != cols) {
            detail::parse_error(lineno, "expected " + std::to_string(cols) + " columns, got " +
                                            std::to_string(fields.size()));
        }
        for (auto f : fields) values.push_back(detail::parse_double(f, lineno));
        ++rows;
    }
    return FeatureMatrix(rows, cols, std::move(values));
}

inline void write_features(std::ostream& out, const FeatureMatrix& x) {
    std::string buf;
    for (std::size_t i = 0; i < x.rows(); ++i) {
        buf.clear();
        for (std::size_t j = 0; j < x.cols(); ++j) {
            if (j) buf += ',';
            detail::append_double(buf, x(i, j));
        }
        buf += '\n';
        out << buf;
    }
}

/// Reads "node,class" rows after the header.
inline std::vector<std::pair<std::size_t, std::size_t>> read_node_classes(std::istream& in) {
    std::vector<std::pair<std::size_t, std::size_t>> rows;
    std::string line;
    std::size_t lineno = 0;
    bool header = false;
    while (std::getline(in, line)) {
        ++lineno;
        const auto body = detail::trim(line);
        if (body.empty()) continue;
        if (!header) {
            if (body != "node,class") detail::parse_error(lineno, "expected header 'node,class'");
            header = true;
            continue;
        }
        const auto fields = detail::split(body);
        if (fields.size() != 2) detail::parse_error(lineno, "expected 'node,class'");
        rows.emplace_back(detail::parse_index(fields[0], lineno),
                          detail::parse_index(fields[1], lineno));
    }
    if (!header) detail::parse_error(lineno, "missing header 'node,class'");
    return rows;
}

inline void write_node_classes(std::ostream& out,
                               std::span<const std::pair<std::size_t, std::size_t>> rows) {
    out << "node,class\n";
    for (const auto& [node, cls] : rows) out << node << ',' << cls << '\n';
}

/// Truth file: every node 0..n-1 exactly once.
inline std::vector<std::size_t> read_truth(std::istream& in) {
    const auto rows = read_node_classes(in);
    std::vector<std::size_t> truth(rows.size());
    std::vector<bool> seen(rows.size(), false);
    for (std::size_t r = 0; r < rows.size(); ++r) {
        const auto [node, cls] = rows[r];
        require(node < rows.size() && !seen[node], ErrorKind::ShapeMismatch,
                "truth rows must list every node 0..n-1 exactly once (bad node " +
                    std::to_string(node) + ")");
        seen[node] = true;
        truth[node] = cls;
    }
    return truth;
}

inline void write_truth(std::ostream& out, std::span<const std::size_t> truth) {
    out << "node,class\n";
    for (std::size_t i = 0; i < truth.size(); ++i) out << i << ',' << truth[i] << '\n';
}

inline void write_labels(std::ostream& out, const LabelConstraints& c) {
    std::vector<std::pair<std::size_t, std::size_t>> rows;
    for (std::size_t i = 0; i < c.nodes(); ++i) {
        if (c.is_seed(i)) rows.emplace_back(i, static_cast<std::size_t>(c.class_of(i)));
    }
    write_node_classes(out, rows);
}

/// Seeds file into constraints. When `classes` is 0 the class count is
/// inferred as max(class) + 1.
inline LabelConstraints read_labels(std::istream& in, std::size_t n, std::size_t classes,
                                    double epsilon) {
    const auto rows = read_node_classes(in);
    std::size_t L = classes;
    if (L == 0) {
        for (const auto& r : rows) L = std::max(L, r.second + 1);
    }
    for (const auto& [node, cls] : rows) {
        require(node < n, ErrorKind::ShapeMismatch,
                "seed node " + std::to_string(node) + " out of range for " + std::to_string(n) +
                    " nodes");
    }
    return LabelConstraints::from_pairs(n, L, rows, epsilon);
}

inline void write_scores(std::ostream& out, const Prediction& p) {
    const std::size_t L = p.scores.classes();
    std::string buf = "node";
    for (std::size_t k = 0; k < L; ++k) buf += ",score_" + std::to_string(k);
    buf += ",label,tie\n";
    out << buf;
    for (std::size_t i = 0; i < p.scores.nodes(); ++i) {
        buf = std::to_string(i);
        for (std::size_t k = 0; k < L; ++k) {
            buf += ',';
            detail::append_double(buf, p.scores(i, k));
        }
        buf += ',' + std::to_string(p.labels[i]) + ',' + (p.ties[i] ? "1" : "0") + '\n';
        out << buf;
    }
}

inline Prediction read_scores(std::istream& in) {
    std::string line;
    std::size_t lineno = 0;
    std::size_t L = 0;
    std::vector<std::vector<double>> rows;
    Prediction p;
    while (std::getline(in, line)) {
        ++lineno;
        const auto body = detail::trim(line);
        if (body.empty()) continue;
        const auto fields = detail::split(body);
        if (lineno == 1) {
            if (fields.size() < 5 || fields[0] != "node" || fields[fields.size() - 2] != "label" ||
                fields.back() != "tie") {
                detail::parse_error(lineno, "expected header 'node,score_0,...,label,tie'");
            }
            L = fields.size() - 3;
            for (std::size_t k = 0; k < L; ++k) {
                if (fields[k + 1] != "score_" + std::to_string(k)) {
                    detail::parse_error(lineno, "unexpected column '" + std::string(fields[k + 1]) +
                                                    "'");
                }
            }
            continue;
        }
        if (fields.size() != L + 3) {
            detail::parse_error(lineno, "expected " + std::to_string(L + 3) + " columns");
        }
        const std::size_t node = detail::parse_index(fields[0], lineno);
        if (node != rows.size()) detail::parse_error(lineno, "nodes must be listed in order");
        std::vector<double> s(L);
        for (std::size_t k = 0; k < L; ++k) s[k] = detail::parse_double(fields[k + 1], lineno);
        const std::size_t label = detail::parse_index(fields[L + 1], lineno);
        if (label >= L) detail::parse_error(lineno, "label out of range");
        const std::size_t tie = detail::parse_index(fields[L + 2], lineno);
        if (tie > 1) detail::parse_error(lineno, "tie must be 0 or 1");
        rows.push_back(std::move(s));
        p.labels.push_back(label);
        p.ties.push_back(tie == 1);
    }
    if (L == 0) detail::parse_error(lineno, "empty scores file");
    p.scores = ScoreMatrix(rows.size(), L);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t k = 0; k < L; ++k) p.scores(i, k) = rows[i][k];
    }
    return p;
}

// Path-based wrappers.

inline FeatureMatrix load_features(const std::string& path) {
    auto in = detail::open_in(path);
    return read_features(in);
}

inline void save_features(const std::string& path, const FeatureMatrix& x) {
    auto out = detail::open_out(path);
    write_features(out, x);
}

inline std::vector<std::size_t> load_truth(const std::string& path) {
    auto in = detail::open_in(path);
    return read_truth(in);
}

inline void save_truth(const std::string& path, std::span<const std::size_t> truth) {
    auto out = detail::open_out(path);
    write_truth(out, truth);
}

inline LabelConstraints load_labels(const std::string& path, std::size_t n, std::size_t classes,
                                    double epsilon) {
    auto in = detail::open_in(path);
    return read_labels(in, n, classes, epsilon);
}

inline void save_labels(const std::string& path, const LabelConstraints& c) {
    auto out = detail::open_out(path);
    write_labels(out, c);
}

inline Prediction load_scores(const std::string& path) {
    auto in = detail::open_in(path);
    return read_scores(in);
}

inline void save_scores(const std::string& path, const Prediction& p) {
    auto out = detail::open_out(path);
    write_scores(out, p);
}

/// Features plus truth with row counts checked against each other.
inline LabeledDataset load_dataset(const std::string& features_path,
                                   const std::string& truth_path) {
    LabeledDataset d;
    d.features = load_features(features_path);
    d.truth = load_truth(truth_path);
    require(d.truth.size() == d.features.rows(), ErrorKind::ShapeMismatch,
            std::to_string(d.truth.size()) + " truth rows for " +
                std::to_string(d.features.rows()) + " feature rows");
    d.classes = class_count(d.truth);
    validate_truth(d.truth, d.features.rows(), d.classes);
    d.name = features_path;
    return d;
}

} // namespace graphx::csv
