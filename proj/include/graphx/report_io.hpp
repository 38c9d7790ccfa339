#pragma once

#include <charconv>
#include <cmath>
#include <fstream>
#include <ostream>
#include <string>

#include <nlohmann/json.hpp>

#include "graphx/error.hpp"
#include "graphx/eval.hpp"
#include "graphx/solver.hpp"

namespace graphx {

namespace detail {

// NaN and infinities become JSON null.
inline nlohmann::json number_or_null(double x) {
    return std::isfinite(x) ? nlohmann::json(x) : nlohmann::json(nullptr);
}

inline nlohmann::json numbers_or_null(const std::vector<double>& xs) {
    auto arr = nlohmann::json::array();
    for (double x : xs) arr.push_back(number_or_null(x));
    return arr;
}

inline void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::trunc | std::ios::binary);
    if (!out) throw Error(ErrorKind::Io, "cannot open " + path + " for writing");
    out << text;
    if (!out) throw Error(ErrorKind::Io, "failed writing " + path);
}

inline std::string csv_number(double x) {
    if (!std::isfinite(x)) return "";
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x); // shortest round trip
    return {buf, ptr};
}

} // namespace detail

/// One entry per outer step.
inline nlohmann::json trace_to_json(const SolveTrace& trace) {
    auto steps = nlohmann::json::array();
    for (const auto& r : trace.records) {
        steps.push_back({
            {"ratios", detail::numbers_or_null(r.ratios)},
            {"ratios_before", detail::numbers_or_null(r.ratios_before)},
            {"ratios_prestep", detail::numbers_or_null(r.ratios_prestep)},
            {"decrease_slack", detail::numbers_or_null(r.decrease_slack)},
            {"ratio_sum", detail::number_or_null(r.ratio_sum)},
            {"inner_iters", r.inner_iters},
            {"residual", detail::number_or_null(r.residual)},
            {"max_violation", detail::number_or_null(r.max_violation)},
            {"wall_ms", r.wall_ms},
        });
    }
    return steps;
}

inline nlohmann::json eval_to_json(const EvalReport& r) {
    return {
        {"per_class_auc", detail::numbers_or_null(r.per_class_auc)},
        {"average_auc", detail::number_or_null(r.average_auc)},
        {"accuracy", r.accuracy},
        {"n_eval", r.n_eval},
        {"n_seeds", r.n_seeds},
        {"degenerate_classes", r.degenerate_classes},
        {"warnings", r.warnings},
    };
}

inline nlohmann::json experiment_to_json(const ExperimentReport& r) {
    auto cells = nlohmann::json::array();
    for (const auto& c : r.cells) {
        nlohmann::json cell = {
            {"fraction", c.fraction},
            {"seed", c.seed},
            {"accuracy", detail::number_or_null(c.accuracy)},
            {"auc_per_class", detail::numbers_or_null(c.auc_per_class)},
            {"auc_mean", detail::number_or_null(c.auc_mean)},
            {"converged", c.converged},
            {"outer_iters", c.outer_iters},
        };
        if (!c.ok) cell["error"] = c.error;
        if (!c.warnings.empty()) cell["warnings"] = c.warnings;
        cells.push_back(std::move(cell));
    }
    auto per_fraction = nlohmann::json::array();
    for (const auto& s : r.summary) {
        per_fraction.push_back({
            {"fraction", s.fraction},
            {"cells", s.cells},
            {"accuracy_mean", detail::number_or_null(s.accuracy_mean)},
            {"accuracy_std", detail::number_or_null(s.accuracy_std)},
            {"auc_mean", detail::number_or_null(s.auc_mean)},
            {"auc_std", detail::number_or_null(s.auc_std)},
        });
    }
    return {
        {"cells", cells},
        {"summary",
         {{"per_fraction", per_fraction},
          {"monotone_accuracy", r.monotone_accuracy},
          {"warnings", r.warnings}}},
    };
}

/// One row per cell; empty fields for failed cells or missing values.
inline void write_experiment_csv(std::ostream& out, const ExperimentReport& r) {
    std::size_t L = 0;
    for (const auto& c : r.cells) L = std::max(L, c.auc_per_class.size());
    out << "fraction,seed,accuracy,auc_mean";
    for (std::size_t k = 0; k < L; ++k) out << ",auc_" << k;
    out << ",converged,error\n";
    for (const auto& c : r.cells) {
        out << detail::csv_number(c.fraction) << ',' << c.seed << ','
            << detail::csv_number(c.accuracy) << ',' << detail::csv_number(c.auc_mean);
        for (std::size_t k = 0; k < L; ++k) {
            out << ',' << (k < c.auc_per_class.size() ? detail::csv_number(c.auc_per_class[k]) : "");
        }
        std::string err = c.error;
        for (char& ch : err) {
            if (ch == ',' || ch == '\n') ch = ';';
        }
        out << ',' << (c.converged ? 1 : 0) << ',' << err << '\n';
    }
}

inline void save_json(const std::string& path, const nlohmann::json& j) {
    detail::write_text(path, j.dump(2) + "\n");
}

} // namespace graphx
