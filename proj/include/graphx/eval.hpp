#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "graphx/datasets.hpp"
#include "graphx/error.hpp"
#include "graphx/graph.hpp"
#include "graphx/solver.hpp"

namespace graphx {

/// Mann-Whitney AUC: fraction of (positive, negative) pairs with the positive
/// scored higher, ties worth 1/2. Counts are accumulated per tied score group
/// so the result is exact for any number of ties.
inline double roc_auc(std::span<const double> scores, const std::vector<bool>& positives) {
    require(scores.size() == positives.size(), ErrorKind::ShapeMismatch,
            "scores and positives differ in length");
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (!std::isfinite(scores[i])) {
            throw Error(ErrorKind::NonFiniteValue, "non-finite score", i, scores[i]);
        }
    }
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

    double correct = 0.0;
    double neg_below = 0.0;
    double pos_total = 0.0;
    for (std::size_t g = 0; g < order.size();) {
        std::size_t h = g;
        double pos = 0.0, neg = 0.0;
        while (h < order.size() && scores[order[h]] == scores[order[g]]) {
            (positives[order[h]] ? pos : neg) += 1.0;
            ++h;
        }
        correct += pos * neg_below + 0.5 * pos * neg;
        neg_below += neg;
        pos_total += pos;
        g = h;
    }
    if (pos_total == 0.0 || neg_below == 0.0) {
        throw Error(ErrorKind::DegenerateClass,
                    pos_total == 0.0 ? "no positives in evaluation set"
                                     : "no negatives in evaluation set");
    }
    return correct / (pos_total * neg_below);
}

struct EvalReport {
    /// NaN for classes with no positives or no negatives among evaluated nodes.
    std::vector<double> per_class_auc;
    double average_auc = std::numeric_limits<double>::quiet_NaN();
    double accuracy = 0.0;
    std::size_t n_eval = 0;
    std::size_t n_seeds = 0;
    std::vector<std::size_t> degenerate_classes;
    std::vector<std::string> warnings;
};

/// One-vs-rest AUC per class and argmax accuracy, both over non-seed nodes.
inline EvalReport evaluate(const Prediction& prediction, std::span<const std::size_t> truth,
                           const LabelConstraints& constraints) {
    const std::size_t n = truth.size();
    const std::size_t L = prediction.scores.classes();
    require(prediction.scores.nodes() == n && prediction.labels.size() == n &&
                constraints.nodes() == n,
            ErrorKind::ShapeMismatch, "prediction, truth and labels disagree on node count");
    require(constraints.classes() <= L, ErrorKind::ShapeMismatch,
            "labels name more classes than the scores have");
    for (std::size_t c : truth) {
        require(c < L, ErrorKind::ShapeMismatch, "truth class exceeds score columns");
    }

    EvalReport report;
    report.n_seeds = constraints.seed_count();
    std::vector<std::size_t> eval_nodes;
    for (std::size_t i = 0; i < n; ++i) {
        if (!constraints.is_seed(i)) eval_nodes.push_back(i);
    }
    report.n_eval = eval_nodes.size();
    require(report.n_eval > 0, ErrorKind::InvalidArgument, "every node is a seed");

    std::size_t hits = 0;
    for (std::size_t i : eval_nodes) hits += prediction.labels[i] == truth[i] ? 1 : 0;
    report.accuracy = static_cast<double>(hits) / static_cast<double>(report.n_eval);

    std::vector<double> column(report.n_eval);
    std::vector<bool> positive(report.n_eval);
    double sum = 0.0;
    std::size_t counted = 0;
    for (std::size_t k = 0; k < L; ++k) {
        for (std::size_t e = 0; e < eval_nodes.size(); ++e) {
            column[e] = prediction.scores(eval_nodes[e], k);
            positive[e] = truth[eval_nodes[e]] == k;
        }
        try {
            const double auc = roc_auc(column, positive);
            report.per_class_auc.push_back(auc);
            sum += auc;
            ++counted;
        } catch (const Error& err) {
            if (err.kind() != ErrorKind::DegenerateClass) throw;
            report.per_class_auc.push_back(std::numeric_limits<double>::quiet_NaN());
            report.degenerate_classes.push_back(k);
            report.warnings.push_back("DegenerateClass: class " + std::to_string(k) + ": " +
                                      err.what() + "; excluded from the average");
        }
    }
    if (counted > 0) report.average_auc = sum / static_cast<double>(counted);
    return report;
}

/// Thrown when label spreading exhausts its iterations; carries the last
/// iterate's prediction.
class SpreadingNotConverged : public Error {
public:
    SpreadingNotConverged(Prediction last, std::size_t iters, double change)
        : Error(ErrorKind::NoConvergence, "label spreading did not converge", iters, change),
          last_(std::move(last)) {}
    const Prediction& last() const noexcept { return last_; }

private:
    Prediction last_;
};

/// p = 2 baseline: F <- alpha S F + (1 - alpha) Y with S = D^-1/2 W D^-1/2,
/// Y the one-hot seed matrix, until the max entry change drops below tol.
inline Prediction baseline_label_spreading(const Graph& graph, const LabelConstraints& constraints,
                                           double alpha = 0.99, std::size_t iters = 10000,
                                           double tol = 1e-10) {
    require(alpha > 0.0 && alpha < 1.0, ErrorKind::InvalidArgument, "alpha must lie in (0, 1)");
    const std::size_t n = graph.nodes();
    const std::size_t L = constraints.classes();
    require(constraints.nodes() == n, ErrorKind::ShapeMismatch, "labels do not match the graph");

    std::vector<double> inv_sqrt(n);
    for (std::size_t i = 0; i < n; ++i) inv_sqrt[i] = 1.0 / std::sqrt(graph.degrees()[i]);

    ScoreMatrix y(n, L), f(n, L), next(n, L);
    for (std::size_t i = 0; i < n; ++i) {
        if (constraints.is_seed(i)) y(i, static_cast<std::size_t>(constraints.class_of(i))) = 1.0;
    }
    f = y;
    const auto& rp = graph.row_ptr();
    const auto& ci = graph.col_idx();
    const auto& w = graph.weights();
    double change = 0.0;
    for (std::size_t it = 0; it < iters; ++it) {
        change = 0.0;
        for (std::size_t k = 0; k < L; ++k) {
            const auto fk = f.column(k);
            auto nk = next.column(k);
            const auto yk = y.column(k);
            for (std::size_t i = 0; i < n; ++i) {
                double s = 0.0;
                for (std::size_t p = rp[i]; p < rp[i + 1]; ++p) s += w[p] * inv_sqrt[ci[p]] * fk[ci[p]];
                nk[i] = alpha * inv_sqrt[i] * s + (1.0 - alpha) * yk[i];
                change = std::max(change, std::abs(nk[i] - fk[i]));
            }
        }
        std::swap(f, next);
        if (change < tol) return predict(f);
    }
    throw SpreadingNotConverged(predict(f), iters, change);
}

struct ExperimentCell {
    double fraction = 0.0;
    std::uint64_t seed = 0;
    bool ok = false;
    std::string error;
    bool converged = false;
    std::size_t outer_iters = 0;
    double accuracy = std::numeric_limits<double>::quiet_NaN();
    std::vector<double> auc_per_class;
    double auc_mean = std::numeric_limits<double>::quiet_NaN();
    std::vector<std::string> warnings;
};

struct FractionSummary {
    double fraction = 0.0;
    std::size_t cells = 0; // cells that completed
    double accuracy_mean = std::numeric_limits<double>::quiet_NaN();
    double accuracy_std = std::numeric_limits<double>::quiet_NaN();
    double auc_mean = std::numeric_limits<double>::quiet_NaN();
    double auc_std = std::numeric_limits<double>::quiet_NaN();
};

struct ExperimentReport {
    std::vector<ExperimentCell> cells; // fraction-major, then seed, in input order
    std::vector<FractionSummary> summary;
    /// Mean accuracy non-decreasing across fractions (soft check, not enforced).
    bool monotone_accuracy = true;
    std::vector<std::string> warnings;
};

struct ExperimentSpec {
    std::vector<double> fractions;
    std::vector<std::uint64_t> seeds;
    double epsilon = 0.1;
    SolverConfig solver;
    std::size_t jobs = 1;
};

namespace detail {

inline std::pair<double, double> mean_std(const std::vector<double>& xs) {
    if (xs.empty()) {
        const double nan = std::numeric_limits<double>::quiet_NaN();
        return {nan, nan};
    }
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= static_cast<double>(xs.size());
    if (xs.size() < 2) return {mean, 0.0};
    double ss = 0.0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    return {mean, std::sqrt(ss / static_cast<double>(xs.size() - 1))};
}

inline ExperimentCell run_cell(const Graph& graph, std::span<const std::size_t> truth,
                               std::size_t classes, double fraction, std::uint64_t seed,
                               const ExperimentSpec& spec) {
    ExperimentCell cell;
    cell.fraction = fraction;
    cell.seed = seed;
    try {
        const auto part = make_partition(truth, classes, fraction, seed, spec.epsilon);
        require(!part.degenerate, ErrorKind::InvalidExperiment,
                "fraction labels every node; nothing to evaluate");
        const auto result = solve(graph, part.constraints, spec.solver);
        const auto report = evaluate(result.prediction, truth, part.constraints);
        cell.converged = result.trace.converged;
        cell.outer_iters = result.trace.records.size();
        cell.accuracy = report.accuracy;
        cell.auc_per_class = report.per_class_auc;
        cell.auc_mean = report.average_auc;
        cell.warnings = report.warnings;
        cell.warnings.insert(cell.warnings.end(), result.trace.warnings.begin(),
                             result.trace.warnings.end());
        if (!cell.converged) cell.warnings.push_back("NoConvergence: outer_max reached");
        cell.ok = true;
    } catch (const std::exception& err) {
        cell.error = err.what();
    }
    return cell;
}

} // namespace detail

/// Partition, solve and evaluate every (fraction, seed) cell on a fixed graph.
/// Cell failures are recorded in the cell and do not stop the sweep. With
/// jobs > 1 cells run on worker threads; each cell is deterministic and is
/// stored at its own slot, so the report does not depend on scheduling.
inline ExperimentReport stability_experiment(const Graph& graph,
                                             std::span<const std::size_t> truth,
                                             std::size_t classes, const ExperimentSpec& spec) {
    require(!spec.seeds.empty(), ErrorKind::InvalidExperiment, "seeds list is empty");
    require(!spec.fractions.empty(), ErrorKind::InvalidExperiment, "fractions list is empty");
    for (double f : spec.fractions) {
        require(f > 0.0 && f <= 1.0, ErrorKind::InvalidExperiment,
                "fractions must lie in (0, 1]");
    }
    require(truth.size() == graph.nodes(), ErrorKind::ShapeMismatch,
            "truth does not match the graph");

    const std::size_t S = spec.seeds.size();
    const std::size_t total = spec.fractions.size() * S;
    ExperimentReport report;
    report.cells.resize(total);
    auto work = [&](std::size_t c) {
        report.cells[c] = detail::run_cell(graph, truth, classes, spec.fractions[c / S],
                                           spec.seeds[c % S], spec);
    };
    const std::size_t jobs = std::clamp<std::size_t>(spec.jobs, 1, total);
    if (jobs == 1) {
        for (std::size_t c = 0; c < total; ++c) work(c);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        for (std::size_t t = 0; t < jobs; ++t) {
            pool.emplace_back([&] {
                for (std::size_t c = next++; c < total; c = next++) work(c);
            });
        }
        for (auto& th : pool) th.join();
    }

    double previous = -std::numeric_limits<double>::infinity();
    for (std::size_t f = 0; f < spec.fractions.size(); ++f) {
        std::vector<double> acc, auc;
        for (std::size_t s = 0; s < S; ++s) {
            const auto& cell = report.cells[f * S + s];
            if (!cell.ok) {
                report.warnings.push_back("cell fraction=" + std::to_string(cell.fraction) +
                                          " seed=" + std::to_string(cell.seed) +
                                          " failed: " + cell.error);
                continue;
            }
            acc.push_back(cell.accuracy);
            if (std::isfinite(cell.auc_mean)) auc.push_back(cell.auc_mean);
        }
        FractionSummary sum;
        sum.fraction = spec.fractions[f];
        sum.cells = acc.size();
        std::tie(sum.accuracy_mean, sum.accuracy_std) = detail::mean_std(acc);
        std::tie(sum.auc_mean, sum.auc_std) = detail::mean_std(auc);
        if (std::isfinite(sum.accuracy_mean)) {
            if (sum.accuracy_mean < previous) report.monotone_accuracy = false;
            previous = sum.accuracy_mean;
        }
        report.summary.push_back(sum);
    }
    if (!report.monotone_accuracy) {
        report.warnings.push_back("mean accuracy is not non-decreasing across fractions");
    }
    return report;
}

} // namespace graphx
