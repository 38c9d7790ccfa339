#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "graphx/error.hpp"
#include "graphx/graph.hpp"
#include "graphx/solver.hpp"

namespace graphx {

struct LabeledDataset {
    FeatureMatrix features;
    std::vector<std::size_t> truth;
    std::size_t classes = 0;
    std::string name;
};

inline void validate_truth(std::span<const std::size_t> truth, std::size_t n, std::size_t L) {
    require(truth.size() == n, ErrorKind::ShapeMismatch,
            std::to_string(truth.size()) + " labels for " + std::to_string(n) + " nodes");
    std::vector<bool> seen(L, false);
    for (std::size_t c : truth) {
        require(c < L, ErrorKind::InvalidArgument, "class id out of range");
        seen[c] = true;
    }
    for (std::size_t k = 0; k < L; ++k) {
        require(seen[k], ErrorKind::EmptyClass, "class " + std::to_string(k) + " never appears");
    }
}

inline std::size_t class_count(std::span<const std::size_t> truth) {
    std::size_t L = 0;
    for (std::size_t c : truth) L = std::max(L, c + 1);
    return L;
}

/// Two interleaved unit half-circles, n/2 points each: the upper arc centred
/// at the origin (class 0) and the lower arc centred at (1, 0.5) (class 1),
/// plus isotropic Gaussian noise.
inline LabeledDataset synth_two_moons(std::size_t n, double noise, std::uint64_t seed) {
    require(n >= 4 && n % 2 == 0, ErrorKind::InvalidArgument, "n must be even and >= 4");
    require(noise >= 0.0 && std::isfinite(noise), ErrorKind::InvalidArgument,
            "noise must be >= 0");
    const std::size_t half = n / 2;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<double> xs(2 * n);
    std::vector<std::size_t> truth(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t moon = i < half ? 0 : 1;
        const std::size_t j = i - moon * half;
        const double t = std::numbers::pi * static_cast<double>(j) / static_cast<double>(half - 1);
        double x = moon == 0 ? std::cos(t) : 1.0 - std::cos(t);
        double y = moon == 0 ? std::sin(t) : 0.5 - std::sin(t);
        if (noise > 0.0) {
            x += noise * gauss(rng);
            y += noise * gauss(rng);
        }
        xs[2 * i] = x;
        xs[2 * i + 1] = y;
        truth[i] = moon;
    }
    return {FeatureMatrix(n, 2, std::move(xs)), std::move(truth), 2, "two-moons"};
}

struct SbmSample {
    Graph graph;
    std::vector<std::size_t> truth;
    std::size_t attempts = 0;
};

/// Uniform draw in [0, 1) from the top 53 bits; SBM edges use this so the
/// stream is reproducible independently of the standard distributions.
inline double unit_draw(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Stochastic block model with unit weights. For every attempt, pairs (i, j),
/// i < j, are visited in lexicographic order and connected when
/// unit_draw() < p. Attempts that leave an isolated node are redrawn from the
/// same stream, at most 100 times.
inline SbmSample synth_sbm(std::span<const std::size_t> sizes, double p_in, double p_out,
                           std::uint64_t seed) {
    require(sizes.size() >= 2, ErrorKind::InvalidArgument, "sizes: need at least 2 blocks");
    for (std::size_t s : sizes) require(s >= 2, ErrorKind::InvalidArgument, "sizes: each >= 2");
    require(p_in >= 0.0 && p_in <= 1.0, ErrorKind::InvalidArgument, "p-in must lie in [0, 1]");
    require(p_out >= 0.0 && p_out <= 1.0, ErrorKind::InvalidArgument,
            "p-out must lie in [0, 1]");
    // p_out == p_in == 1 is the complete-graph negative control.
    require(p_out < p_in || (p_in == 1.0 && p_out == 1.0), ErrorKind::InvalidArgument,
            "p-out must be < p-in");

    std::vector<std::size_t> truth;
    for (std::size_t b = 0; b < sizes.size(); ++b) truth.insert(truth.end(), sizes[b], b);
    const std::size_t n = truth.size();

    std::mt19937_64 rng(seed);
    for (std::size_t attempt = 1; attempt <= 100; ++attempt) {
        std::vector<Edge> edges;
        std::vector<std::size_t> degree(n, 0);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = i + 1; j < n; ++j) {
                const double p = truth[i] == truth[j] ? p_in : p_out;
                if (unit_draw(rng) < p) {
                    edges.push_back({i, j, 1.0});
                    ++degree[i];
                    ++degree[j];
                }
            }
        }
        if (std::find(degree.begin(), degree.end(), 0) == degree.end()) {
            return {Graph::from_edges(n, std::move(edges)), truth, attempt};
        }
    }
    throw Error(ErrorKind::GenerationFailed, "every SBM draw left an isolated node");
}

struct Partition {
    LabelConstraints constraints;
    std::vector<std::size_t> heldout; // evaluation nodes, ascending
    double labeled_fraction = 0.0;
    std::uint64_t seed = 0;
    bool degenerate = false; // everything labeled, nothing to evaluate
};

/// Stratified seed selection: class k receives max(1, round(fraction * n_k))
/// seeds drawn without replacement.
inline Partition make_partition(std::span<const std::size_t> truth, std::size_t classes,
                                double fraction, std::uint64_t seed, double epsilon = 0.1) {
    const std::size_t n = truth.size();
    require(fraction > 0.0 && fraction <= 1.0, ErrorKind::InvalidArgument,
            "labeled fraction must lie in (0, 1]");
    if (fraction * static_cast<double>(n) < static_cast<double>(classes)) {
        throw Error(ErrorKind::FractionTooSmall,
                    "fraction * n must be at least the class count");
    }
    std::vector<std::vector<std::size_t>> members(classes);
    for (std::size_t i = 0; i < n; ++i) {
        require(truth[i] < classes, ErrorKind::InvalidArgument, "class id out of range");
        members[truth[i]].push_back(i);
    }
    std::mt19937_64 rng(seed);
    std::vector<std::vector<std::size_t>> seeds(classes);
    std::vector<bool> labeled(n, false);
    for (std::size_t k = 0; k < classes; ++k) {
        auto& pool = members[k];
        require(!pool.empty(), ErrorKind::EmptyClass, "class " + std::to_string(k) + " is empty");
        const auto want = static_cast<std::size_t>(
            std::llround(fraction * static_cast<double>(pool.size())));
        const std::size_t count = std::clamp<std::size_t>(want, 1, pool.size());
        std::shuffle(pool.begin(), pool.end(), rng);
        seeds[k].assign(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(count));
        for (std::size_t i : seeds[k]) labeled[i] = true;
    }
    Partition p{LabelConstraints(n, std::move(seeds), epsilon), {}, fraction, seed, false};
    for (std::size_t i = 0; i < n; ++i) {
        if (!labeled[i]) p.heldout.push_back(i);
    }
    p.degenerate = p.heldout.empty();
    return p;
}

inline Partition make_partition(const LabeledDataset& data, double fraction, std::uint64_t seed,
                                double epsilon = 0.1) {
    return make_partition(data.truth, data.classes, fraction, seed, epsilon);
}

} // namespace graphx
