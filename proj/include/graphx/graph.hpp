#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "graphx/error.hpp"

namespace graphx {

/// n x d feature vectors, row-major, one row per graph node.
class FeatureMatrix {
public:
    FeatureMatrix() = default;

    FeatureMatrix(std::size_t n, std::size_t d, std::vector<double> values)
        : n_(n), d_(d), values_(std::move(values)) {
        require(n_ >= 2, ErrorKind::InvalidArgument, "feature matrix needs at least 2 rows");
        require(d_ >= 1, ErrorKind::InvalidArgument, "feature matrix needs at least 1 column");
        require(values_.size() == n_ * d_, ErrorKind::ShapeMismatch,
                "feature storage does not match n*d");
        for (std::size_t i = 0; i < values_.size(); ++i) {
            if (!std::isfinite(values_[i])) {
                throw Error(ErrorKind::NonFiniteValue,
                            "non-finite feature in row " + std::to_string(i / d_), i / d_);
            }
        }
    }

    std::size_t rows() const noexcept { return n_; }
    std::size_t cols() const noexcept { return d_; }

    std::span<const double> row(std::size_t i) const noexcept {
        return {values_.data() + i * d_, d_};
    }
    double operator()(std::size_t i, std::size_t j) const noexcept { return values_[i * d_ + j]; }
    const std::vector<double>& values() const noexcept { return values_; }

private:
    std::size_t n_ = 0;
    std::size_t d_ = 0;
    std::vector<double> values_;
};

enum class Metric { euclidean, cosine };
enum class Kernel { gaussian, binary };
enum class Symmetrization { mean, max };

struct KernelSpec {
    Metric metric = Metric::euclidean;
    Kernel kernel = Kernel::gaussian;
    /// Gaussian bandwidth; <= 0 (or unset) selects the automatic rule.
    double sigma = 0.0;
    bool sigma_auto = true;
    std::size_t k = 10;
    Symmetrization symmetrization = Symmetrization::mean;
};

/// Undirected edge in canonical orientation (i < j).
struct Edge {
    std::size_t i;
    std::size_t j;
    double weight;

    friend bool operator==(const Edge&, const Edge&) = default;
};

/// Symmetric weighted graph in CSR form with cached degrees and a canonical
/// edge list. Immutable once built; every constructor path validates:
/// symmetric weights, no self loops, non-negative weights, positive degrees.
class Graph {
public:
    Graph() = default;

    /// Builds from undirected edges given in either orientation. Zero-weight
    /// edges are dropped; duplicate pairs and self loops are rejected.
    static Graph from_edges(std::size_t n, std::vector<Edge> edges) {
        require(n >= 2, ErrorKind::InvalidGraph, "graph needs at least 2 nodes");
        for (auto& e : edges) {
            require(e.i < n && e.j < n, ErrorKind::InvalidGraph, "edge endpoint out of range");
            require(e.i != e.j, ErrorKind::InvalidGraph,
                    "self loop at node " + std::to_string(e.i));
            require(std::isfinite(e.weight) && e.weight >= 0.0, ErrorKind::InvalidGraph,
                    "edge weights must be finite and non-negative");
            if (e.i > e.j) std::swap(e.i, e.j);
        }
        std::erase_if(edges, [](const Edge& e) { return e.weight == 0.0; });
        std::sort(edges.begin(), edges.end(), [](const Edge& a, const Edge& b) {
            return a.i != b.i ? a.i < b.i : a.j < b.j;
        });
        for (std::size_t e = 1; e < edges.size(); ++e) {
            require(!(edges[e].i == edges[e - 1].i && edges[e].j == edges[e - 1].j),
                    ErrorKind::InvalidGraph,
                    "duplicate edge (" + std::to_string(edges[e].i) + "," +
                        std::to_string(edges[e].j) + ")");
        }

        Graph g;
        g.n_ = n;
        g.edges_ = std::move(edges);
        std::vector<std::size_t> count(n, 0);
        for (const auto& e : g.edges_) {
            ++count[e.i];
            ++count[e.j];
        }
        g.row_ptr_.assign(n + 1, 0);
        for (std::size_t i = 0; i < n; ++i) g.row_ptr_[i + 1] = g.row_ptr_[i] + count[i];
        g.col_idx_.resize(g.row_ptr_[n]);
        g.weights_.resize(g.row_ptr_[n]);
        std::vector<std::size_t> cursor(g.row_ptr_.begin(), g.row_ptr_.end() - 1);
        // Edges are sorted by (i, j), so filling (j -> i) entries first for a
        // row and (i -> j) afterwards yields sorted columns per row.
        std::vector<std::vector<std::pair<std::size_t, double>>> lower(n);
        for (const auto& e : g.edges_) lower[e.j].emplace_back(e.i, e.weight);
        for (std::size_t r = 0; r < n; ++r) {
            for (const auto& [c, w] : lower[r]) {
                g.col_idx_[cursor[r]] = c;
                g.weights_[cursor[r]++] = w;
            }
        }
        for (const auto& e : g.edges_) {
            g.col_idx_[cursor[e.i]] = e.j;
            g.weights_[cursor[e.i]++] = e.weight;
        }
        g.compute_degrees();
        return g;
    }

    /// Builds from raw CSR arrays (as read from disk) and validates every
    /// invariant. `degrees`, when non-empty, must agree with the row sums.
    static Graph from_csr(std::size_t n, std::vector<std::size_t> row_ptr,
                          std::vector<std::size_t> col_idx, std::vector<double> weights,
                          std::span<const double> degrees = {}) {
        require(n >= 2, ErrorKind::InvalidGraph, "graph needs at least 2 nodes");
        require(row_ptr.size() == n + 1, ErrorKind::InvalidGraph, "row pointer length != n+1");
        require(row_ptr.front() == 0 && row_ptr.back() == col_idx.size() &&
                    col_idx.size() == weights.size(),
                ErrorKind::InvalidGraph, "inconsistent CSR array lengths");
        for (std::size_t r = 0; r < n; ++r) {
            require(row_ptr[r] <= row_ptr[r + 1], ErrorKind::InvalidGraph,
                    "row pointers must be non-decreasing");
            for (std::size_t p = row_ptr[r]; p < row_ptr[r + 1]; ++p) {
                require(col_idx[p] < n, ErrorKind::InvalidGraph, "column index out of range");
                require(col_idx[p] != r, ErrorKind::InvalidGraph,
                        "self loop at node " + std::to_string(r));
                require(p == row_ptr[r] || col_idx[p - 1] < col_idx[p], ErrorKind::InvalidGraph,
                        "columns must be strictly increasing within a row");
                require(std::isfinite(weights[p]) && weights[p] > 0.0, ErrorKind::InvalidGraph,
                        "stored weights must be finite and positive");
            }
        }

        Graph g;
        g.n_ = n;
        g.row_ptr_ = std::move(row_ptr);
        g.col_idx_ = std::move(col_idx);
        g.weights_ = std::move(weights);
        for (std::size_t r = 0; r < n; ++r) {
            for (std::size_t p = g.row_ptr_[r]; p < g.row_ptr_[r + 1]; ++p) {
                const std::size_t c = g.col_idx_[p];
                const double w = g.weight(c, r);
                require(w == g.weights_[p], ErrorKind::InvalidGraph,
                        "asymmetric weight at (" + std::to_string(r) + "," + std::to_string(c) +
                            ")");
                if (r < c) g.edges_.push_back({r, c, g.weights_[p]});
            }
        }
        g.compute_degrees();
        if (!degrees.empty()) {
            require(degrees.size() == n, ErrorKind::InvalidGraph, "degree array length != n");
            for (std::size_t i = 0; i < n; ++i) {
                require(degrees[i] == g.degrees_[i], ErrorKind::InvalidGraph,
                        "stored degree of node " + std::to_string(i) + " disagrees with row sum");
            }
        }
        return g;
    }

    std::size_t nodes() const noexcept { return n_; }
    std::size_t edge_count() const noexcept { return edges_.size(); }
    std::size_t nnz() const noexcept { return col_idx_.size(); }

    const std::vector<std::size_t>& row_ptr() const noexcept { return row_ptr_; }
    const std::vector<std::size_t>& col_idx() const noexcept { return col_idx_; }
    const std::vector<double>& weights() const noexcept { return weights_; }
    const std::vector<double>& degrees() const noexcept { return degrees_; }
    const std::vector<Edge>& edges() const noexcept { return edges_; }

    std::span<const std::size_t> neighbors(std::size_t i) const noexcept {
        return {col_idx_.data() + row_ptr_[i], row_ptr_[i + 1] - row_ptr_[i]};
    }

    /// w_ij, or 0 when (i, j) is not an edge.
    double weight(std::size_t i, std::size_t j) const noexcept {
        const auto first = col_idx_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[i]);
        const auto last = col_idx_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[i + 1]);
        const auto it = std::lower_bound(first, last, j);
        if (it == last || *it != j) return 0.0;
        return weights_[static_cast<std::size_t>(it - col_idx_.begin())];
    }

    /// Copy with every weight multiplied by `alpha` > 0.
    Graph scaled(double alpha) const {
        require(alpha > 0.0 && std::isfinite(alpha), ErrorKind::InvalidArgument,
                "scale factor must be positive");
        std::vector<Edge> e = edges_;
        for (auto& x : e) x.weight *= alpha;
        return from_edges(n_, std::move(e));
    }

private:
    void compute_degrees() {
        degrees_.assign(n_, 0.0);
        for (std::size_t r = 0; r < n_; ++r) {
            double d = 0.0;
            for (std::size_t p = row_ptr_[r]; p < row_ptr_[r + 1]; ++p) d += weights_[p];
            degrees_[r] = d;
            if (!(d > 0.0)) {
                throw Error(ErrorKind::IsolatedNode,
                            "node " + std::to_string(r) + " has zero degree", r);
            }
        }
    }

    std::size_t n_ = 0;
    std::vector<std::size_t> row_ptr_;
    std::vector<std::size_t> col_idx_;
    std::vector<double> weights_;
    std::vector<double> degrees_;
    std::vector<Edge> edges_;
};

namespace detail {

inline double squared_euclidean(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t t = 0; t < a.size(); ++t) {
        const double diff = a[t] - b[t];
        s += diff * diff;
    }
    return s;
}

} // namespace detail

/// Exact k-nearest-neighbour graph. Neighbour ties are broken by the lower
/// node index, so the result is a deterministic function of (features, spec).
/// Gaussian weights are exp(-dist^2 / sigma^2); the automatic bandwidth is the
/// mean distance to the ceil(k/2)-th neighbour.
inline Graph build_knn_graph(const FeatureMatrix& features, const KernelSpec& spec) {
    const std::size_t n = features.rows();
    const std::size_t d = features.cols();
    require(spec.k >= 1, ErrorKind::InvalidArgument, "k must be >= 1");
    require(spec.k < n, ErrorKind::InvalidArgument, "k must be < n");
    if (spec.kernel == Kernel::gaussian && !spec.sigma_auto) {
        require(spec.sigma > 0.0 && std::isfinite(spec.sigma), ErrorKind::InvalidArgument,
                "sigma must be positive");
    }

    std::vector<double> norms;
    if (spec.metric == Metric::cosine) {
        norms.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            const auto r = features.row(i);
            norms[i] = std::sqrt(std::inner_product(r.begin(), r.end(), r.begin(), 0.0));
            if (norms[i] == 0.0) {
                throw Error(ErrorKind::DegenerateFeatures,
                            "cosine metric undefined for zero row " + std::to_string(i), i);
            }
        }
    }
    auto distance = [&](std::size_t i, std::size_t j) {
        const auto a = features.row(i);
        const auto b = features.row(j);
        if (spec.metric == Metric::euclidean) return std::sqrt(detail::squared_euclidean(a, b));
        double dot = 0.0;
        for (std::size_t t = 0; t < d; ++t) dot += a[t] * b[t];
        return std::max(0.0, 1.0 - dot / (norms[i] * norms[j]));
    };

    // neighbours[i] holds (distance, j) for the k nearest j != i, ascending.
    std::vector<std::vector<std::pair<double, std::size_t>>> neighbours(n);
    std::vector<std::pair<double, std::size_t>> candidates;
    candidates.reserve(n - 1);
    for (std::size_t i = 0; i < n; ++i) {
        candidates.clear();
        for (std::size_t j = 0; j < n; ++j) {
            if (j != i) candidates.emplace_back(distance(i, j), j);
        }
        std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(spec.k),
                          candidates.end());
        neighbours[i].assign(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(spec.k));
    }

    double sigma = spec.sigma;
    if (spec.kernel == Kernel::gaussian && spec.sigma_auto) {
        const std::size_t rank = (spec.k + 1) / 2; // ceil(k/2), 1-based
        double sum = 0.0;
        for (const auto& nb : neighbours) sum += nb[rank - 1].first;
        sigma = sum / static_cast<double>(n);
        if (!(sigma > 0.0)) {
            throw Error(ErrorKind::DegenerateFeatures,
                        "automatic bandwidth is zero (duplicate feature rows)");
        }
    }
    auto kernel_weight = [&](double dist) {
        if (spec.kernel == Kernel::binary) return 1.0;
        return std::exp(-(dist * dist) / (sigma * sigma));
    };

    // Directed weights keyed by canonical pair; each side recorded separately.
    struct Directed {
        std::size_t i, j;
        double forward;  // i -> j
        double backward; // j -> i
    };
    std::vector<Directed> pairs;
    pairs.reserve(n * spec.k);
    for (std::size_t i = 0; i < n; ++i) {
        for (const auto& [dist, j] : neighbours[i]) {
            const double w = kernel_weight(dist);
            if (i < j) pairs.push_back({i, j, w, 0.0});
            else pairs.push_back({j, i, 0.0, w});
        }
    }
    std::sort(pairs.begin(), pairs.end(), [](const Directed& a, const Directed& b) {
        return a.i != b.i ? a.i < b.i : a.j < b.j;
    });

    std::vector<Edge> edges;
    edges.reserve(pairs.size());
    for (std::size_t p = 0; p < pairs.size();) {
        double forward = pairs[p].forward;
        double backward = pairs[p].backward;
        std::size_t q = p + 1;
        while (q < pairs.size() && pairs[q].i == pairs[p].i && pairs[q].j == pairs[p].j) {
            forward = std::max(forward, pairs[q].forward);
            backward = std::max(backward, pairs[q].backward);
            ++q;
        }
        const double w = spec.symmetrization == Symmetrization::mean
                             ? 0.5 * (forward + backward)
                             : std::max(forward, backward);
        edges.push_back({pairs[p].i, pairs[p].j, w});
        p = q;
    }
    return Graph::from_edges(n, std::move(edges));
}

} // namespace graphx
