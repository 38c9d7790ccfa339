#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "graphx/error.hpp"
#include "graphx/graph.hpp"

namespace graphx {

/// Degree-normalized graph gradient K: node functions -> edge functions,
///   (Ku)_e = w_ij (u_i / d_i - u_j / d_j),  e = (i, j), i < j.
/// Its adjoint K^T scatters w_ij z_e / d_i onto i (+) and d_j onto j (-).
/// The total variation is |Ku|_1. Holds a non-owning reference: the graph
/// must outlive the operator.
class NormalizedGradient {
public:
    explicit NormalizedGradient(const Graph& graph) : graph_(&graph) {}

    const Graph& graph() const noexcept { return *graph_; }
    std::size_t nodes() const noexcept { return graph_->nodes(); }
    std::size_t edges() const noexcept { return graph_->edge_count(); }

    void apply(std::span<const double> u, std::span<double> out) const {
        check(u.size(), nodes(), "node vector");
        check(out.size(), edges(), "edge vector");
        const auto& d = graph_->degrees();
        const auto& es = graph_->edges();
        for (std::size_t e = 0; e < es.size(); ++e) {
            const auto& [i, j, w] = es[e];
            out[e] = w * (u[i] / d[i] - u[j] / d[j]);
        }
    }

    void apply_adjoint(std::span<const double> z, std::span<double> out) const {
        check(z.size(), edges(), "edge vector");
        check(out.size(), nodes(), "node vector");
        const auto& d = graph_->degrees();
        const auto& es = graph_->edges();
        std::fill(out.begin(), out.end(), 0.0);
        for (std::size_t e = 0; e < es.size(); ++e) {
            const auto& [i, j, w] = es[e];
            out[i] += w * z[e];
            out[j] -= w * z[e];
        }
        for (std::size_t i = 0; i < out.size(); ++i) out[i] /= d[i];
    }

    double total_variation(std::span<const double> u) const {
        check(u.size(), nodes(), "node vector");
        const auto& d = graph_->degrees();
        double tv = 0.0;
        for (const auto& [i, j, w] : graph_->edges()) tv += w * std::abs(u[i] / d[i] - u[j] / d[j]);
        return tv;
    }

private:
    static void check(std::size_t got, std::size_t want, const char* what) {
        if (got != want) {
            throw Error(ErrorKind::DimensionMismatch,
                        std::string(what) + " has length " + std::to_string(got) +
                            ", expected " + std::to_string(want));
        }
    }

    const Graph* graph_;
};

inline std::vector<double> apply_gradient(const NormalizedGradient& K, std::span<const double> u) {
    std::vector<double> out(K.edges());
    K.apply(u, out);
    return out;
}

inline std::vector<double> apply_divergence(const NormalizedGradient& K, std::span<const double> z) {
    std::vector<double> out(K.nodes());
    K.apply_adjoint(z, out);
    return out;
}

inline double total_variation(const NormalizedGradient& K, std::span<const double> u) {
    return K.total_variation(u);
}

/// Power iteration on K^T K. Returns sqrt(lambda_max) once the Rayleigh
/// estimate changes by less than `tol` (relative); throws NoConvergence with
/// the last estimate in Error::value() otherwise.
inline double operator_norm(const NormalizedGradient& K, std::size_t iters = 1000,
                            double tol = 1e-12, std::uint64_t seed = 0x5eed) {
    const std::size_t n = K.nodes();
    require(n > 0 && K.edges() > 0, ErrorKind::InvalidArgument, "operator norm of empty graph");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    std::vector<double> x(n), y(n), ke(K.edges());
    for (auto& v : x) v = unif(rng);

    auto normalize = [](std::vector<double>& v) {
        double s = 0.0;
        for (double a : v) s += a * a;
        s = std::sqrt(s);
        for (double& a : v) a /= s;
        return s;
    };
    normalize(x);
    double lambda = 0.0;
    for (std::size_t it = 0; it < iters; ++it) {
        K.apply(x, ke);
        K.apply_adjoint(ke, y);
        double rayleigh = 0.0;
        for (std::size_t i = 0; i < n; ++i) rayleigh += x[i] * y[i];
        const double norm_y = normalize(y);
        std::swap(x, y);
        if (norm_y == 0.0) return 0.0;
        if (it > 0 && std::abs(rayleigh - lambda) <= tol * rayleigh) return std::sqrt(rayleigh);
        lambda = rayleigh;
    }
    throw Error(ErrorKind::NoConvergence, "power iteration did not converge", iters,
                std::sqrt(lambda));
}

} // namespace graphx
