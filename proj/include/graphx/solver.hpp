#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "graphx/error.hpp"
#include "graphx/gradient.hpp"
#include "graphx/graph.hpp"

namespace graphx {

/// Dense n x L matrix stored class-major, so every class column u^k is a
/// contiguous span.
class ScoreMatrix {
public:
    ScoreMatrix() = default;
    ScoreMatrix(std::size_t nodes, std::size_t classes, double fill = 0.0)
        : n_(nodes), L_(classes), data_(nodes * classes, fill) {}

    std::size_t nodes() const noexcept { return n_; }
    std::size_t classes() const noexcept { return L_; }

    double& operator()(std::size_t i, std::size_t k) noexcept { return data_[k * n_ + i]; }
    double operator()(std::size_t i, std::size_t k) const noexcept { return data_[k * n_ + i]; }

    std::span<double> column(std::size_t k) noexcept { return {data_.data() + k * n_, n_}; }
    std::span<const double> column(std::size_t k) const noexcept {
        return {data_.data() + k * n_, n_};
    }

    std::vector<double>& data() noexcept { return data_; }
    const std::vector<double>& data() const noexcept { return data_; }

    double frobenius_norm() const noexcept {
        double s = 0.0;
        for (double v : data_) s += v * v;
        return std::sqrt(s);
    }

    friend bool operator==(const ScoreMatrix&, const ScoreMatrix&) = default;

private:
    std::size_t n_ = 0;
    std::size_t L_ = 0;
    std::vector<double> data_;
};

/// Seed sets I_k with margin epsilon. Validated on construction: classes
/// nonempty and pairwise disjoint, indices in range, 0 < epsilon <= 1.
class LabelConstraints {
public:
    static constexpr int unlabeled = -1;

    LabelConstraints() = default;

    LabelConstraints(std::size_t n, std::vector<std::vector<std::size_t>> seeds, double epsilon)
        : n_(n), epsilon_(epsilon), seeds_(std::move(seeds)), class_of_(n, unlabeled) {
        require(seeds_.size() >= 2, ErrorKind::InvalidArgument, "need at least 2 classes");
        require(epsilon_ > 0.0 && epsilon_ <= 1.0, ErrorKind::InvalidArgument,
                "epsilon must lie in (0, 1]");
        for (std::size_t k = 0; k < seeds_.size(); ++k) {
            if (seeds_[k].empty()) {
                throw Error(ErrorKind::EmptyClass, "class " + std::to_string(k) + " has no seeds",
                            k);
            }
            std::sort(seeds_[k].begin(), seeds_[k].end());
            for (std::size_t i : seeds_[k]) {
                require(i < n_, ErrorKind::InvalidArgument,
                        "seed index " + std::to_string(i) + " out of range");
                require(class_of_[i] == unlabeled, ErrorKind::InvalidArgument,
                        "node " + std::to_string(i) + " seeded more than once");
                class_of_[i] = static_cast<int>(k);
            }
        }
    }

    /// From (node, class) pairs; classes are 0..L-1.
    static LabelConstraints from_pairs(std::size_t n, std::size_t L,
                                       std::span<const std::pair<std::size_t, std::size_t>> pairs,
                                       double epsilon) {
        std::vector<std::vector<std::size_t>> seeds(L);
        for (const auto& [node, cls] : pairs) {
            require(cls < L, ErrorKind::InvalidArgument,
                    "class id " + std::to_string(cls) + " >= class count");
            seeds[cls].push_back(node);
        }
        return LabelConstraints(n, std::move(seeds), epsilon);
    }

    std::size_t nodes() const noexcept { return n_; }
    std::size_t classes() const noexcept { return seeds_.size(); }
    double epsilon() const noexcept { return epsilon_; }
    const std::vector<std::size_t>& seeds(std::size_t k) const noexcept { return seeds_[k]; }
    /// Seeded class of node i, or `unlabeled`.
    int class_of(std::size_t i) const noexcept { return class_of_[i]; }
    bool is_seed(std::size_t i) const noexcept { return class_of_[i] != unlabeled; }

    std::size_t seed_count() const noexcept {
        std::size_t c = 0;
        for (const auto& s : seeds_) c += s.size();
        return c;
    }

private:
    std::size_t n_ = 0;
    double epsilon_ = 0.1;
    std::vector<std::vector<std::size_t>> seeds_;
    std::vector<int> class_of_;
};

enum class StepRule {
    paper,       // sigma0 * tau0 < 4
    safeguarded, // sigma0 * tau0 * |K|^2 < 1
};

enum class Acceleration {
    paper,    // gamma = 1 / sqrt(1 + tau / dt)
    standard, // gamma = 1 / sqrt(1 + 2 tau / dt)
};

enum class InitMode {
    diffusion, // seed margins spread by a lazy random walk
    seeds,     // unlabeled entries start at 0
    random,    // unlabeled entries uniform(-1, 1)
};

enum class ShiftMode {
    median,        // u^k - median(u^k)
    degree_median, // u^k - m d, m the degree-weighted median of u^k_i / d_i
    none,
};

struct SolverConfig {
    double dt = 1.0;
    double sigma0 = 1.9;
    double tau0 = 1.9;
    std::size_t inner_max = 2000;
    double inner_tol = 1e-8;
    std::size_t outer_max = 100;
    double outer_tol = 1e-6;
    std::uint64_t seed = 42;
    StepRule step_rule = StepRule::paper;
    Acceleration acceleration = Acceleration::paper;
    double zero_guard = 1e-12;
    InitMode init = InitMode::diffusion;
    std::size_t diffusion_steps = 30;
    ShiftMode shift = ShiftMode::median;
    /// Use Proj_C(u) rather than u as the anchor v of each outer step.
    bool project_start = true;
};

struct MultiClassState {
    ScoreMatrix u;             // current primal iterate
    ScoreMatrix z;             // per-class dual edge variables (|E| x L)
    ScoreMatrix u_extrapolated;
    ScoreMatrix v;             // u^(t), snapshot at the start of the outer step
};

struct InnerReport {
    std::size_t iterations = 0;
    double residual = 0.0;
    bool converged = false;
};

struct OuterRecord {
    std::vector<double> ratios_before;   // ratios of v = u^(t) (the c^k)
    std::vector<double> ratios_prestep;  // ratios of the inner-loop output
    std::vector<double> ratios;          // after median shift + normalization
    std::vector<double> decrease_slack;  // c^k |u^k|_1 - TV(u^k), pre-shift
    double ratio_sum = 0.0;              // sum of `ratios`
    std::size_t inner_iters = 0;
    double residual = 0.0;
    double max_violation = 0.0;   // constraint violation of the inner-loop output
    double shift_violation = 0.0; // constraint violation after the median shift
    double wall_ms = 0.0;
};

struct SolveTrace {
    std::vector<double> initial_ratios;
    std::vector<OuterRecord> records;
    bool converged = false;
    std::vector<std::string> warnings;
};

struct Prediction {
    std::vector<std::size_t> labels;
    ScoreMatrix scores;
    std::vector<bool> ties;
};

// ---------------------------------------------------------------------------
// Elementary pieces.

/// Delta_1(u) / max(|u|_1, zero_guard).
inline double ratio(const NormalizedGradient& K, std::span<const double> u,
                    double zero_guard = 1e-12) {
    double l1 = 0.0;
    for (double x : u) l1 += std::abs(x);
    return K.total_variation(u) / std::max(l1, zero_guard);
}

namespace detail {

inline double sign(double x) noexcept { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

inline double median(std::span<const double> values) {
    std::vector<double> tmp(values.begin(), values.end());
    const std::size_t m = tmp.size() / 2;
    std::nth_element(tmp.begin(), tmp.begin() + static_cast<std::ptrdiff_t>(m), tmp.end());
    const double upper = tmp[m];
    if (tmp.size() % 2 == 1) return upper;
    const double lower = *std::max_element(tmp.begin(), tmp.begin() + static_cast<std::ptrdiff_t>(m));
    return 0.5 * (lower + upper);
}

inline void check_finite(const ScoreMatrix& m, std::size_t iteration) {
    for (double x : m.data()) {
        if (!std::isfinite(x)) {
            throw Error(ErrorKind::NonFinite,
                        "non-finite iterate at inner iteration " + std::to_string(iteration),
                        iteration);
        }
    }
}

inline void require_shape(const ScoreMatrix& u, const LabelConstraints& c) {
    require(u.nodes() == c.nodes() && u.classes() == c.classes(), ErrorKind::ShapeMismatch,
            "score matrix shape does not match constraints");
}

} // namespace detail

/// Projection onto C, row by row: seeded rows are clamped (own class to
/// >= eps, other classes to <= -eps); unlabeled rows have their class mean
/// removed.
inline void project_constraints_inplace(ScoreMatrix& u, const LabelConstraints& c) {
    detail::require_shape(u, c);
    const std::size_t L = u.classes();
    const double eps = c.epsilon();
    for (std::size_t i = 0; i < u.nodes(); ++i) {
        const int own = c.class_of(i);
        if (own == LabelConstraints::unlabeled) {
            double mean = 0.0;
            for (std::size_t k = 0; k < L; ++k) mean += u(i, k);
            mean /= static_cast<double>(L);
            for (std::size_t k = 0; k < L; ++k) u(i, k) -= mean;
        } else {
            for (std::size_t k = 0; k < L; ++k) {
                u(i, k) = static_cast<int>(k) == own ? std::max(u(i, k), eps)
                                                     : std::min(u(i, k), -eps);
            }
        }
    }
}

inline ScoreMatrix project_constraints(ScoreMatrix u, const LabelConstraints& c) {
    project_constraints_inplace(u, c);
    return u;
}

/// Largest violation of the seed margins and of the zero class-sum coupling.
inline double constraint_violation(const ScoreMatrix& u, const LabelConstraints& c) {
    detail::require_shape(u, c);
    const double eps = c.epsilon();
    double worst = 0.0;
    for (std::size_t i = 0; i < u.nodes(); ++i) {
        const int own = c.class_of(i);
        if (own == LabelConstraints::unlabeled) {
            double sum = 0.0;
            for (std::size_t k = 0; k < u.classes(); ++k) sum += u(i, k);
            worst = std::max(worst, std::abs(sum));
            continue;
        }
        for (std::size_t k = 0; k < u.classes(); ++k) {
            const double gap = static_cast<int>(k) == own ? eps - u(i, k) : u(i, k) + eps;
            worst = std::max(worst, gap);
        }
    }
    return worst;
}

namespace detail {

/// Weighted median: smallest x_i whose cumulative weight reaches half the
/// total (midpoint when it lands exactly on half).
inline double weighted_median(std::span<const double> values, std::span<const double> weights) {
    std::vector<std::size_t> order(values.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return values[a] != values[b] ? values[a] < values[b] : a < b;
    });
    const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
    double acc = 0.0;
    for (std::size_t r = 0; r < order.size(); ++r) {
        acc += weights[order[r]];
        if (acc == 0.5 * total && r + 1 < order.size()) {
            return 0.5 * (values[order[r]] + values[order[r + 1]]);
        }
        if (acc > 0.5 * total) return values[order[r]];
    }
    return values[order.back()];
}

} // namespace detail

/// Re-centres every class column and divides the whole matrix by its
/// Frobenius norm. `degrees` is only read by ShiftMode::degree_median.
inline void shift_and_normalize(ScoreMatrix& u, ShiftMode mode = ShiftMode::median,
                                std::span<const double> degrees = {}) {
    const std::size_t n = u.nodes();
    std::vector<double> normalized(n);
    for (std::size_t k = 0; k < u.classes(); ++k) {
        auto col = u.column(k);
        switch (mode) {
        case ShiftMode::median: {
            const double m = detail::median(col);
            for (double& x : col) x -= m;
            break;
        }
        case ShiftMode::degree_median: {
            require(degrees.size() == n, ErrorKind::DimensionMismatch,
                    "degree-median shift needs the degree vector");
            for (std::size_t i = 0; i < n; ++i) normalized[i] = col[i] / degrees[i];
            const double m = detail::weighted_median(normalized, degrees);
            for (std::size_t i = 0; i < n; ++i) col[i] -= m * degrees[i];
            break;
        }
        case ShiftMode::none: break;
        }
    }
    const double norm = u.frobenius_norm();
    if (!(norm >= 1e-14)) {
        throw Error(ErrorKind::DegenerateState, "state collapsed to zero after median shift");
    }
    for (double& x : u.data()) x /= norm;
}

inline std::vector<double> class_ratios(const NormalizedGradient& K, const ScoreMatrix& u,
                                        double zero_guard) {
    std::vector<double> r(u.classes());
    for (std::size_t k = 0; k < u.classes(); ++k) r[k] = ratio(K, u.column(k), zero_guard);
    return r;
}

/// Resets the dual block to z^k = clamp(K u^k, [-1, 1]).
inline void reset_dual(const NormalizedGradient& K, MultiClassState& s) {
    const std::size_t L = s.u.classes();
    s.z = ScoreMatrix(K.edges(), L);
    for (std::size_t k = 0; k < L; ++k) {
        auto zk = s.z.column(k);
        K.apply(s.u.column(k), zk);
        for (double& x : zk) x = std::clamp(x, -1.0, 1.0);
    }
}

inline void validate_config(const SolverConfig& cfg, const NormalizedGradient& K) {
    require(cfg.dt > 0.0, ErrorKind::InvalidArgument, "dt must be positive");
    require(cfg.sigma0 > 0.0 && cfg.tau0 > 0.0, ErrorKind::InvalidArgument,
            "sigma0 and tau0 must be positive");
    require(cfg.inner_max >= 1 && cfg.outer_max >= 1, ErrorKind::InvalidArgument,
            "iteration limits must be >= 1");
    require(cfg.zero_guard > 0.0, ErrorKind::InvalidArgument, "zero_guard must be positive");
    const double product = cfg.sigma0 * cfg.tau0;
    if (cfg.step_rule == StepRule::paper) {
        require(product < 4.0, ErrorKind::InvalidArgument, "step rule requires sigma0*tau0 < 4");
    } else {
        double norm = 0.0;
        try {
            norm = operator_norm(K);
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::NoConvergence) throw;
            // Power iteration under-estimates; pad the last estimate.
            norm = 1.05 * e.value().value_or(0.0);
        }
        require(product * norm * norm < 1.0, ErrorKind::InvalidArgument,
                "safeguarded step rule requires sigma0*tau0*|K|^2 < 1 (|K| = " +
                    std::to_string(norm) + ")");
    }
}

/// Largest step pair with sigma0 = tau0 that satisfies the safeguarded rule
/// with a 1% margin.
inline double safeguarded_step(const NormalizedGradient& K) {
    double norm = 0.0;
    try {
        norm = operator_norm(K);
    } catch (const Error& e) {
        if (e.kind() != ErrorKind::NoConvergence) throw;
        norm = 1.05 * e.value().value_or(0.0);
    }
    return 0.99 / norm;
}

// ---------------------------------------------------------------------------
// Solver stages.

namespace detail {

/// F <- (F + D^-1 W F) / 2 on unlabeled rows, seed rows held fixed.
inline void diffuse_seeds(ScoreMatrix& u, const Graph& graph, const LabelConstraints& constraints,
                          std::size_t steps) {
    const std::size_t n = u.nodes();
    const auto& rp = graph.row_ptr();
    const auto& ci = graph.col_idx();
    const auto& w = graph.weights();
    const auto& deg = graph.degrees();
    ScoreMatrix next = u;
    for (std::size_t step = 0; step < steps; ++step) {
        for (std::size_t k = 0; k < u.classes(); ++k) {
            for (std::size_t i = 0; i < n; ++i) {
                if (constraints.is_seed(i)) continue;
                double acc = 0.0;
                for (std::size_t p = rp[i]; p < rp[i + 1]; ++p) acc += w[p] * u(ci[p], k);
                next(i, k) = 0.5 * (u(i, k) + acc / deg[i]);
            }
        }
        std::swap(u, next);
    }
}

} // namespace detail

/// u^(0): seed rows at +eps (own class) / -eps (others); unlabeled rows per
/// `config.init`; then projection onto C, shift and normalization. The dual
/// block starts at clamp(K u^k). Deterministic for a fixed config.
inline MultiClassState initialize_state(const Graph& graph, const LabelConstraints& constraints,
                                        const SolverConfig& config) {
    require(constraints.nodes() == graph.nodes(), ErrorKind::ShapeMismatch,
            "constraints cover " + std::to_string(constraints.nodes()) + " nodes, graph has " +
                std::to_string(graph.nodes()));
    const std::size_t n = graph.nodes();
    const std::size_t L = constraints.classes();
    const double eps = constraints.epsilon();

    MultiClassState s;
    s.u = ScoreMatrix(n, L);
    std::mt19937_64 rng(config.seed);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    for (std::size_t i = 0; i < n; ++i) {
        const int own = constraints.class_of(i);
        for (std::size_t k = 0; k < L; ++k) {
            if (own != LabelConstraints::unlabeled) {
                s.u(i, k) = static_cast<int>(k) == own ? eps : -eps;
            } else if (config.init == InitMode::random) {
                s.u(i, k) = unif(rng);
            }
        }
    }
    if (config.init == InitMode::diffusion) {
        detail::diffuse_seeds(s.u, graph, constraints, config.diffusion_steps);
    }
    project_constraints_inplace(s.u, constraints);
    shift_and_normalize(s.u, config.shift, graph.degrees());

    const NormalizedGradient K(graph);
    reset_dual(K, s);
    s.u_extrapolated = s.u;
    s.v = s.u;
    return s;
}

/// Accelerated primal-dual solve of the proximal ratio step
///   min_{u in C}  |u - v|^2 / (2 dt) + sum_k ( TV(u^k) - c^k <sign(v^k), u^k> )
/// with v = state.v and c^k = TV(v^k) / max(|v^k|_1, zero_guard). Starts from
/// state.u and state.z as given (normally u = v and z = clamp(K v)).
inline InnerReport inner_primal_dual(MultiClassState& state, const NormalizedGradient& K,
                                     const LabelConstraints& constraints,
                                     const SolverConfig& config) {
    const std::size_t n = state.u.nodes();
    const std::size_t L = state.u.classes();
    const std::size_t m = K.edges();
    detail::require_shape(state.u, constraints);
    require(state.v.nodes() == n && state.v.classes() == L && state.z.nodes() == m &&
                state.z.classes() == L,
            ErrorKind::ShapeMismatch, "state blocks have inconsistent shapes");

    const double dt = config.dt;
    ScoreMatrix linear(n, L); // c^k sign(v^k)
    for (std::size_t k = 0; k < L; ++k) {
        const double c = ratio(K, state.v.column(k), config.zero_guard);
        const auto vk = state.v.column(k);
        auto lk = linear.column(k);
        for (std::size_t i = 0; i < n; ++i) lk[i] = c * detail::sign(vk[i]);
    }

    state.u_extrapolated = state.u;
    ScoreMatrix previous = state.u;
    std::vector<double> edge_buf(m), node_buf(n);
    double tau = config.tau0;
    double sigma = config.sigma0;
    InnerReport report;

    for (std::size_t iter = 0; iter < config.inner_max; ++iter) {
        previous.data() = state.u.data();
        const double a = tau / dt;
        for (std::size_t k = 0; k < L; ++k) {
            auto zk = state.z.column(k);
            K.apply(state.u_extrapolated.column(k), edge_buf);
            for (std::size_t e = 0; e < m; ++e) {
                const double zn = zk[e] + sigma * edge_buf[e];
                zk[e] = zn / std::max(1.0, std::abs(zn));
            }
            // prox of tau * (|u - v|^2 / 2dt - <c sign(v), u>) at u - tau K^T z
            K.apply_adjoint(zk, node_buf);
            auto uk = state.u.column(k);
            const auto vk = state.v.column(k);
            const auto lk = linear.column(k);
            for (std::size_t i = 0; i < n; ++i) {
                uk[i] = (uk[i] - tau * node_buf[i] + a * vk[i] + tau * lk[i]) / (1.0 + a);
            }
        }
        project_constraints_inplace(state.u, constraints);

        const double gamma = config.acceleration == Acceleration::paper
                                 ? 1.0 / std::sqrt(1.0 + tau / dt)
                                 : 1.0 / std::sqrt(1.0 + 2.0 * tau / dt);
        tau *= gamma;
        sigma /= gamma;

        double diff = 0.0;
        double prev_norm = 0.0;
        auto& ue = state.u_extrapolated.data();
        const auto& un = state.u.data();
        const auto& up = previous.data();
        for (std::size_t t = 0; t < un.size(); ++t) {
            const double delta = un[t] - up[t];
            ue[t] = un[t] + gamma * delta;
            diff += delta * delta;
            prev_norm += up[t] * up[t];
        }
        detail::check_finite(state.u, iter);
        detail::check_finite(state.z, iter);

        report.iterations = iter + 1;
        report.residual = std::sqrt(diff) / std::max(std::sqrt(prev_norm), 1e-30);
        if (report.residual < config.inner_tol) {
            report.converged = true;
            break;
        }
    }
    return report;
}

/// One outer step: v <- Proj_C(u) (or u), c^k from v, inner solve from
/// (u, z) = (v, clamp(K v)), then shift and normalization. `state.u` ends
/// with unit norm; `feasible`, when given, receives the pre-shift inner
/// output (a point of C).
inline OuterRecord outer_step(MultiClassState& state, const NormalizedGradient& K,
                              const LabelConstraints& constraints, const SolverConfig& config,
                              ScoreMatrix* feasible = nullptr) {
    const auto start = std::chrono::steady_clock::now();
    const std::size_t L = state.u.classes();
    OuterRecord rec;

    if (config.project_start) project_constraints_inplace(state.u, constraints);
    state.v = state.u;
    rec.ratios_before = class_ratios(K, state.v, config.zero_guard);
    reset_dual(K, state);
    const InnerReport inner = inner_primal_dual(state, K, constraints, config);
    rec.inner_iters = inner.iterations;
    rec.residual = inner.residual;
    rec.max_violation = constraint_violation(state.u, constraints);

    rec.ratios_prestep = class_ratios(K, state.u, config.zero_guard);
    rec.decrease_slack.resize(L);
    for (std::size_t k = 0; k < L; ++k) {
        const auto uk = state.u.column(k);
        double l1 = 0.0;
        for (double x : uk) l1 += std::abs(x);
        rec.decrease_slack[k] = rec.ratios_before[k] * l1 - K.total_variation(uk);
    }
    if (feasible) *feasible = state.u;

    shift_and_normalize(state.u, config.shift, K.graph().degrees());
    rec.shift_violation = constraint_violation(state.u, constraints);
    rec.ratios = class_ratios(K, state.u, config.zero_guard);
    for (double r : rec.ratios) rec.ratio_sum += r;
    rec.wall_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    return rec;
}

/// Argmax over classes; ties (top two within 1e-12) go to the lower class
/// index and are flagged.
inline Prediction predict(const ScoreMatrix& scores) {
    Prediction p;
    const std::size_t n = scores.nodes();
    p.labels.resize(n);
    p.ties.assign(n, false);
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t best = 0;
        for (std::size_t k = 1; k < scores.classes(); ++k) {
            if (scores(i, k) > scores(i, best)) best = k;
        }
        for (std::size_t k = 0; k < scores.classes(); ++k) {
            if (k != best && std::abs(scores(i, best) - scores(i, k)) < 1e-12) p.ties[i] = true;
        }
        p.labels[i] = best;
    }
    p.scores = scores;
    return p;
}

struct SolveResult {
    Prediction prediction;
    SolveTrace trace;
    MultiClassState state;
};

/// Outer iterations until the post-step ratio sum moves by less than
/// outer_tol, or outer_max. Labels and scores come from the last inner-loop
/// output, which lies in C, so every seed keeps its class.
inline SolveResult solve(const Graph& graph, const LabelConstraints& constraints,
                         const SolverConfig& config) {
    const NormalizedGradient K(graph);
    validate_config(config, K);

    SolveResult result;
    result.state = initialize_state(graph, constraints, config);
    auto& trace = result.trace;
    trace.initial_ratios = class_ratios(K, result.state.u, config.zero_guard);

    double previous_sum = 0.0;
    for (double r : trace.initial_ratios) previous_sum += r;
    ScoreMatrix feasible;
    for (std::size_t t = 0; t < config.outer_max; ++t) {
        trace.records.push_back(outer_step(result.state, K, constraints, config, &feasible));
        const double sum = trace.records.back().ratio_sum;
        if (std::abs(sum - previous_sum) < config.outer_tol) {
            trace.converged = true;
            if (t == 0) trace.warnings.push_back("NoProgress: ratios stagnated on the first step");
            break;
        }
        previous_sum = sum;
    }
    result.prediction = predict(feasible);
    return result;
}

} // namespace graphx
