#pragma once

#include <array>
#include <cstdint>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "graphx/error.hpp"
#include "graphx/graph.hpp"
#include "graphx/solver.hpp"

namespace graphx {

inline constexpr std::string_view config_version = "graphx-run/1";

/// Everything that determines a CLI run. Serialized as canonical JSON (sorted
/// keys, every field present); parsing rejects unknown keys at every level.
struct RunConfig {
    std::string command;
    KernelSpec kernel;
    SolverConfig solver;
    double epsilon = 0.1;
    std::size_t classes = 0; // 0 infers max(class) + 1 from the labels file
    double labeled_fraction = 0.02;
    std::uint64_t partition_seed = 1;
    std::vector<double> fractions;
    std::vector<std::uint64_t> seeds;
    std::size_t jobs = 1;
    // Generator parameters (synth).
    std::string generator;
    std::size_t n = 500;
    double noise = 0.1;
    std::vector<std::size_t> sizes;
    double p_in = 0.5;
    double p_out = 0.02;
    std::uint64_t synth_seed = 1;
    /// Named input and output files, e.g. "graph", "labels", "scores".
    std::map<std::string, std::string> paths;
};

namespace detail {

template <typename E, std::size_t N>
std::string enum_name(E value, const std::array<std::pair<E, std::string_view>, N>& table) {
    for (const auto& [e, name] : table) {
        if (e == value) return std::string(name);
    }
    throw Error(ErrorKind::InvalidArgument, "unnamed enum value");
}

template <typename E, std::size_t N>
E enum_value(std::string_view name, const std::array<std::pair<E, std::string_view>, N>& table,
             std::string_view what) {
    for (const auto& [e, n] : table) {
        if (n == name) return e;
    }
    std::string options;
    for (const auto& [e, n] : table) options += (options.empty() ? "" : "|") + std::string(n);
    throw Error(ErrorKind::InvalidArgument,
                std::string(what) + ": unknown value '" + std::string(name) + "' (" + options +
                    ")");
}

inline constexpr std::array<std::pair<Metric, std::string_view>, 2> metric_names{
    {{Metric::euclidean, "euclidean"}, {Metric::cosine, "cosine"}}};
inline constexpr std::array<std::pair<Kernel, std::string_view>, 2> kernel_names{
    {{Kernel::gaussian, "gaussian"}, {Kernel::binary, "binary"}}};
inline constexpr std::array<std::pair<Symmetrization, std::string_view>, 2> symmetrize_names{
    {{Symmetrization::mean, "mean"}, {Symmetrization::max, "max"}}};
inline constexpr std::array<std::pair<StepRule, std::string_view>, 2> step_rule_names{
    {{StepRule::paper, "paper"}, {StepRule::safeguarded, "safeguarded"}}};
inline constexpr std::array<std::pair<Acceleration, std::string_view>, 2> acceleration_names{
    {{Acceleration::paper, "paper"}, {Acceleration::standard, "standard"}}};
inline constexpr std::array<std::pair<InitMode, std::string_view>, 3> init_names{
    {{InitMode::diffusion, "diffusion"}, {InitMode::seeds, "seeds"}, {InitMode::random, "random"}}};
inline constexpr std::array<std::pair<ShiftMode, std::string_view>, 3> shift_names{
    {{ShiftMode::median, "median"},
     {ShiftMode::degree_median, "degree-median"},
     {ShiftMode::none, "none"}}};

/// Reads `key` from `obj` into `out` when present, with a typed error naming
/// the key on mismatch.
template <typename T>
void read_key(const nlohmann::json& obj, const char* key, T& out) {
    const auto it = obj.find(key);
    if (it == obj.end()) return;
    try {
        out = it->template get<T>();
    } catch (const nlohmann::json::exception&) {
        throw Error(ErrorKind::InvalidArgument, std::string("config key '") + key +
                                                    "' has the wrong type");
    }
}

inline void reject_unknown(const nlohmann::json& obj, std::initializer_list<std::string_view> keys,
                           std::string_view where) {
    if (!obj.is_object()) {
        throw Error(ErrorKind::InvalidArgument, std::string(where) + " must be a JSON object");
    }
    for (const auto& item : obj.items()) {
        bool known = false;
        for (auto k : keys) known = known || k == item.key();
        if (!known) {
            throw Error(ErrorKind::InvalidArgument,
                        "unknown config key '" + std::string(where) + "." + item.key() + "'");
        }
    }
}

} // namespace detail

inline nlohmann::json to_json(const RunConfig& c) {
    using detail::enum_name;
    nlohmann::json kernel = {
        {"metric", enum_name(c.kernel.metric, detail::metric_names)},
        {"kernel", enum_name(c.kernel.kernel, detail::kernel_names)},
        {"k", c.kernel.k},
        {"symmetrize", enum_name(c.kernel.symmetrization, detail::symmetrize_names)},
    };
    if (c.kernel.sigma_auto) {
        kernel["sigma"] = "auto";
    } else {
        kernel["sigma"] = c.kernel.sigma;
    }
    const auto& s = c.solver;
    nlohmann::json solver = {
        {"dt", s.dt},
        {"sigma0", s.sigma0},
        {"tau0", s.tau0},
        {"inner_max", s.inner_max},
        {"inner_tol", s.inner_tol},
        {"outer_max", s.outer_max},
        {"outer_tol", s.outer_tol},
        {"seed", s.seed},
        {"step_rule", enum_name(s.step_rule, detail::step_rule_names)},
        {"acceleration", enum_name(s.acceleration, detail::acceleration_names)},
        {"zero_guard", s.zero_guard},
        {"init", enum_name(s.init, detail::init_names)},
        {"diffusion_steps", s.diffusion_steps},
        {"shift", enum_name(s.shift, detail::shift_names)},
        {"project_start", s.project_start},
    };
    return {
        {"version", config_version},
        {"command", c.command},
        {"kernel", kernel},
        {"solver", solver},
        {"partition",
         {{"epsilon", c.epsilon},
          {"classes", c.classes},
          {"labeled_fraction", c.labeled_fraction},
          {"seed", c.partition_seed}}},
        {"experiment", {{"fractions", c.fractions}, {"seeds", c.seeds}, {"jobs", c.jobs}}},
        {"synth",
         {{"generator", c.generator},
          {"n", c.n},
          {"noise", c.noise},
          {"sizes", c.sizes},
          {"p_in", c.p_in},
          {"p_out", c.p_out},
          {"seed", c.synth_seed}}},
        {"paths", c.paths},
    };
}

/// Overlays `j` onto `base`; keys absent from `j` keep their base value.
inline RunConfig from_json(const nlohmann::json& j, RunConfig base = {}) {
    using detail::read_key;
    using detail::reject_unknown;
    reject_unknown(j, {"version", "command", "kernel", "solver", "partition", "experiment",
                       "synth", "paths"},
                   "config");
    if (const auto it = j.find("version"); it != j.end()) {
        if (!it->is_string() || it->get<std::string>() != config_version) {
            throw Error(ErrorKind::InvalidArgument,
                        "config version must be '" + std::string(config_version) + "'");
        }
    }
    RunConfig c = std::move(base);
    read_key(j, "command", c.command);

    if (const auto it = j.find("kernel"); it != j.end()) {
        const auto& k = *it;
        reject_unknown(k, {"metric", "kernel", "sigma", "k", "symmetrize"}, "kernel");
        std::string name;
        if (k.contains("metric")) {
            read_key(k, "metric", name);
            c.kernel.metric = detail::enum_value(name, detail::metric_names, "kernel.metric");
        }
        if (k.contains("kernel")) {
            read_key(k, "kernel", name);
            c.kernel.kernel = detail::enum_value(name, detail::kernel_names, "kernel.kernel");
        }
        if (k.contains("symmetrize")) {
            read_key(k, "symmetrize", name);
            c.kernel.symmetrization =
                detail::enum_value(name, detail::symmetrize_names, "kernel.symmetrize");
        }
        read_key(k, "k", c.kernel.k);
        if (const auto sg = k.find("sigma"); sg != k.end()) {
            if (sg->is_string() && sg->get<std::string>() == "auto") {
                c.kernel.sigma_auto = true;
                c.kernel.sigma = 0.0;
            } else if (sg->is_number()) {
                c.kernel.sigma_auto = false;
                c.kernel.sigma = sg->get<double>();
            } else {
                throw Error(ErrorKind::InvalidArgument, "kernel.sigma must be a number or 'auto'");
            }
        }
    }

    if (const auto it = j.find("solver"); it != j.end()) {
        const auto& s = *it;
        reject_unknown(s,
                       {"dt", "sigma0", "tau0", "inner_max", "inner_tol", "outer_max",
                        "outer_tol", "seed", "step_rule", "acceleration", "zero_guard", "init",
                        "diffusion_steps", "shift", "project_start"},
                       "solver");
        auto& o = c.solver;
        read_key(s, "dt", o.dt);
        read_key(s, "sigma0", o.sigma0);
        read_key(s, "tau0", o.tau0);
        read_key(s, "inner_max", o.inner_max);
        read_key(s, "inner_tol", o.inner_tol);
        read_key(s, "outer_max", o.outer_max);
        read_key(s, "outer_tol", o.outer_tol);
        read_key(s, "seed", o.seed);
        read_key(s, "zero_guard", o.zero_guard);
        read_key(s, "diffusion_steps", o.diffusion_steps);
        read_key(s, "project_start", o.project_start);
        std::string name;
        if (s.contains("step_rule")) {
            read_key(s, "step_rule", name);
            o.step_rule = detail::enum_value(name, detail::step_rule_names, "solver.step_rule");
        }
        if (s.contains("acceleration")) {
            read_key(s, "acceleration", name);
            o.acceleration =
                detail::enum_value(name, detail::acceleration_names, "solver.acceleration");
        }
        if (s.contains("init")) {
            read_key(s, "init", name);
            o.init = detail::enum_value(name, detail::init_names, "solver.init");
        }
        if (s.contains("shift")) {
            read_key(s, "shift", name);
            o.shift = detail::enum_value(name, detail::shift_names, "solver.shift");
        }
    }

    if (const auto it = j.find("partition"); it != j.end()) {
        reject_unknown(*it, {"epsilon", "classes", "labeled_fraction", "seed"}, "partition");
        read_key(*it, "epsilon", c.epsilon);
        read_key(*it, "classes", c.classes);
        read_key(*it, "labeled_fraction", c.labeled_fraction);
        read_key(*it, "seed", c.partition_seed);
    }
    if (const auto it = j.find("experiment"); it != j.end()) {
        reject_unknown(*it, {"fractions", "seeds", "jobs"}, "experiment");
        read_key(*it, "fractions", c.fractions);
        read_key(*it, "seeds", c.seeds);
        read_key(*it, "jobs", c.jobs);
    }
    if (const auto it = j.find("synth"); it != j.end()) {
        reject_unknown(*it, {"generator", "n", "noise", "sizes", "p_in", "p_out", "seed"}, "synth");
        read_key(*it, "generator", c.generator);
        read_key(*it, "n", c.n);
        read_key(*it, "noise", c.noise);
        read_key(*it, "sizes", c.sizes);
        read_key(*it, "p_in", c.p_in);
        read_key(*it, "p_out", c.p_out);
        read_key(*it, "seed", c.synth_seed);
    }
    read_key(j, "paths", c.paths);
    return c;
}

inline std::string dump_config(const RunConfig& c) { return to_json(c).dump(2) + "\n"; }

inline RunConfig parse_config(std::string_view text, RunConfig base = {}) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(ErrorKind::ParseError, std::string("config: ") + e.what(), e.byte);
    }
    return from_json(j, std::move(base));
}

inline RunConfig load_config(const std::string& path, RunConfig base = {}) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::Io, "cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), std::move(base));
}

inline void save_config(const std::string& path, const RunConfig& c) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw Error(ErrorKind::Io, "cannot open " + path + " for writing");
    out << dump_config(c);
}

} // namespace graphx
