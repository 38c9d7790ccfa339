#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace graphx {

enum class ErrorKind {
    InvalidArgument,
    DimensionMismatch,
    IsolatedNode,
    DegenerateFeatures,
    NonFiniteValue,
    ParseError,
    ShapeMismatch,
    EmptyClass,
    NoConvergence,
    NonFinite,
    DegenerateState,
    DegenerateClass,
    GenerationFailed,
    FractionTooSmall,
    InvalidExperiment,
    InvalidGraph,
    Io,
};

constexpr std::string_view to_string(ErrorKind kind) noexcept {
    switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::IsolatedNode: return "IsolatedNode";
    case ErrorKind::DegenerateFeatures: return "DegenerateFeatures";
    case ErrorKind::NonFiniteValue: return "NonFiniteValue";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::ShapeMismatch: return "ShapeMismatch";
    case ErrorKind::EmptyClass: return "EmptyClass";
    case ErrorKind::NoConvergence: return "NoConvergence";
    case ErrorKind::NonFinite: return "NonFinite";
    case ErrorKind::DegenerateState: return "DegenerateState";
    case ErrorKind::DegenerateClass: return "DegenerateClass";
    case ErrorKind::GenerationFailed: return "GenerationFailed";
    case ErrorKind::FractionTooSmall: return "FractionTooSmall";
    case ErrorKind::InvalidExperiment: return "InvalidExperiment";
    case ErrorKind::InvalidGraph: return "InvalidGraph";
    case ErrorKind::Io: return "Io";
    }
    return "Unknown";
}

/// Library-wide exception. `index` carries the offending node, line or
/// iteration when there is one; `value` carries a numeric payload such as the
/// last power-iteration estimate.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message,
          std::optional<std::size_t> index = std::nullopt,
          std::optional<double> value = std::nullopt)
        : std::runtime_error(std::string(to_string(kind)) + ": " + message),
          kind_(kind), index_(index), value_(value) {}

    ErrorKind kind() const noexcept { return kind_; }
    std::optional<std::size_t> index() const noexcept { return index_; }
    std::optional<double> value() const noexcept { return value_; }

private:
    ErrorKind kind_;
    std::optional<std::size_t> index_;
    std::optional<double> value_;
};

inline void require(bool condition, ErrorKind kind, const std::string& message) {
    if (!condition) throw Error(kind, message);
}

} // namespace graphx
