#pragma once

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "graphx/error.hpp"
#include "graphx/graph.hpp"

// GXG1 binary graph cache:
//   "GXG1" | u64 n | u64 nnz | u64[n+1] row_ptr | u64[nnz] col_idx |
//   f64[nnz] weights | f64[n] degrees          (all little-endian)

namespace graphx {

namespace detail {

static_assert(std::endian::native == std::endian::little,
              "GXG1 I/O assumes a little-endian host");

inline constexpr std::array<char, 4> gxg_magic{'G', 'X', 'G', '1'};

template <typename T>
void write_le(std::ostream& out, T value) {
    out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T read_le(std::istream& in) {
    T value{};
    in.read(reinterpret_cast<char*>(&value), sizeof(T));
    if (!in) throw Error(ErrorKind::InvalidGraph, "truncated GXG1 stream");
    return value;
}

} // namespace detail

inline void write_graph(std::ostream& out, const Graph& g) {
    out.write(detail::gxg_magic.data(), detail::gxg_magic.size());
    detail::write_le<std::uint64_t>(out, g.nodes());
    detail::write_le<std::uint64_t>(out, g.nnz());
    for (auto p : g.row_ptr()) detail::write_le<std::uint64_t>(out, p);
    for (auto c : g.col_idx()) detail::write_le<std::uint64_t>(out, c);
    for (double w : g.weights()) detail::write_le<double>(out, w);
    for (double d : g.degrees()) detail::write_le<double>(out, d);
    if (!out) throw Error(ErrorKind::Io, "failed writing GXG1 stream");
}

inline Graph read_graph(std::istream& in) {
    std::array<char, 4> magic{};
    in.read(magic.data(), magic.size());
    if (!in || magic != detail::gxg_magic) {
        throw Error(ErrorKind::InvalidGraph, "missing GXG1 magic");
    }
    const auto n = detail::read_le<std::uint64_t>(in);
    const auto nnz = detail::read_le<std::uint64_t>(in);
    // Reject absurd headers before allocating.
    constexpr std::uint64_t limit = std::uint64_t{1} << 40;
    require(n < limit && nnz < limit, ErrorKind::InvalidGraph, "implausible GXG1 header");

    std::vector<std::size_t> row_ptr(n + 1);
    for (auto& p : row_ptr) p = detail::read_le<std::uint64_t>(in);
    std::vector<std::size_t> col_idx(nnz);
    for (auto& c : col_idx) c = detail::read_le<std::uint64_t>(in);
    std::vector<double> weights(nnz);
    for (auto& w : weights) w = detail::read_le<double>(in);
    std::vector<double> degrees(n);
    for (auto& d : degrees) d = detail::read_le<double>(in);
    in.peek();
    require(in.eof(), ErrorKind::InvalidGraph, "trailing bytes after GXG1 payload");
    return Graph::from_csr(n, std::move(row_ptr), std::move(col_idx), std::move(weights), degrees);
}

inline void save_graph(const std::string& path, const Graph& g) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::Io, "cannot open " + path + " for writing");
    write_graph(out, g);
}

inline Graph load_graph(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::Io, "cannot open " + path);
    return read_graph(in);
}

} // namespace graphx
