#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <random>
#include <string_view>

namespace lss3d {

template <typename Scalar>
using GridArray = Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Scalar>
using FlatArray = Eigen::Array<Scalar, Eigen::Dynamic, 1>;

using GridXd = GridArray<double>;
using FlatXd = FlatArray<double>;
using Index = Eigen::Index;

/// Default engine for every sampling operation. RNGs are always explicit
/// parameters; the library keeps no global random state.
using Rng = std::mt19937_64;

/// Uniform double in [0, 1) built from the top 53 bits of a 64-bit draw.
/// Unlike std::uniform_real_distribution this is bit-stable across
/// standard library implementations.
template <class Engine>
inline double canonical_uniform(Engine& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Standard normal via Box-Muller on canonical uniforms (two draws per value).
template <class Engine>
inline double standard_normal(Engine& rng) {
  const double u1 = std::max(canonical_uniform(rng), 1e-300);
  const double u2 = canonical_uniform(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
}

/// SplitMix64 step, used to derive independent seeds for per-object and
/// per-arm streams from one master seed.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
  std::uint64_t x = seed + 0x9E3779B97F4A7C15ULL * (salt + 1);
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// FNV-1a 64-bit hash. Used for stream salts and config hashes where
/// std::hash would be implementation-defined.
inline std::uint64_t fnv1a64(std::string_view text) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return h;
}

/// Cells are addressed row-major everywhere: cell = r * cols + c.
inline Index cell_index(Index r, Index c, Index cols) { return r * cols + c; }

template <typename Scalar>
FlatArray<Scalar> flatten_rowmajor(const GridArray<Scalar>& g) {
  FlatArray<Scalar> v(g.size());
  for (Index r = 0; r < g.rows(); ++r)
    for (Index c = 0; c < g.cols(); ++c) v(r * g.cols() + c) = g(r, c);
  return v;
}

template <typename Scalar>
GridArray<Scalar> unflatten_rowmajor(const FlatArray<Scalar>& v, Index rows, Index cols) {
  GridArray<Scalar> g(rows, cols);
  for (Index r = 0; r < rows; ++r)
    for (Index c = 0; c < cols; ++c) g(r, c) = v(r * cols + c);
  return g;
}

}  // namespace lss3d
