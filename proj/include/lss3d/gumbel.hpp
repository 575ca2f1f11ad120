#pragma once

#include "lss3d/grid.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace lss3d {

/// Uniform draws are clamped into [kUniformClamp, 1 - kUniformClamp] before
/// the double log so every Gumbel value is finite.
inline constexpr double kUniformClamp = 1e-12;

/// Inverse-transform map from a uniform draw to a standard Gumbel value:
/// G = -log(-log(u)).
inline double gumbel_from_uniform(double u) {
  u = std::clamp(u, kUniformClamp, 1.0 - kUniformClamp);
  return -std::log(-std::log(u));
}

template <typename Scalar = double>
struct GumbelNoise {
  GridArray<Scalar> values;
  std::uint64_t seed = 0;
};

/// Softmax of noise-perturbed logits. `values` sums to 1 and is strictly
/// positive; `temperature` is the value the map was produced with.
template <typename Scalar = double>
struct SoftMap {
  GridArray<Scalar> values;
  Scalar temperature = Scalar(1);
  Index size() const { return values.size(); }
};

/// Fill a rows x cols grid with i.i.d. standard Gumbel draws. Cells are
/// filled row-major so the draw order is independent of Eigen's storage
/// order.
template <typename Scalar = double, class Engine>
GridArray<Scalar> sample_gumbel_values(Index rows, Index cols, Engine& rng) {
  if (rows < 1 || cols < 1) throw std::invalid_argument("sample_gumbel: shape must be at least 1x1");
  GridArray<Scalar> g(rows, cols);
  for (Index r = 0; r < rows; ++r)
    for (Index c = 0; c < cols; ++c)
      g(r, c) = static_cast<Scalar>(gumbel_from_uniform(canonical_uniform(rng)));
  return g;
}

/// Seeded convenience wrapper; the same seed and shape always reproduce the
/// same noise grid.
template <typename Scalar = double>
GumbelNoise<Scalar> sample_gumbel(Index rows, Index cols, std::uint64_t seed) {
  Rng rng(seed);
  return GumbelNoise<Scalar>{sample_gumbel_values<Scalar>(rows, cols, rng), seed};
}

namespace detail {

template <typename Derived>
void require_nonempty_finite(const Eigen::ArrayBase<Derived>& a, const char* who) {
  if (a.size() == 0) throw std::invalid_argument(std::string(who) + ": empty input");
  if (!a.derived().isFinite().all()) throw std::invalid_argument(std::string(who) + ": non-finite input");
}

}  // namespace detail

/// argmax over logits + noise, index into the row-major flattening. With
/// standard Gumbel noise this samples exactly from softmax(logits).
template <typename D1, typename D2>
Index gumbel_max_with_noise(const Eigen::ArrayBase<D1>& logits, const Eigen::ArrayBase<D2>& noise) {
  detail::require_nonempty_finite(logits, "gumbel_max");
  if (logits.rows() != noise.rows() || logits.cols() != noise.cols())
    throw std::invalid_argument("gumbel_max: logits/noise shape mismatch");
  Index best = 0;
  double best_value = -std::numeric_limits<double>::infinity();
  Index flat = 0;
  for (Index r = 0; r < logits.rows(); ++r) {
    for (Index c = 0; c < logits.cols(); ++c, ++flat) {
      const double v = static_cast<double>(logits(r, c)) + static_cast<double>(noise(r, c));
      if (v > best_value) {
        best_value = v;
        best = flat;
      }
    }
  }
  return best;
}

template <typename Derived, class Engine>
Index gumbel_max(const Eigen::ArrayBase<Derived>& logits, Engine& rng) {
  detail::require_nonempty_finite(logits, "gumbel_max");
  GridArray<double> noise = sample_gumbel_values<double>(logits.rows(), logits.cols(), rng);
  return gumbel_max_with_noise(logits, noise);
}

/// Top-k indices of logits + noise, ordered by descending perturbed value
/// (ties broken toward the lower index). Sampling without replacement from
/// the Plackett-Luce distribution induced by softmax(logits).
template <typename D1, typename D2>
std::vector<Index> gumbel_top_k_with_noise(const Eigen::ArrayBase<D1>& logits, Index k,
                                           const Eigen::ArrayBase<D2>& noise) {
  detail::require_nonempty_finite(logits, "gumbel_top_k");
  if (logits.rows() != noise.rows() || logits.cols() != noise.cols())
    throw std::invalid_argument("gumbel_top_k: logits/noise shape mismatch");
  const Index n = logits.size();
  if (k < 1 || k > n) throw std::invalid_argument("gumbel_top_k: k out of range");
  std::vector<double> perturbed(static_cast<std::size_t>(n));
  Index flat = 0;
  for (Index r = 0; r < logits.rows(); ++r)
    for (Index c = 0; c < logits.cols(); ++c, ++flat)
      perturbed[static_cast<std::size_t>(flat)] =
          static_cast<double>(logits(r, c)) + static_cast<double>(noise(r, c));
  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index(0));
  std::partial_sort(order.begin(), order.begin() + k, order.end(), [&](Index a, Index b) {
    const double pa = perturbed[static_cast<std::size_t>(a)];
    const double pb = perturbed[static_cast<std::size_t>(b)];
    return pa > pb || (pa == pb && a < b);
  });
  order.resize(static_cast<std::size_t>(k));
  return order;
}

template <typename Derived, class Engine>
std::vector<Index> gumbel_top_k(const Eigen::ArrayBase<Derived>& logits, Index k, Engine& rng) {
  detail::require_nonempty_finite(logits, "gumbel_top_k");
  GridArray<double> noise = sample_gumbel_values<double>(logits.rows(), logits.cols(), rng);
  return gumbel_top_k_with_noise(logits, k, noise);
}

/// Softmax of (logits + noise) / temperature with max-subtraction
/// stabilization. Perturbed logits in [-745, 709] after stabilization can
/// never overflow, and the normalizer is at least 1.
template <typename D1, typename D2>
SoftMap<typename D1::Scalar> gumbel_softmax(const Eigen::ArrayBase<D1>& logits,
                                            const Eigen::ArrayBase<D2>& noise,
                                            typename D1::Scalar temperature) {
  using Scalar = typename D1::Scalar;
  detail::require_nonempty_finite(logits, "gumbel_softmax");
  detail::require_nonempty_finite(noise, "gumbel_softmax");
  if (logits.rows() != noise.rows() || logits.cols() != noise.cols())
    throw std::invalid_argument("gumbel_softmax: logits/noise shape mismatch");
  if (!(temperature > Scalar(0))) throw std::invalid_argument("gumbel_softmax: temperature must be positive");
  GridArray<Scalar> perturbed = logits.derived() + noise.derived();
  GridArray<Scalar> shifted = (perturbed - perturbed.maxCoeff()) / temperature;
  GridArray<Scalar> expd = shifted.exp();
  return SoftMap<Scalar>{expd / expd.sum(), temperature};
}

/// Noise-free softmax, for inspection and the zero-noise worked examples.
template <typename Derived>
SoftMap<typename Derived::Scalar> gumbel_softmax(const Eigen::ArrayBase<Derived>& logits,
                                                 typename Derived::Scalar temperature) {
  GridArray<typename Derived::Scalar> zero =
      GridArray<typename Derived::Scalar>::Zero(logits.rows(), logits.cols());
  return gumbel_softmax(logits, zero, temperature);
}

/// Row-major Jacobian of the soft map w.r.t. the logits:
/// J(i, k) = S_i (delta_ik - S_k) / temperature.
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> soft_map_jacobian(const SoftMap<Scalar>& soft) {
  const FlatArray<Scalar> s = flatten_rowmajor(soft.values);
  const Index n = s.size();
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> jac(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index k = 0; k < n; ++k)
      jac(i, k) = s(i) * ((i == k ? Scalar(1) : Scalar(0)) - s(k)) / soft.temperature;
  return jac;
}

}  // namespace lss3d
