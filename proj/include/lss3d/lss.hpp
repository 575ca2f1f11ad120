#pragma once

#include "lss3d/gumbel.hpp"
#include "lss3d/predictions.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace lss3d {

enum class SampleMode { warmup_all, lss, hard_binarized };

inline const char* to_string(SampleMode m) {
  switch (m) {
    case SampleMode::warmup_all: return "warmup_all";
    case SampleMode::lss: return "lss";
    case SampleMode::hard_binarized: return "hard_binarized";
  }
  return "unknown";
}

/// Raw selection logits for one object's ROI grid.
template <typename Scalar = double>
struct LogitGrid {
  GridArray<Scalar> values;
  int object_id = 0;
};

/// Output of the relative-distance divider over a soft map.
/// sorted_values is non-increasing; ratios[i] = sorted[i] / sorted[i+1];
/// split_index is the 0-based argmax of ratios, ties broken toward the
/// larger index (keeping more cells positive). Cells at or above
/// sorted_values[split_index] count as positive.
template <typename Scalar = double>
struct DividerResult {
  FlatArray<Scalar> sorted_values;
  FlatArray<Scalar> ratios;
  Index split_index = 0;
  Scalar threshold() const { return sorted_values(split_index); }
};

/// Per-cell training weights after dividing. Positive cells keep their soft
/// value (or 1 when binarized); negative cells are exactly zero.
template <typename Scalar = double>
struct SampleMap {
  GridArray<Scalar> values;
  Index positive_count = 0;
  Index threshold_index = -1;  // split position in sorted order; -1 when no divider ran
  SampleMode mode = SampleMode::lss;
};

namespace detail {

template <typename Scalar>
std::vector<Index> descending_order(const FlatArray<Scalar>& v) {
  std::vector<Index> order(static_cast<std::size_t>(v.size()));
  std::iota(order.begin(), order.end(), Index(0));
  std::stable_sort(order.begin(), order.end(),
                   [&](Index a, Index b) { return v(a) > v(b); });
  return order;
}

}  // namespace detail

/// Split a soft map into positives and negatives at its largest adjacent
/// ratio in descending order. Because the soft map is an exponential of the
/// perturbed logits, the largest ratio sits exactly at the largest adjacent
/// gap of the sorted perturbed logits.
template <typename Scalar>
DividerResult<Scalar> relative_distance_divide(const SoftMap<Scalar>& soft) {
  const Index n = soft.size();
  if (n < 2) throw std::invalid_argument("relative_distance_divide: need at least 2 cells");
  const FlatArray<Scalar> flat = flatten_rowmajor(soft.values);
  const std::vector<Index> order = detail::descending_order(flat);
  DividerResult<Scalar> out;
  out.sorted_values.resize(n);
  for (Index i = 0; i < n; ++i) out.sorted_values(i) = flat(order[static_cast<std::size_t>(i)]);
  out.ratios.resize(n - 1);
  for (Index i = 0; i + 1 < n; ++i) out.ratios(i) = out.sorted_values(i) / out.sorted_values(i + 1);
  out.split_index = 0;
  for (Index i = 1; i + 1 < n; ++i)
    if (out.ratios(i) >= out.ratios(out.split_index)) out.split_index = i;
  return out;
}

/// Count of positives when dividing at the largest adjacent absolute gap
/// instead of the largest ratio. Reference gadget for contrasting the two
/// dividers on the same soft map.
template <typename Scalar>
Index absolute_distance_positives(const SoftMap<Scalar>& soft) {
  const Index n = soft.size();
  if (n < 2) throw std::invalid_argument("absolute_distance_positives: need at least 2 cells");
  const FlatArray<Scalar> flat = flatten_rowmajor(soft.values);
  const std::vector<Index> order = detail::descending_order(flat);
  Index split = 0;
  Scalar best = flat(order[0]) - flat(order[1]);
  for (Index i = 1; i + 1 < n; ++i) {
    const Scalar gap = flat(order[static_cast<std::size_t>(i)]) - flat(order[static_cast<std::size_t>(i + 1)]);
    if (gap >= best) {
      best = gap;
      split = i;
    }
  }
  return split + 1;
}

/// Zero out every cell strictly below the divider threshold. Positive cells
/// keep their soft value, or become exactly 1 with `binarize`.
template <typename Scalar>
SampleMap<Scalar> build_sample_map(const SoftMap<Scalar>& soft, const DividerResult<Scalar>& divider,
                                   bool binarize = false) {
  const Scalar threshold = divider.threshold();
  SampleMap<Scalar> map;
  map.values = soft.values;
  map.positive_count = 0;
  for (Index r = 0; r < map.values.rows(); ++r) {
    for (Index c = 0; c < map.values.cols(); ++c) {
      Scalar& v = map.values(r, c);
      if (v < threshold) {
        v = Scalar(0);
      } else {
        if (binarize) v = Scalar(1);
        ++map.positive_count;
      }
    }
  }
  map.threshold_index = divider.split_index;
  map.mode = binarize ? SampleMode::hard_binarized : SampleMode::lss;
  return map;
}

/// All-ones map used while the warm-up gate is active.
template <typename Scalar = double>
SampleMap<Scalar> warmup_sample_map(Index rows, Index cols) {
  if (rows < 1 || cols < 1) throw std::invalid_argument("warmup_sample_map: empty grid");
  SampleMap<Scalar> map;
  map.values = GridArray<Scalar>::Ones(rows, cols);
  map.positive_count = rows * cols;
  map.threshold_index = -1;
  map.mode = SampleMode::warmup_all;
  return map;
}

/// Full forward pass of the selection head: draw noise, soften, divide,
/// threshold. Kept as one bundle so callers can reuse the intermediates for
/// the straight-through backward pass.
template <typename Scalar = double>
struct LssForward {
  GridArray<Scalar> noise;
  SoftMap<Scalar> soft;
  DividerResult<Scalar> divider;
  SampleMap<Scalar> map;
};

template <typename Scalar, class Engine>
LssForward<Scalar> lss_forward(const GridArray<Scalar>& logits, Scalar temperature, Engine& rng,
                               bool binarize = false) {
  LssForward<Scalar> fwd;
  fwd.noise = sample_gumbel_values<Scalar>(logits.rows(), logits.cols(), rng);
  fwd.soft = gumbel_softmax(logits, fwd.noise, temperature);
  if (logits.size() == 1) {
    fwd.map.values = fwd.soft.values;  // singleton softmax is exactly 1
    fwd.map.positive_count = 1;
    fwd.map.threshold_index = -1;
    fwd.map.mode = binarize ? SampleMode::hard_binarized : SampleMode::lss;
    if (binarize) fwd.map.values(0, 0) = Scalar(1);
    return fwd;
  }
  fwd.divider = relative_distance_divide(fwd.soft);
  fwd.map = build_sample_map(fwd.soft, fwd.divider, binarize);
  return fwd;
}

/// Training-time selection entry point.
template <typename Scalar, class Engine>
SampleMap<Scalar> select_train(const LogitGrid<Scalar>& logits, Scalar temperature, Engine& rng,
                               SampleMode mode, bool binarize = false) {
  if (logits.values.size() < 1) throw std::invalid_argument("select_train: empty logit grid");
  if (mode == SampleMode::warmup_all)
    return warmup_sample_map<Scalar>(logits.values.rows(), logits.values.cols());
  if (mode != SampleMode::lss) throw std::invalid_argument("select_train: mode must be warmup_all or lss");
  return lss_forward(logits.values, temperature, rng, binarize).map;
}

/// Properties of the argmax-logit cell, used at inference where no noise is
/// drawn. Ties go to the lowest row-major index.
template <typename Scalar = double>
struct Selected3D {
  Index cell = 0;
  Scalar depth = Scalar(0);
  Scalar log_uncertainty = Scalar(0);
  Eigen::Matrix<Scalar, 3, 1> dims;
  Eigen::Matrix<Scalar, kOrientationBins, 1> orient_conf;
  Eigen::Matrix<Scalar, kOrientationBins, 1> orient_resid;
  Eigen::Matrix<Scalar, 2, 1> offset;
};

template <typename Scalar>
Selected3D<Scalar> select_infer(const LogitGrid<Scalar>& logits, const CellPredictions<Scalar>& preds) {
  preds.require_consistent();
  if (logits.values.rows() != preds.rows || logits.values.cols() != preds.cols)
    throw std::invalid_argument("select_infer: logits/predictions shape mismatch");
  const FlatArray<Scalar> flat = flatten_rowmajor(logits.values);
  Index best = 0;
  for (Index i = 1; i < flat.size(); ++i)
    if (flat(i) > flat(best)) best = i;
  Selected3D<Scalar> sel;
  sel.cell = best;
  sel.depth = preds.depth(best);
  sel.log_uncertainty = preds.log_uncertainty(best);
  sel.dims = preds.dims.row(best).transpose();
  sel.orient_conf = preds.orient_conf.row(best).transpose();
  sel.orient_resid = preds.orient_resid.row(best).transpose();
  sel.offset = preds.offset;
  return sel;
}

/// Straight-through gradient of sum(upstream * map) w.r.t. the logits.
/// Thresholding is treated as identity on retained cells, so upstream
/// contributions at zeroed cells are masked and the rest flow through the
/// softmax Jacobian: grad_k = S_k (u_k - sum_i u_i S_i) / temperature.
template <typename Scalar>
GridArray<Scalar> sample_map_grad(const GridArray<Scalar>& upstream, const SoftMap<Scalar>& soft,
                                  const SampleMap<Scalar>& map, Scalar temperature) {
  if (upstream.rows() != soft.values.rows() || upstream.cols() != soft.values.cols() ||
      map.values.rows() != soft.values.rows() || map.values.cols() != soft.values.cols())
    throw std::invalid_argument("sample_map_grad: shape mismatch");
  if (!(temperature > Scalar(0))) throw std::invalid_argument("sample_map_grad: temperature must be positive");
  GridArray<Scalar> masked = upstream;
  for (Index r = 0; r < masked.rows(); ++r)
    for (Index c = 0; c < masked.cols(); ++c)
      if (map.values(r, c) == Scalar(0)) masked(r, c) = Scalar(0);
  const Scalar dot = (masked * soft.values).sum();
  return soft.values * (masked - dot) / temperature;
}

}  // namespace lss3d
