#pragma once

#include "lss3d/lss.hpp"
#include "lss3d/predictions.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace lss3d {

inline constexpr double kSqrt2 = 1.4142135623730951;
inline constexpr double kPi = 3.141592653589793;
inline constexpr double kOrientationBinWidth = 2.0 * kPi / kOrientationBins;

namespace detail {

template <typename Scalar>
Scalar sgn(Scalar x) {
  return (x > Scalar(0)) ? Scalar(1) : (x < Scalar(0) ? Scalar(-1) : Scalar(0));
}

inline void require_finite(double v, const char* who) {
  if (!std::isfinite(v)) throw std::invalid_argument(std::string(who) + ": non-finite input");
}

}  // namespace detail

/// Laplacian aleatoric depth loss: sqrt(2) * exp(-u) * |d_gt - d_pred| + u,
/// where u is the predicted log uncertainty. For a fixed error e the loss is
/// minimized at u = log(sqrt(2) * e).
template <typename Scalar>
Scalar depth_loss(Scalar d_pred, Scalar log_uncertainty, Scalar d_gt) {
  detail::require_finite(static_cast<double>(d_pred), "depth_loss");
  detail::require_finite(static_cast<double>(log_uncertainty), "depth_loss");
  if (!(d_gt > Scalar(0))) throw std::invalid_argument("depth_loss: ground-truth depth must be positive");
  return Scalar(kSqrt2) * std::exp(-log_uncertainty) * std::abs(d_gt - d_pred) + log_uncertainty;
}

/// Gradient of depth_loss w.r.t. (d_pred, log_uncertainty). The absolute
/// value contributes its subgradient 0 at d_pred == d_gt.
template <typename Scalar>
struct DepthLossGrad {
  Scalar d_pred;
  Scalar log_uncertainty;
};

template <typename Scalar>
DepthLossGrad<Scalar> depth_loss_grad(Scalar d_pred, Scalar log_uncertainty, Scalar d_gt) {
  const Scalar scale = Scalar(kSqrt2) * std::exp(-log_uncertainty);
  return {scale * detail::sgn(d_pred - d_gt), Scalar(1) - scale * std::abs(d_gt - d_pred)};
}

/// Wrap an angle into [-pi, pi).
template <typename Scalar>
Scalar wrap_to_pi(Scalar theta) {
  detail::require_finite(static_cast<double>(theta), "wrap_to_pi");
  Scalar wrapped = theta - Scalar(2 * kPi) * std::floor((theta + Scalar(kPi)) / Scalar(2 * kPi));
  if (wrapped >= Scalar(kPi)) wrapped -= Scalar(2 * kPi);  // guard against rounding at the seam
  return wrapped;
}

/// Center of orientation bin i: the 12 bins tile [-pi, pi) uniformly.
inline double orientation_bin_center(int bin) { return -kPi + (2 * bin + 1) * kPi / kOrientationBins; }

/// Ground-truth bin and in-bin residual for an angle. The residual lies in
/// (-width/2, width/2]: an angle exactly on a bin's lower edge belongs to
/// the previous bin with residual +width/2.
struct BinAssignment {
  int bin = 0;
  double residual = 0.0;
};

inline BinAssignment assign_orientation_bin(double theta) {
  const double wrapped = wrap_to_pi(theta);
  int bin = static_cast<int>(std::floor((wrapped + kPi) / kOrientationBinWidth));
  bin = std::min(std::max(bin, 0), kOrientationBins - 1);
  double residual = wrapped - orientation_bin_center(bin);
  if (residual <= -kOrientationBinWidth / 2) {
    bin = (bin + kOrientationBins - 1) % kOrientationBins;
    residual = kOrientationBinWidth / 2;
  }
  return {bin, residual};
}

/// Decode an angle from bin confidences and per-bin residuals: take the
/// argmax bin's center plus its residual.
template <typename Scalar>
Scalar decode_orientation(const Eigen::Matrix<Scalar, kOrientationBins, 1>& conf,
                          const Eigen::Matrix<Scalar, kOrientationBins, 1>& resid) {
  Index best = 0;
  conf.maxCoeff(&best);
  return wrap_to_pi(Scalar(orientation_bin_center(static_cast<int>(best))) + resid(best));
}

/// Multi-bin orientation loss: cross-entropy of the bin confidences against
/// the ground-truth bin, plus L1 on that bin's residual.
template <typename Scalar>
Scalar multibin_orientation_loss(const Eigen::Matrix<Scalar, kOrientationBins, 1>& conf,
                                 const Eigen::Matrix<Scalar, kOrientationBins, 1>& resid,
                                 Scalar theta_gt) {
  const BinAssignment gt = assign_orientation_bin(static_cast<double>(theta_gt));
  const Scalar m = conf.maxCoeff();
  const Scalar lse = m + std::log((conf.array() - m).exp().sum());
  return (lse - conf(gt.bin)) + std::abs(resid(gt.bin) - Scalar(gt.residual));
}

template <typename Scalar>
struct OrientationLossGrad {
  Eigen::Matrix<Scalar, kOrientationBins, 1> conf;
  Eigen::Matrix<Scalar, kOrientationBins, 1> resid;
};

template <typename Scalar>
OrientationLossGrad<Scalar> multibin_orientation_grad(
    const Eigen::Matrix<Scalar, kOrientationBins, 1>& conf,
    const Eigen::Matrix<Scalar, kOrientationBins, 1>& resid, Scalar theta_gt) {
  const BinAssignment gt = assign_orientation_bin(static_cast<double>(theta_gt));
  const Scalar m = conf.maxCoeff();
  Eigen::Matrix<Scalar, kOrientationBins, 1> soft = (conf.array() - m).exp();
  soft /= soft.sum();
  OrientationLossGrad<Scalar> g;
  g.conf = soft;
  g.conf(gt.bin) -= Scalar(1);
  g.resid.setZero();
  g.resid(gt.bin) = detail::sgn(resid(gt.bin) - Scalar(gt.residual));
  return g;
}

/// L1 over the three dimension components (h, w, l).
template <typename Scalar>
Scalar dim_loss(const Eigen::Matrix<Scalar, 3, 1>& pred, const Eigen::Matrix<Scalar, 3, 1>& gt) {
  return (pred - gt).template lpNorm<1>();
}

template <typename Scalar>
Eigen::Matrix<Scalar, 3, 1> dim_loss_grad(const Eigen::Matrix<Scalar, 3, 1>& pred,
                                          const Eigen::Matrix<Scalar, 3, 1>& gt) {
  return (pred - gt).unaryExpr([](Scalar x) { return detail::sgn(x); });
}

/// Smooth L1 with transition point 1: quadratic inside the unit interval,
/// linear outside. C1 everywhere.
template <typename Scalar>
Scalar smooth_l1(Scalar x) {
  const Scalar ax = std::abs(x);
  return ax < Scalar(1) ? Scalar(0.5) * x * x : ax - Scalar(0.5);
}

template <typename Scalar>
Scalar smooth_l1_grad(Scalar x) {
  return std::abs(x) < Scalar(1) ? x : detail::sgn(x);
}

/// Smooth L1 summed over the 2D center offset (du, dv).
template <typename Scalar>
Scalar offset_loss(const Eigen::Matrix<Scalar, 2, 1>& pred, const Eigen::Matrix<Scalar, 2, 1>& gt) {
  return smooth_l1(pred(0) - gt(0)) + smooth_l1(pred(1) - gt(1));
}

template <typename Scalar>
Eigen::Matrix<Scalar, 2, 1> offset_loss_grad(const Eigen::Matrix<Scalar, 2, 1>& pred,
                                             const Eigen::Matrix<Scalar, 2, 1>& gt) {
  return {smooth_l1_grad(pred(0) - gt(0)), smooth_l1_grad(pred(1) - gt(1))};
}

/// Per-cell loss grids plus the per-object offset term.
template <typename Scalar = double>
struct LossBreakdown {
  GridArray<Scalar> depth;
  GridArray<Scalar> dims;
  GridArray<Scalar> orientation;
  Scalar offset = Scalar(0);
  Scalar masked_total = std::numeric_limits<Scalar>::quiet_NaN();
};

template <typename Scalar>
LossBreakdown<Scalar> per_cell_losses(const CellPredictions<Scalar>& preds,
                                      const ObjectTargets<Scalar>& gt) {
  preds.require_consistent();
  LossBreakdown<Scalar> out;
  out.depth.resize(preds.rows, preds.cols);
  out.dims.resize(preds.rows, preds.cols);
  out.orientation.resize(preds.rows, preds.cols);
  for (Index r = 0; r < preds.rows; ++r) {
    for (Index c = 0; c < preds.cols; ++c) {
      const Index i = cell_index(r, c, preds.cols);
      out.depth(r, c) = depth_loss(preds.depth(i), preds.log_uncertainty(i), gt.depth);
      out.dims(r, c) = dim_loss<Scalar>(preds.dims.row(i).transpose(), gt.dims);
      out.orientation(r, c) = multibin_orientation_loss<Scalar>(
          preds.orient_conf.row(i).transpose(), preds.orient_resid.row(i).transpose(), gt.yaw);
    }
  }
  out.offset = offset_loss(preds.offset, gt.offset);
  return out;
}

/// Combine per-cell losses under a sample map:
///   total = offset + sum_i map_i * (depth_i + dims_i + orientation_i)
/// With `normalize` the masked sum is divided by sum(map) (taken as 0 when
/// the map is all zero), so warm-up and selection phases share a scale.
template <typename Scalar>
Scalar masked_total_loss(const LossBreakdown<Scalar>& losses, const SampleMap<Scalar>& map,
                         bool normalize = true) {
  if (losses.depth.rows() != map.values.rows() || losses.depth.cols() != map.values.cols())
    throw std::invalid_argument("masked_total_loss: losses/map shape mismatch");
  if (!losses.depth.isFinite().all() || !losses.dims.isFinite().all() ||
      !losses.orientation.isFinite().all() || !std::isfinite(static_cast<double>(losses.offset)))
    throw std::invalid_argument("masked_total_loss: non-finite loss input");
  const GridArray<Scalar> per_cell = losses.depth + losses.dims + losses.orientation;
  Scalar masked = (map.values * per_cell).sum();
  if (normalize) {
    const Scalar weight = map.values.sum();
    masked = weight > Scalar(0) ? masked / weight : Scalar(0);
  }
  return losses.offset + masked;
}

/// Gradients of the masked total w.r.t. every prediction, plus the gradient
/// w.r.t. the map values themselves (the upstream signal for the
/// straight-through selection backward pass).
template <typename Scalar = double>
struct LossGradients {
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> depth;
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> log_uncertainty;
  Eigen::Matrix<Scalar, Eigen::Dynamic, 3> dims;
  Eigen::Matrix<Scalar, Eigen::Dynamic, kOrientationBins> orient_conf;
  Eigen::Matrix<Scalar, Eigen::Dynamic, kOrientationBins> orient_resid;
  Eigen::Matrix<Scalar, 2, 1> offset;
  GridArray<Scalar> map_upstream;
};

template <typename Scalar>
LossGradients<Scalar> masked_total_gradients(const CellPredictions<Scalar>& preds,
                                             const ObjectTargets<Scalar>& gt,
                                             const SampleMap<Scalar>& map,
                                             const LossBreakdown<Scalar>& losses,
                                             bool normalize = true) {
  preds.require_consistent();
  if (map.values.rows() != preds.rows || map.values.cols() != preds.cols)
    throw std::invalid_argument("masked_total_gradients: map shape mismatch");
  const Index n = preds.size();
  LossGradients<Scalar> g;
  g.depth.setZero(n);
  g.log_uncertainty.setZero(n);
  g.dims.setZero(n, 3);
  g.orient_conf.setZero(n, kOrientationBins);
  g.orient_resid.setZero(n, kOrientationBins);
  g.map_upstream.setZero(preds.rows, preds.cols);

  const Scalar weight = map.values.sum();
  const Scalar denom = (normalize && weight > Scalar(0)) ? weight : Scalar(1);
  const bool normalized = normalize && weight > Scalar(0);
  const GridArray<Scalar> per_cell = losses.depth + losses.dims + losses.orientation;
  const Scalar masked_mean = normalized ? (map.values * per_cell).sum() / weight : Scalar(0);

  for (Index r = 0; r < preds.rows; ++r) {
    for (Index c = 0; c < preds.cols; ++c) {
      const Index i = cell_index(r, c, preds.cols);
      const Scalar w = map.values(r, c) / denom;
      if (w != Scalar(0)) {
        const DepthLossGrad<Scalar> dg =
            depth_loss_grad(preds.depth(i), preds.log_uncertainty(i), gt.depth);
        g.depth(i) = w * dg.d_pred;
        g.log_uncertainty(i) = w * dg.log_uncertainty;
        g.dims.row(i) =
            w * dim_loss_grad<Scalar>(preds.dims.row(i).transpose(), gt.dims).transpose();
        const OrientationLossGrad<Scalar> og = multibin_orientation_grad<Scalar>(
            preds.orient_conf.row(i).transpose(), preds.orient_resid.row(i).transpose(), gt.yaw);
        g.orient_conf.row(i) = w * og.conf.transpose();
        g.orient_resid.row(i) = w * og.resid.transpose();
      }
      // d(total)/d(map_i): with normalization the map also moves the denominator.
      g.map_upstream(r, c) =
          normalized ? (per_cell(r, c) - masked_mean) / weight : per_cell(r, c);
    }
  }
  g.offset = offset_loss_grad(preds.offset, gt.offset);
  return g;
}

}  // namespace lss3d
