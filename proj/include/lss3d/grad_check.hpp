#pragma once

#include "lss3d/losses.hpp"

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace lss3d {

inline constexpr double kDefaultFdStep = 1e-5;
/// Points closer than this to a non-differentiable kink are moved away
/// before checking, and the adjustment is reported.
inline constexpr double kKinkRadius = 1e-3;

/// Unit-floored relative error: |a - n| / max(1, |a|, |n|). The floor keeps
/// near-zero gradient entries from turning round-off into huge ratios.
inline double relative_error(double analytic, double numeric) {
  return std::abs(analytic - numeric) /
         std::max({1.0, std::abs(analytic), std::abs(numeric)});
}

/// Central finite difference of a scalar function of a vector.
template <class F>
Eigen::VectorXd fd_gradient(F&& f, Eigen::VectorXd x, double step) {
  Eigen::VectorXd g(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double saved = x(i);
    x(i) = saved + step;
    const double hi = f(x);
    x(i) = saved - step;
    const double lo = f(x);
    x(i) = saved;
    g(i) = (hi - lo) / (2.0 * step);
  }
  return g;
}

struct GradCheckResult {
  double max_rel_error = 0.0;
  bool kink_perturbed = false;
};

namespace detail {

inline double nudge_away_from(double x, double kink) {
  if (std::abs(x - kink) >= kKinkRadius) return x;
  return x >= kink ? kink + 2.0 * kKinkRadius : kink - 2.0 * kKinkRadius;
}

template <class Engine>
double uniform_in(Engine& rng, double lo, double hi) {
  return lo + (hi - lo) * canonical_uniform(rng);
}

}  // namespace detail

inline GradCheckResult check_depth_loss(double d_pred, double log_uncertainty, double d_gt,
                                        double step = kDefaultFdStep) {
  GradCheckResult res;
  const double moved = detail::nudge_away_from(d_pred, d_gt);
  res.kink_perturbed = moved != d_pred;
  d_pred = moved;
  Eigen::VectorXd x(2);
  x << d_pred, log_uncertainty;
  const Eigen::VectorXd numeric = fd_gradient(
      [d_gt](const Eigen::VectorXd& p) { return depth_loss(p(0), p(1), d_gt); }, x, step);
  const DepthLossGrad<double> analytic = depth_loss_grad(d_pred, log_uncertainty, d_gt);
  res.max_rel_error = std::max(relative_error(analytic.d_pred, numeric(0)),
                               relative_error(analytic.log_uncertainty, numeric(1)));
  return res;
}

inline GradCheckResult check_dim_loss(Eigen::Vector3d pred, const Eigen::Vector3d& gt,
                                      double step = kDefaultFdStep) {
  GradCheckResult res;
  for (int i = 0; i < 3; ++i) {
    const double moved = detail::nudge_away_from(pred(i), gt(i));
    res.kink_perturbed = res.kink_perturbed || moved != pred(i);
    pred(i) = moved;
  }
  const Eigen::VectorXd numeric = fd_gradient(
      [&gt](const Eigen::VectorXd& p) { return dim_loss<double>(p, gt); }, pred, step);
  const Eigen::Vector3d analytic = dim_loss_grad<double>(pred, gt);
  for (int i = 0; i < 3; ++i)
    res.max_rel_error = std::max(res.max_rel_error, relative_error(analytic(i), numeric(i)));
  return res;
}

inline GradCheckResult check_offset_loss(Eigen::Vector2d pred, const Eigen::Vector2d& gt,
                                         double step = kDefaultFdStep) {
  GradCheckResult res;
  for (int i = 0; i < 2; ++i) {
    // Kinks of smooth L1 in the difference: 0 (gradient) and +-1 (curvature).
    double d = pred(i) - gt(i);
    for (double kink : {0.0, 1.0, -1.0}) {
      const double moved = detail::nudge_away_from(d, kink);
      res.kink_perturbed = res.kink_perturbed || moved != d;
      d = moved;
    }
    pred(i) = gt(i) + d;
  }
  const Eigen::VectorXd numeric = fd_gradient(
      [&gt](const Eigen::VectorXd& p) { return offset_loss<double>(p, gt); }, pred, step);
  const Eigen::Vector2d analytic = offset_loss_grad<double>(pred, gt);
  for (int i = 0; i < 2; ++i)
    res.max_rel_error = std::max(res.max_rel_error, relative_error(analytic(i), numeric(i)));
  return res;
}

inline GradCheckResult check_orientation_loss(const Eigen::Matrix<double, kOrientationBins, 1>& conf,
                                              Eigen::Matrix<double, kOrientationBins, 1> resid,
                                              double theta_gt, double step = kDefaultFdStep) {
  GradCheckResult res;
  const BinAssignment gt = assign_orientation_bin(theta_gt);
  const double moved = detail::nudge_away_from(resid(gt.bin), gt.residual);
  res.kink_perturbed = moved != resid(gt.bin);
  resid(gt.bin) = moved;

  Eigen::VectorXd x(2 * kOrientationBins);
  x << conf, resid;
  const auto f = [theta_gt](const Eigen::VectorXd& p) {
    const Eigen::Matrix<double, kOrientationBins, 1> c = p.head<kOrientationBins>();
    const Eigen::Matrix<double, kOrientationBins, 1> r = p.tail<kOrientationBins>();
    return multibin_orientation_loss<double>(c, r, theta_gt);
  };
  const Eigen::VectorXd numeric = fd_gradient(f, x, step);
  const OrientationLossGrad<double> analytic = multibin_orientation_grad<double>(conf, resid, theta_gt);
  for (int i = 0; i < kOrientationBins; ++i) {
    res.max_rel_error = std::max(res.max_rel_error, relative_error(analytic.conf(i), numeric(i)));
    res.max_rel_error =
        std::max(res.max_rel_error, relative_error(analytic.resid(i), numeric(kOrientationBins + i)));
  }
  return res;
}

/// Full Jacobian of the soft map against column-by-column finite differences.
inline GradCheckResult check_gumbel_softmax_jacobian(const GridXd& logits, const GridXd& noise,
                                                     double temperature,
                                                     double step = kDefaultFdStep) {
  GradCheckResult res;
  const Index n = logits.size();
  const Index rows = logits.rows(), cols = logits.cols();
  const SoftMap<double> soft = gumbel_softmax(logits, noise, temperature);
  const Eigen::MatrixXd analytic = soft_map_jacobian(soft);
  FlatXd flat = flatten_rowmajor(logits);
  for (Index k = 0; k < n; ++k) {
    const double saved = flat(k);
    flat(k) = saved + step;
    const FlatXd hi = flatten_rowmajor(
        gumbel_softmax(unflatten_rowmajor(flat, rows, cols), noise, temperature).values);
    flat(k) = saved - step;
    const FlatXd lo = flatten_rowmajor(
        gumbel_softmax(unflatten_rowmajor(flat, rows, cols), noise, temperature).values);
    flat(k) = saved;
    for (Index i = 0; i < n; ++i) {
      const double numeric = (hi(i) - lo(i)) / (2.0 * step);
      res.max_rel_error = std::max(res.max_rel_error, relative_error(analytic(i, k), numeric));
    }
  }
  return res;
}

namespace detail {

inline Eigen::VectorXd pack_predictions(const CellPredictionsd& p) {
  const Index n = p.size();
  Eigen::VectorXd x(n * (2 + 3 + 2 * kOrientationBins) + 2);
  Index at = 0;
  x.segment(at, n) = p.depth;
  at += n;
  x.segment(at, n) = p.log_uncertainty;
  at += n;
  for (int c = 0; c < 3; ++c) {
    x.segment(at, n) = p.dims.col(c);
    at += n;
  }
  for (int c = 0; c < kOrientationBins; ++c) {
    x.segment(at, n) = p.orient_conf.col(c);
    at += n;
  }
  for (int c = 0; c < kOrientationBins; ++c) {
    x.segment(at, n) = p.orient_resid.col(c);
    at += n;
  }
  x.segment(at, 2) = p.offset;
  return x;
}

inline CellPredictionsd unpack_predictions(const Eigen::VectorXd& x, Index rows, Index cols) {
  CellPredictionsd p = CellPredictionsd::Zero(rows, cols);
  const Index n = rows * cols;
  Index at = 0;
  p.depth = x.segment(at, n);
  at += n;
  p.log_uncertainty = x.segment(at, n);
  at += n;
  for (int c = 0; c < 3; ++c) {
    p.dims.col(c) = x.segment(at, n);
    at += n;
  }
  for (int c = 0; c < kOrientationBins; ++c) {
    p.orient_conf.col(c) = x.segment(at, n);
    at += n;
  }
  for (int c = 0; c < kOrientationBins; ++c) {
    p.orient_resid.col(c) = x.segment(at, n);
    at += n;
  }
  p.offset = x.segment(at, 2);
  return p;
}

}  // namespace detail

/// Gradient of the masked total loss w.r.t. every prediction entry, with the
/// sample map held fixed.
inline GradCheckResult check_masked_total(CellPredictionsd preds, const ObjectTargetsd& gt,
                                          const SampleMap<double>& map, bool normalize = true,
                                          double step = kDefaultFdStep) {
  preds.require_consistent();
  GradCheckResult res;
  const Index n = preds.size();
  const BinAssignment bin = assign_orientation_bin(gt.yaw);
  for (Index i = 0; i < n; ++i) {
    double moved = detail::nudge_away_from(preds.depth(i), gt.depth);
    res.kink_perturbed = res.kink_perturbed || moved != preds.depth(i);
    preds.depth(i) = moved;
    for (int c = 0; c < 3; ++c) {
      moved = detail::nudge_away_from(preds.dims(i, c), gt.dims(c));
      res.kink_perturbed = res.kink_perturbed || moved != preds.dims(i, c);
      preds.dims(i, c) = moved;
    }
    moved = detail::nudge_away_from(preds.orient_resid(i, bin.bin), bin.residual);
    res.kink_perturbed = res.kink_perturbed || moved != preds.orient_resid(i, bin.bin);
    preds.orient_resid(i, bin.bin) = moved;
  }
  for (int i = 0; i < 2; ++i) {
    double d = preds.offset(i) - gt.offset(i);
    for (double kink : {0.0, 1.0, -1.0}) {
      const double moved = detail::nudge_away_from(d, kink);
      res.kink_perturbed = res.kink_perturbed || moved != d;
      d = moved;
    }
    preds.offset(i) = gt.offset(i) + d;
  }

  const Index rows = preds.rows, cols = preds.cols;
  const auto f = [&](const Eigen::VectorXd& x) {
    const CellPredictionsd p = detail::unpack_predictions(x, rows, cols);
    return masked_total_loss(per_cell_losses(p, gt), map, normalize);
  };
  const Eigen::VectorXd numeric = fd_gradient(f, detail::pack_predictions(preds), step);
  const LossGradients<double> g =
      masked_total_gradients(preds, gt, map, per_cell_losses(preds, gt), normalize);
  CellPredictionsd analytic_as_preds = CellPredictionsd::Zero(rows, cols);
  analytic_as_preds.depth = g.depth;
  analytic_as_preds.log_uncertainty = g.log_uncertainty;
  analytic_as_preds.dims = g.dims;
  analytic_as_preds.orient_conf = g.orient_conf;
  analytic_as_preds.orient_resid = g.orient_resid;
  analytic_as_preds.offset = g.offset;
  const Eigen::VectorXd analytic = detail::pack_predictions(analytic_as_preds);
  for (Index i = 0; i < analytic.size(); ++i)
    res.max_rel_error = std::max(res.max_rel_error, relative_error(analytic(i), numeric(i)));
  return res;
}

/// Straight-through selection path: finite differences of
/// sum(upstream * retained soft map) over the logits with the retention
/// mask frozen, against sample_map_grad.
inline GradCheckResult check_straight_through(const GridXd& logits, const GridXd& noise,
                                              double temperature, const GridXd& upstream,
                                              double step = kDefaultFdStep) {
  GradCheckResult res;
  const Index rows = logits.rows(), cols = logits.cols();
  const SoftMap<double> soft = gumbel_softmax(logits, noise, temperature);
  const DividerResult<double> divider = relative_distance_divide(soft);
  const SampleMap<double> map = build_sample_map(soft, divider);
  const GridXd mask = (map.values != 0.0).cast<double>();

  const auto f = [&](const Eigen::VectorXd& x) {
    const GridXd grid = unflatten_rowmajor(FlatXd(x.array()), rows, cols);
    const SoftMap<double> s = gumbel_softmax(grid, noise, temperature);
    return (upstream * mask * s.values).sum();
  };
  const FlatXd flat = flatten_rowmajor(logits);
  const Eigen::VectorXd numeric = fd_gradient(f, flat.matrix(), step);
  const FlatXd analytic = flatten_rowmajor(GridXd(sample_map_grad(upstream, soft, map, temperature)));
  for (Index i = 0; i < analytic.size(); ++i)
    res.max_rel_error = std::max(res.max_rel_error, relative_error(analytic(i), numeric(i)));
  return res;
}

// ---------------------------------------------------------------------------
// Registry of checkable ops, used by the CLI and the acceptance suite.

struct OpReport {
  std::string op;
  int points = 0;
  double max_rel_error = 0.0;
  int kink_adjustments = 0;
};

inline const std::vector<std::string>& grad_check_ops() {
  static const std::vector<std::string> ops = {
      "gumbel_softmax", "depth_loss",   "dim_loss",        "offset_loss",
      "orientation_loss", "masked_total", "straight_through"};
  return ops;
}

namespace detail {

/// Draw from [lo, hi] staying at least kKinkRadius away from every kink.
template <class Engine>
double uniform_avoiding(Engine& rng, double lo, double hi, const std::vector<double>& kinks) {
  for (int attempt = 0; attempt < 256; ++attempt) {
    const double x = uniform_in(rng, lo, hi);
    bool clear = true;
    for (double k : kinks)
      if (std::abs(x - k) < 2.0 * kKinkRadius) clear = false;
    if (clear) return x;
  }
  throw std::runtime_error("uniform_avoiding: could not find a kink-free draw");
}

template <class Engine>
GridXd random_grid(Engine& rng, Index rows, Index cols, double lo, double hi) {
  GridXd g(rows, cols);
  for (Index r = 0; r < rows; ++r)
    for (Index c = 0; c < cols; ++c) g(r, c) = uniform_in(rng, lo, hi);
  return g;
}

}  // namespace detail

inline OpReport run_grad_check_op(const std::string& op, int points, double step,
                                  std::uint64_t seed) {
  OpReport report;
  report.op = op;
  report.points = points;
  Rng rng(mix_seed(seed, fnv1a64(op)));
  for (int p = 0; p < points; ++p) {
    GradCheckResult res;
    if (op == "depth_loss") {
      const double d_gt = detail::uniform_in(rng, 1.0, 50.0);
      const double d_pred = d_gt + detail::uniform_avoiding(rng, -5.0, 5.0, {0.0});
      const double u = detail::uniform_in(rng, -2.0, 2.0);
      res = check_depth_loss(d_pred, u, d_gt, step);
    } else if (op == "dim_loss") {
      Eigen::Vector3d gt, pred;
      for (int i = 0; i < 3; ++i) {
        gt(i) = detail::uniform_in(rng, 0.5, 4.0);
        pred(i) = gt(i) + detail::uniform_avoiding(rng, -1.0, 1.0, {0.0});
      }
      res = check_dim_loss(pred, gt, step);
    } else if (op == "offset_loss") {
      Eigen::Vector2d gt, pred;
      for (int i = 0; i < 2; ++i) {
        gt(i) = detail::uniform_in(rng, -2.0, 2.0);
        pred(i) = gt(i) + detail::uniform_avoiding(rng, -3.0, 3.0, {0.0, 1.0, -1.0});
      }
      res = check_offset_loss(pred, gt, step);
    } else if (op == "orientation_loss") {
      Eigen::Matrix<double, kOrientationBins, 1> conf, resid;
      for (int i = 0; i < kOrientationBins; ++i) {
        conf(i) = detail::uniform_in(rng, -3.0, 3.0);
        resid(i) = detail::uniform_in(rng, -0.4, 0.4);
      }
      const double theta = detail::uniform_in(rng, -kPi, kPi);
      const BinAssignment gt = assign_orientation_bin(theta);
      resid(gt.bin) = gt.residual + detail::uniform_avoiding(rng, -0.2, 0.2, {0.0});
      res = check_orientation_loss(conf, resid, theta, step);
    } else if (op == "gumbel_softmax") {
      const GridXd logits = detail::random_grid(rng, 7, 7, -5.0, 5.0);
      const GridXd noise = sample_gumbel_values<double>(7, 7, rng);
      res = check_gumbel_softmax_jacobian(logits, noise, 1.0, step);
    } else if (op == "masked_total") {
      const Index d = 3;
      const Index n = d * d;
      ObjectTargetsd gt;
      gt.depth = detail::uniform_in(rng, 5.0, 40.0);
      for (int i = 0; i < 3; ++i) gt.dims(i) = detail::uniform_in(rng, 0.5, 4.0);
      gt.yaw = detail::uniform_in(rng, -kPi, kPi);
      gt.offset << detail::uniform_in(rng, -1.0, 1.0), detail::uniform_in(rng, -1.0, 1.0);
      const BinAssignment bin = assign_orientation_bin(gt.yaw);
      CellPredictionsd preds = CellPredictionsd::Zero(d, d);
      for (Index i = 0; i < n; ++i) {
        preds.depth(i) = gt.depth + detail::uniform_avoiding(rng, -4.0, 4.0, {0.0});
        preds.log_uncertainty(i) = detail::uniform_in(rng, -1.5, 1.5);
        for (int c = 0; c < 3; ++c)
          preds.dims(i, c) = gt.dims(c) + detail::uniform_avoiding(rng, -1.0, 1.0, {0.0});
        for (int c = 0; c < kOrientationBins; ++c) {
          preds.orient_conf(i, c) = detail::uniform_in(rng, -3.0, 3.0);
          preds.orient_resid(i, c) = detail::uniform_in(rng, -0.4, 0.4);
        }
        preds.orient_resid(i, bin.bin) =
            bin.residual + detail::uniform_avoiding(rng, -0.2, 0.2, {0.0});
      }
      preds.offset << gt.offset(0) + detail::uniform_avoiding(rng, -3.0, 3.0, {0.0, 1.0, -1.0}),
          gt.offset(1) + detail::uniform_avoiding(rng, -3.0, 3.0, {0.0, 1.0, -1.0});
      const GridXd logits = detail::random_grid(rng, d, d, -2.0, 2.0);
      const SampleMap<double> map = lss_forward(logits, 1.0, rng).map;
      res = check_masked_total(preds, gt, map, true, step);
    } else if (op == "straight_through") {
      const GridXd logits = detail::random_grid(rng, 7, 7, -3.0, 3.0);
      const GridXd noise = sample_gumbel_values<double>(7, 7, rng);
      const GridXd upstream = detail::random_grid(rng, 7, 7, -1.0, 1.0);
      res = check_straight_through(logits, noise, 1.0, upstream, step);
    } else {
      throw std::invalid_argument("run_grad_check_op: unknown op '" + op + "'");
    }
    report.max_rel_error = std::max(report.max_rel_error, res.max_rel_error);
    if (res.kink_perturbed) ++report.kink_adjustments;
  }
  return report;
}

inline std::vector<OpReport> run_grad_checks(const std::vector<std::string>& ops, int points,
                                             double step, std::uint64_t seed) {
  std::vector<OpReport> reports;
  reports.reserve(ops.size());
  for (const std::string& op : ops) reports.push_back(run_grad_check_op(op, points, step, seed));
  return reports;
}

}  // namespace lss3d
