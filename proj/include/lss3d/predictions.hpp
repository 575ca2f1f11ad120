#pragma once

#include "lss3d/grid.hpp"

#include <stdexcept>

namespace lss3d {

inline constexpr int kOrientationBins = 12;

/// Dense per-cell regression outputs for one object's ROI grid. Cell i of
/// the row-major flattening corresponds to row i of each matrix. The offset
/// head is per object, not per cell.
template <typename Scalar = double>
struct CellPredictions {
  Index rows = 0;
  Index cols = 0;
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> depth;
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> log_uncertainty;
  Eigen::Matrix<Scalar, Eigen::Dynamic, 3> dims;  // columns: h, w, l
  Eigen::Matrix<Scalar, Eigen::Dynamic, kOrientationBins> orient_conf;
  Eigen::Matrix<Scalar, Eigen::Dynamic, kOrientationBins> orient_resid;
  Eigen::Matrix<Scalar, 2, 1> offset = Eigen::Matrix<Scalar, 2, 1>::Zero();

  Index size() const { return rows * cols; }

  static CellPredictions Zero(Index rows, Index cols) {
    CellPredictions p;
    p.rows = rows;
    p.cols = cols;
    const Index n = rows * cols;
    p.depth.setZero(n);
    p.log_uncertainty.setZero(n);
    p.dims.setZero(n, 3);
    p.orient_conf.setZero(n, kOrientationBins);
    p.orient_resid.setZero(n, kOrientationBins);
    return p;
  }

  void require_consistent() const {
    const Index n = size();
    if (n < 1) throw std::invalid_argument("CellPredictions: empty grid");
    if (depth.size() != n || log_uncertainty.size() != n || dims.rows() != n ||
        orient_conf.rows() != n || orient_resid.rows() != n)
      throw std::invalid_argument("CellPredictions: per-cell row counts do not match grid size");
  }
};

/// Ground-truth regression targets for one object.
template <typename Scalar = double>
struct ObjectTargets {
  Scalar depth = Scalar(0);
  Eigen::Matrix<Scalar, 3, 1> dims = Eigen::Matrix<Scalar, 3, 1>::Zero();  // h, w, l
  Scalar yaw = Scalar(0);
  Eigen::Matrix<Scalar, 2, 1> offset = Eigen::Matrix<Scalar, 2, 1>::Zero();
};

using CellPredictionsd = CellPredictions<double>;
using ObjectTargetsd = ObjectTargets<double>;

}  // namespace lss3d
