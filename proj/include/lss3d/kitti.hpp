#pragma once

#include <Eigen/Dense>

#include <string>
#include <string_view>
#include <vector>

namespace lss3d {

/// One object row of a KITTI-style label file: 15 whitespace-separated
/// fields per line.
struct Object3DLabel {
  std::string class_name;
  double truncation = 0.0;
  int occlusion = 0;
  double alpha = 0.0;
  Eigen::Vector4d bbox = Eigen::Vector4d::Zero();      // left, top, right, bottom
  Eigen::Vector3d dims = Eigen::Vector3d::Zero();      // h, w, l
  Eigen::Vector3d location = Eigen::Vector3d::Zero();  // x, y, z in camera frame
  double rotation_y = 0.0;
};

/// Left color camera projection matrix plus image size. fx/fy/cx/cy are
/// always read out of P, so they can never drift from it.
struct CameraIntrinsics {
  Eigen::Matrix<double, 3, 4> P = Eigen::Matrix<double, 3, 4>::Zero();
  int width = 0;
  int height = 0;
  double fx() const { return P(0, 0); }
  double fy() const { return P(1, 1); }
  double cx() const { return P(0, 2); }
  double cy() const { return P(1, 2); }
};

/// Parse one label line. `line_number` (1-based) is only used in error
/// messages. Throws std::runtime_error on malformed input.
Object3DLabel parse_label_line(std::string_view line, int line_number = 1);

/// Parse a whole label file body; blank lines are not allowed.
std::vector<Object3DLabel> parse_labels(std::string_view text);

/// Canonical serialization: two-decimal fixed-point reals, occlusion as a
/// bare integer, single spaces, one trailing newline per line. Values that
/// would print as "-0.00" are normalized to "0.00".
std::string serialize_label(const Object3DLabel& label);
std::string serialize_labels(const std::vector<Object3DLabel>& labels);

/// Read the P2 row of a KITTI calib file. Image size is not stored in calib
/// files; callers fill it in from the image.
CameraIntrinsics parse_calib(std::string_view text);
std::string serialize_calib(const CameraIntrinsics& intrinsics);

/// Project a camera-frame point through the full 3x4 matrix (the fourth
/// column's translation is part of the projection). Throws if the point is
/// at or behind the camera plane (z <= 0).
Eigen::Vector2d project_to_image(const Eigen::Vector3d& point, const CameraIntrinsics& intrinsics);

}  // namespace lss3d
