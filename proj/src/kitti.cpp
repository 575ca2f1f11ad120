#include "lss3d/kitti.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <stdexcept>

namespace lss3d {

namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
    if (i > start) fields.push_back(line.substr(start, i - start));
  }
  return fields;
}

[[noreturn]] void fail(int line_number, const std::string& what) {
  throw std::runtime_error("label line " + std::to_string(line_number) + ": " + what);
}

double parse_real(std::string_view token, int line_number, int field) {
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc() || ptr != token.data() + token.size())
    fail(line_number, "field " + std::to_string(field) + " ('" + std::string(token) + "') is not numeric");
  return value;
}

int parse_occlusion(std::string_view token, int line_number, int field) {
  const double value = parse_real(token, line_number, field);
  if (value != std::floor(value))
    fail(line_number, "field " + std::to_string(field) + " (occlusion) must be an integer");
  return static_cast<int>(value);
}

/// Two-decimal fixed-point with "-0.00" folded to "0.00".
void append_real(std::string& out, double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f", value);
  const char* s = buf;
  if (std::strncmp(buf, "-0.00", 6) == 0) s = buf + 1;
  out += s;
}

}  // namespace

Object3DLabel parse_label_line(std::string_view line, int line_number) {
  const std::vector<std::string_view> fields = split_fields(line);
  if (fields.size() != 15)
    fail(line_number, "expected 15 fields, got " + std::to_string(fields.size()));
  Object3DLabel label;
  label.class_name = std::string(fields[0]);
  label.truncation = parse_real(fields[1], line_number, 2);
  label.occlusion = parse_occlusion(fields[2], line_number, 3);
  label.alpha = parse_real(fields[3], line_number, 4);
  for (int i = 0; i < 4; ++i) label.bbox(i) = parse_real(fields[4 + i], line_number, 5 + i);
  for (int i = 0; i < 3; ++i) label.dims(i) = parse_real(fields[8 + i], line_number, 9 + i);
  for (int i = 0; i < 3; ++i) label.location(i) = parse_real(fields[11 + i], line_number, 12 + i);
  label.rotation_y = parse_real(fields[14], line_number, 15);
  return label;
}

std::vector<Object3DLabel> parse_labels(std::string_view text) {
  std::vector<Object3DLabel> labels;
  int line_number = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    const std::string_view line = text.substr(start, end - start);
    ++line_number;
    const bool last = end == text.size();
    if (last && split_fields(line).empty()) break;  // trailing newline
    labels.push_back(parse_label_line(line, line_number));
    if (last) break;
    start = end + 1;
  }
  return labels;
}

std::string serialize_label(const Object3DLabel& label) {
  std::string out = label.class_name;
  out += ' ';
  append_real(out, label.truncation);
  out += ' ';
  out += std::to_string(label.occlusion);
  out += ' ';
  append_real(out, label.alpha);
  for (int i = 0; i < 4; ++i) {
    out += ' ';
    append_real(out, label.bbox(i));
  }
  for (int i = 0; i < 3; ++i) {
    out += ' ';
    append_real(out, label.dims(i));
  }
  for (int i = 0; i < 3; ++i) {
    out += ' ';
    append_real(out, label.location(i));
  }
  out += ' ';
  append_real(out, label.rotation_y);
  out += '\n';
  return out;
}

std::string serialize_labels(const std::vector<Object3DLabel>& labels) {
  std::string out;
  for (const Object3DLabel& label : labels) out += serialize_label(label);
  return out;
}

CameraIntrinsics parse_calib(std::string_view text) {
  std::size_t start = 0;
  int line_number = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    const std::string_view line = text.substr(start, end - start);
    ++line_number;
    const std::vector<std::string_view> fields = split_fields(line);
    if (!fields.empty() && fields[0] == "P2:") {
      if (fields.size() != 13)
        throw std::runtime_error("calib line " + std::to_string(line_number) +
                                 ": P2 expects 12 values, got " + std::to_string(fields.size() - 1));
      CameraIntrinsics intrinsics;
      for (int i = 0; i < 12; ++i) {
        double value = 0.0;
        const std::string_view token = fields[static_cast<std::size_t>(1 + i)];
        const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
        if (ec != std::errc() || ptr != token.data() + token.size())
          throw std::runtime_error("calib line " + std::to_string(line_number) + ": value " +
                                   std::to_string(i + 1) + " ('" + std::string(token) +
                                   "') is not numeric");
        intrinsics.P(i / 4, i % 4) = value;
      }
      return intrinsics;
    }
    if (end == text.size()) break;
    start = end + 1;
  }
  throw std::runtime_error("calib: missing P2 row");
}

std::string serialize_calib(const CameraIntrinsics& intrinsics) {
  std::string out = "P2:";
  char buf[64];
  for (int i = 0; i < 12; ++i) {
    std::snprintf(buf, sizeof buf, " %.12e", intrinsics.P(i / 4, i % 4));
    out += buf;
  }
  out += '\n';
  return out;
}

Eigen::Vector2d project_to_image(const Eigen::Vector3d& point, const CameraIntrinsics& intrinsics) {
  if (!(point.z() > 0.0))
    throw std::runtime_error("project_to_image: point is behind the camera (z <= 0)");
  const Eigen::Vector3d h = intrinsics.P * point.homogeneous();
  if (h.z() <= 0.0)
    throw std::runtime_error("project_to_image: projected point is behind the image plane");
  return {h.x() / h.z(), h.y() / h.z()};
}

}  // namespace lss3d
