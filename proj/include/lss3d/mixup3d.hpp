#pragma once

#include "lss3d/grid.hpp"
#include "lss3d/image.hpp"
#include "lss3d/kitti.hpp"

#include <string>
#include <vector>

#include <json.hpp>

namespace lss3d {

/// One dataset entry: raster, calibration, labels.
struct Scene {
  std::string id;
  Image8 image;
  CameraIntrinsics intrinsics;
  std::vector<Object3DLabel> labels;
};

enum class LambdaPolicy { fixed, beta };

struct MixConfig {
  LambdaPolicy lambda_policy = LambdaPolicy::fixed;
  double lambda = 0.5;      // fixed policy; must lie strictly inside (0, 1)
  double beta_alpha = 2.0;  // beta policy: Beta(alpha, alpha) restricted to [0.3, 0.7]
  double intrinsics_tolerance = 1e-3;
};

/// Result of the imaging-constraint gate. Violations are data, not faults.
struct CompatibilityCheck {
  bool ok = true;
  std::vector<std::string> violations;  // "focal_length", "principal_point", "resolution"
};

CompatibilityCheck check_compatible(const CameraIntrinsics& a, const CameraIntrinsics& b,
                                    double tolerance);

/// Pixelwise convex blend lambda * a + (1 - lambda) * b, rounded
/// half-to-even back to 8 bits.
Image8 mix_images(const Image8& a, const Image8& b, double lambda);

/// Label union: a's labels then b's, bit-identical records, no
/// deduplication.
std::vector<Object3DLabel> mix_labels(const std::vector<Object3DLabel>& a,
                                      const std::vector<Object3DLabel>& b);

/// Draw lambda under the configured policy. The beta policy rejection-samples
/// Beta(alpha, alpha) into [0.3, 0.7].
double sample_lambda(const MixConfig& cfg, Rng& rng);

struct MixPairRecord {
  std::string primary;
  std::string partner;
  double lambda = 0.0;
};

struct MixRejection {
  std::string primary;
  std::string candidate;
  std::vector<std::string> violations;
};

struct AugmentResult {
  std::vector<Scene> scenes;  // one output per input scene, same ids and order
  std::vector<MixPairRecord> pairs;
  std::vector<std::string> passthrough;
  std::vector<MixRejection> rejections;
};

/// Group scenes into intrinsics-compatibility classes, then mix each scene
/// once as primary with a partner sampled uniformly from its class. Scenes
/// whose class has no other member pass through unmixed; for each such scene
/// one rejection record per other class (represented by its first scene) is
/// emitted with the violated constraints.
AugmentResult augment_dataset(const std::vector<Scene>& scenes, const MixConfig& cfg, Rng& rng);

nlohmann::json mixup_report_json(const AugmentResult& result, const MixConfig& cfg);

/// KITTI directory layout: image_2/<id>.ppm, label_2/<id>.txt,
/// calib/<id>.txt. Scenes are discovered via label_2 and returned sorted by
/// id.
std::vector<Scene> load_scene_dir(const std::string& dir);
void write_scene_dir(const std::string& dir, const std::vector<Scene>& scenes);

}  // namespace lss3d
