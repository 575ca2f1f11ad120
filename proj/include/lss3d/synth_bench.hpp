#pragma once

#include "lss3d/grid.hpp"
#include "lss3d/lss.hpp"
#include "lss3d/predictions.hpp"

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

namespace lss3d {

enum class Strategy { center1x1, grid3x3, grid5x5, all7x7, lss };

const char* to_string(Strategy s);
Strategy strategy_from_string(const std::string& name);

enum class PatternKind { full, bottom_half, random_blob, occluded_top_k };

/// One synthetic training object: a d x d grid of feature vectors where
/// support cells encode the ground-truth properties through a fixed linear
/// map and every other cell encodes an independent distractor object.
struct SynthObject {
  Eigen::MatrixXd features;  // (d*d) x F, row i = row-major cell i
  Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> support;  // d x d
  ObjectTargetsd gt;
  double distractor_depth = 0.0;
  Index grid = 0;
};

struct GenConfig {
  int grid = 7;
  int feature_dim = 8;
  double feature_scale = 1.0;
  double noise_sigma = 0.05;
  int count = 64;
  // Pattern family mixture (normalized at use).
  double weight_full = 0.0;
  double weight_bottom_half = 0.15;
  double weight_random_blob = 0.15;
  double weight_occluded = 0.70;
  int occluded_rows_min = 3;
  int occluded_rows_max = 5;
};

/// Ground-truth property priors, fixed for the whole benchmark.
inline constexpr double kDepthMid = 2.0, kDepthHalf = 1.0;  // depth in [1, 3] m
inline constexpr double kDimMid = 1.6, kDimHalf = 0.8;      // each dim in [0.8, 2.4] m

/// Fixed generative map with orthonormal columns (feature_dim x 5). The
/// five property coordinates are centered depth, centered dims, yaw / pi.
Eigen::MatrixXd generative_map(int feature_dim);

/// Fixed unit vector orthogonal to every generative_map column. Support
/// cells carry +visibility, distractor cells -visibility, making cell
/// visibility linearly readable the way image evidence distinguishes
/// visible from occluded regions; it carries no property information.
Eigen::VectorXd visibility_direction(int feature_dim);

/// Centered property vector of an object, the preimage of its support-cell
/// features under the generative map.
Eigen::Matrix<double, 5, 1> property_vector(const ObjectTargetsd& gt);

/// Least-squares decode of a single cell's feature vector back to the
/// property vector (the generative map's pseudo-inverse).
Eigen::Matrix<double, 5, 1> decode_properties(const Eigen::MatrixXd& map, double feature_scale,
                                              const Eigen::VectorXd& features);

std::vector<SynthObject> generate_scene(Rng& rng, const GenConfig& cfg);

/// Optimizer and selection knobs shared by every arm.
struct TrainParams {
  int epochs = 600;
  double learning_rate = 1e-2;
  double warmup_fraction = 0.3;
  double temperature = 1.0;
  bool binarize = false;
  bool normalize_masked = true;
  bool redraw_noise_per_step = true;
  // Predicted log uncertainty is clamped into this window; the lower edge
  // bounds the depth gradient scale so fixed-step subgradient descent keeps
  // a finite noise floor instead of sharpening without bound.
  double log_uncertainty_min = 0.0;
  double log_uncertainty_max = 4.0;
};

/// Per-seed outcome of one trained arm.
struct SeedRun {
  std::uint64_t seed = 0;
  bool diverged = false;
  double depth_mae = 0.0;
  double dims_mae = 0.0;
  double yaw_mae = 0.0;
  double offset_mae = 0.0;
  double support_overlap = -1.0;  // lss arms only; fraction of positives on support
  std::vector<double> train_depth_loss;  // per epoch, masked mean
  std::vector<double> train_total_loss;
  std::vector<int> warmup_epoch_flags;  // 1 while the warm-up gate is active
};

/// Train one strategy on `train`, evaluate on `val`. Fixed strategies use
/// static masks and their center cell (mean over all cells for all7x7) at
/// inference; lss trains a logit head through the straight-through
/// estimator and selects its argmax-logit cell.
SeedRun run_strategy(Strategy strategy, const std::vector<SynthObject>& train,
                     const std::vector<SynthObject>& val, const TrainParams& params, Rng& rng);

/// Blend disjoint random pairs of objects (lambda * a + (1 - lambda) * b
/// featurewise) and keep one entry per partner with that partner's mask and
/// targets. Returns the originals followed by the mixed entries.
std::vector<SynthObject> mixup_objects(const std::vector<SynthObject>& objects, double lambda,
                                       Rng& rng);

struct BenchConfig {
  std::vector<std::string> strategies = {"center1x1", "grid3x3", "grid5x5", "all7x7", "lss"};
  std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5};
  TrainParams train;
  GenConfig gen;
  int train_count = 64;
  int val_count = 64;
  bool run_warmup_ablation = true;
  bool run_mixup_ablation = true;
  // The mixup ablation trains the all7x7 head on a deliberately small,
  // fully supported, noisier dataset where augmentation is the only lever.
  GenConfig mixup_gen;
  int mixup_train_count = 8;
  int mixup_val_count = 64;
  int mixup_epochs = 800;
  double mixup_lambda = 0.5;
};

BenchConfig smoke_preset();
BenchConfig full_preset();

struct ArmResult {
  std::string name;
  std::vector<SeedRun> runs;
  double median_depth_mae = 0.0;
  double median_dims_mae = 0.0;
  double median_yaw_mae = 0.0;
  int degraded_count = 0;  // diverged or depth MAE above kDegradedDepthMae
};

/// A run counts as degraded when it diverged or its final depth MAE exceeds
/// this (roughly a third of the irreducible distractor-follow error).
inline constexpr double kDegradedDepthMae = 0.2;

struct BenchReport {
  std::vector<std::uint64_t> seeds;
  std::vector<ArmResult> arms;
  const ArmResult* find(const std::string& name) const;
};

/// Run the strategy comparison plus the warm-up and mixup ablations.
/// Deterministic given the seed list: every arm sees the same per-seed
/// dataset and its own derived rng stream.
BenchReport compare(const BenchConfig& cfg);

std::string bench_report_csv(const BenchReport& report, const std::string& config_hash);
nlohmann::json bench_report_json(const BenchReport& report, const std::string& config_hash);

double median(std::vector<double> values);

}  // namespace lss3d
