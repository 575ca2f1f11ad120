#include "lss3d/mixup3d.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <stdexcept>

namespace lss3d {

namespace {

bool relative_close(double a, double b, double tol) {
  const double denom = std::max(std::abs(a), 1e-30);
  return std::abs(a - b) / denom <= tol;
}

/// Marsaglia-Tsang gamma sampler (shape only); the alpha < 1 case is lifted
/// through Gamma(alpha + 1) with a uniform power boost.
double gamma_sample(double alpha, Rng& rng) {
  if (alpha < 1.0) {
    const double u = std::max(canonical_uniform(rng), 1e-300);
    return gamma_sample(alpha + 1.0, rng) * std::pow(u, 1.0 / alpha);
  }
  const double d = alpha - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x = 0.0, v = 0.0;
    do {
      x = standard_normal(rng);
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = std::max(canonical_uniform(rng), 1e-300);
    if (std::log(u) < 0.5 * x * x + d - d * v + d * std::log(v)) return d * v;
  }
}

double beta_sample(double alpha, Rng& rng) {
  const double a = gamma_sample(alpha, rng);
  const double b = gamma_sample(alpha, rng);
  return a / (a + b);
}

std::uint8_t blend_channel(std::uint8_t a, std::uint8_t b, double lambda) {
  const double v = lambda * a + (1.0 - lambda) * b;
  // round half to even
  const double floor_v = std::floor(v);
  const double frac = v - floor_v;
  double rounded;
  if (frac > 0.5) {
    rounded = floor_v + 1.0;
  } else if (frac < 0.5) {
    rounded = floor_v;
  } else {
    rounded = (std::fmod(floor_v, 2.0) == 0.0) ? floor_v : floor_v + 1.0;
  }
  return static_cast<std::uint8_t>(std::clamp(rounded, 0.0, 255.0));
}

}  // namespace

CompatibilityCheck check_compatible(const CameraIntrinsics& a, const CameraIntrinsics& b,
                                    double tolerance) {
  CompatibilityCheck result;
  if (!relative_close(a.fx(), b.fx(), tolerance) || !relative_close(a.fy(), b.fy(), tolerance))
    result.violations.push_back("focal_length");
  if (!relative_close(a.cx(), b.cx(), tolerance) || !relative_close(a.cy(), b.cy(), tolerance))
    result.violations.push_back("principal_point");
  if (a.width != b.width || a.height != b.height) result.violations.push_back("resolution");
  result.ok = result.violations.empty();
  return result;
}

Image8 mix_images(const Image8& a, const Image8& b, double lambda) {
  if (!a.same_shape(b)) throw std::invalid_argument("mix_images: dimension mismatch");
  if (!(lambda > 0.0) || !(lambda < 1.0))
    throw std::invalid_argument("mix_images: lambda must lie strictly inside (0, 1)");
  Image8 out = a;
  for (std::size_t i = 0; i < out.pixels.size(); ++i)
    out.pixels[i] = blend_channel(a.pixels[i], b.pixels[i], lambda);
  return out;
}

std::vector<Object3DLabel> mix_labels(const std::vector<Object3DLabel>& a,
                                      const std::vector<Object3DLabel>& b) {
  std::vector<Object3DLabel> out = a;
  out.insert(out.end(), b.begin(), b.end());
  return out;
}

double sample_lambda(const MixConfig& cfg, Rng& rng) {
  if (cfg.lambda_policy == LambdaPolicy::fixed) {
    if (!(cfg.lambda > 0.0) || !(cfg.lambda < 1.0))
      throw std::invalid_argument("sample_lambda: fixed lambda must lie strictly inside (0, 1)");
    return cfg.lambda;
  }
  if (!(cfg.beta_alpha > 0.0))
    throw std::invalid_argument("sample_lambda: beta alpha must be positive");
  for (int attempt = 0; attempt < 10000; ++attempt) {
    const double lambda = beta_sample(cfg.beta_alpha, rng);
    if (lambda >= 0.3 && lambda <= 0.7) return lambda;
  }
  throw std::runtime_error("sample_lambda: beta rejection sampling failed to land in [0.3, 0.7]");
}

AugmentResult augment_dataset(const std::vector<Scene>& scenes, const MixConfig& cfg, Rng& rng) {
  if (scenes.size() < 2) throw std::invalid_argument("augment_dataset: need at least 2 scenes");
  for (const Scene& s : scenes) {
    if (s.image.width != s.intrinsics.width || s.image.height != s.intrinsics.height)
      throw std::invalid_argument("augment_dataset: scene '" + s.id +
                                  "' image size does not match its intrinsics");
  }

  // Group into compatibility classes; each class is represented by its first
  // scene.
  std::vector<std::vector<std::size_t>> classes;
  std::vector<std::size_t> class_of(scenes.size());
  for (std::size_t i = 0; i < scenes.size(); ++i) {
    bool placed = false;
    for (std::size_t k = 0; k < classes.size() && !placed; ++k) {
      const Scene& rep = scenes[classes[k].front()];
      if (check_compatible(rep.intrinsics, scenes[i].intrinsics, cfg.intrinsics_tolerance).ok) {
        classes[k].push_back(i);
        class_of[i] = k;
        placed = true;
      }
    }
    if (!placed) {
      class_of[i] = classes.size();
      classes.push_back({i});
    }
  }

  AugmentResult result;
  result.scenes.reserve(scenes.size());
  for (std::size_t i = 0; i < scenes.size(); ++i) {
    const std::vector<std::size_t>& members = classes[class_of[i]];
    if (members.size() < 2) {
      result.scenes.push_back(scenes[i]);
      result.passthrough.push_back(scenes[i].id);
      for (std::size_t k = 0; k < classes.size(); ++k) {
        if (k == class_of[i]) continue;
        const Scene& rep = scenes[classes[k].front()];
        MixRejection rejection;
        rejection.primary = scenes[i].id;
        rejection.candidate = rep.id;
        rejection.violations =
            check_compatible(scenes[i].intrinsics, rep.intrinsics, cfg.intrinsics_tolerance)
                .violations;
        result.rejections.push_back(std::move(rejection));
      }
      continue;
    }
    // Partner drawn uniformly among the other class members.
    std::vector<std::size_t> others;
    others.reserve(members.size() - 1);
    for (std::size_t m : members)
      if (m != i) others.push_back(m);
    const std::size_t pick =
        static_cast<std::size_t>(canonical_uniform(rng) * static_cast<double>(others.size()));
    const std::size_t partner = others[std::min(pick, others.size() - 1)];
    const double lambda = sample_lambda(cfg, rng);
    Scene mixed;
    mixed.id = scenes[i].id;
    mixed.intrinsics = scenes[i].intrinsics;
    mixed.image = mix_images(scenes[i].image, scenes[partner].image, lambda);
    mixed.labels = mix_labels(scenes[i].labels, scenes[partner].labels);
    result.scenes.push_back(std::move(mixed));
    result.pairs.push_back({scenes[i].id, scenes[partner].id, lambda});
  }
  return result;
}

nlohmann::json mixup_report_json(const AugmentResult& result, const MixConfig& cfg) {
  nlohmann::json report;
  report["lambda_policy"] = cfg.lambda_policy == LambdaPolicy::fixed ? "fixed" : "beta";
  if (cfg.lambda_policy == LambdaPolicy::fixed)
    report["lambda"] = cfg.lambda;
  else
    report["beta_alpha"] = cfg.beta_alpha;
  report["intrinsics_tolerance"] = cfg.intrinsics_tolerance;
  report["pairs"] = nlohmann::json::array();
  for (const MixPairRecord& p : result.pairs)
    report["pairs"].push_back({{"primary", p.primary}, {"partner", p.partner}, {"lambda", p.lambda}});
  report["passthrough"] = result.passthrough;
  report["rejections"] = nlohmann::json::array();
  for (const MixRejection& r : result.rejections)
    report["rejections"].push_back(
        {{"primary", r.primary}, {"candidate", r.candidate}, {"violations", r.violations}});
  return report;
}

std::vector<Scene> load_scene_dir(const std::string& dir) {
  namespace fs = std::filesystem;
  const fs::path root(dir);
  const fs::path label_dir = root / "label_2";
  if (!fs::is_directory(label_dir))
    throw std::runtime_error("load_scene_dir: missing directory " + label_dir.string());
  std::vector<std::string> ids;
  for (const fs::directory_entry& entry : fs::directory_iterator(label_dir))
    if (entry.is_regular_file() && entry.path().extension() == ".txt")
      ids.push_back(entry.path().stem().string());
  std::sort(ids.begin(), ids.end());
  std::vector<Scene> scenes;
  scenes.reserve(ids.size());
  for (const std::string& id : ids) {
    Scene scene;
    scene.id = id;
    scene.labels = parse_labels(read_text_file((root / "label_2" / (id + ".txt")).string()));
    scene.intrinsics = parse_calib(read_text_file((root / "calib" / (id + ".txt")).string()));
    scene.image = read_ppm((root / "image_2" / (id + ".ppm")).string());
    scene.intrinsics.width = scene.image.width;
    scene.intrinsics.height = scene.image.height;
    scenes.push_back(std::move(scene));
  }
  return scenes;
}

void write_scene_dir(const std::string& dir, const std::vector<Scene>& scenes) {
  namespace fs = std::filesystem;
  const fs::path root(dir);
  fs::create_directories(root / "image_2");
  fs::create_directories(root / "label_2");
  fs::create_directories(root / "calib");
  for (const Scene& scene : scenes) {
    write_text_file((root / "label_2" / (scene.id + ".txt")).string(), serialize_labels(scene.labels));
    write_text_file((root / "calib" / (scene.id + ".txt")).string(), serialize_calib(scene.intrinsics));
    write_ppm((root / "image_2" / (scene.id + ".ppm")).string(), scene.image);
  }
}

}  // namespace lss3d
