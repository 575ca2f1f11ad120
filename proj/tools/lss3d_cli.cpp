// Command-line front end: reproducible runs of the gradient-check suite, the
// synthetic selection benchmark, the dataset mixing pipeline, and a soft/sample
// map inspector. Every subcommand is driven by an effective JSON config
// (file + flag overrides, flags win) whose FNV-1a hash heads every report.

#include "lss3d/grad_check.hpp"
#include "lss3d/grid.hpp"
#include "lss3d/gumbel.hpp"
#include "lss3d/lss.hpp"
#include "lss3d/mixup3d.hpp"
#include "lss3d/synth_bench.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

json load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw ConfigError("config file '" + path + "': " + e.what());
  }
  if (!doc.is_object()) throw ConfigError("config file '" + path + "' must hold a JSON object");
  return doc;
}

void check_keys(const json& obj, const std::vector<std::string>& allowed,
                const std::string& scope) {
  for (const auto& [key, value] : obj.items()) {
    (void)value;
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
      throw ConfigError("unknown key '" + key + "' in " + scope);
  }
}

template <typename T>
void read_key(const json& obj, const char* key, T& out) {
  if (!obj.contains(key)) return;
  try {
    out = obj.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad value for '") + key + "': " + e.what());
  }
}

std::string hash_hex(const json& doc) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(lss3d::fnv1a64(doc.dump())));
  return buf;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  out << content;
  if (!out) throw std::runtime_error("failed writing '" + path.string() + "'");
}

fs::path ensure_out_dir(const std::string& out) {
  fs::path dir(out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec && !fs::is_directory(dir))
    throw ConfigError("cannot create output directory '" + out + "': " + ec.message());
  return dir;
}

// ---------------------------------------------------------------- gradcheck

struct GradcheckConfig {
  std::vector<std::string> ops = lss3d::grad_check_ops();
  int points = 100;
  double step = lss3d::kDefaultFdStep;
  double tolerance = 1e-6;
  std::uint64_t seed = 1;
};

json gradcheck_config_json(const GradcheckConfig& cfg) {
  json doc;
  doc["ops"] = cfg.ops;
  doc["points"] = cfg.points;
  doc["step"] = cfg.step;
  doc["tolerance"] = cfg.tolerance;
  doc["seed"] = cfg.seed;
  return doc;
}

int cmd_gradcheck(const GradcheckConfig& cfg, const std::string& out) {
  for (const std::string& op : cfg.ops) {
    const auto& known = lss3d::grad_check_ops();
    if (std::find(known.begin(), known.end(), op) == known.end())
      throw ConfigError("unknown gradient-check op '" + op + "'");
  }
  if (cfg.points < 1) throw ConfigError("points must be positive");
  if (!(cfg.step > 0.0)) throw ConfigError("step must be positive");
  if (!(cfg.tolerance > 0.0)) throw ConfigError("tolerance must be positive");

  const json config = gradcheck_config_json(cfg);
  const std::string hash = hash_hex(config);
  const std::vector<lss3d::OpReport> reports =
      lss3d::run_grad_checks(cfg.ops, cfg.points, cfg.step, cfg.seed);

  bool pass = true;
  json doc;
  doc["config_hash"] = hash;
  doc["seeds"] = std::vector<std::uint64_t>{cfg.seed};
  doc["tolerance"] = cfg.tolerance;
  doc["ops"] = json::array();
  std::printf("# config_hash=%s\n# seeds=%llu\n", hash.c_str(),
              static_cast<unsigned long long>(cfg.seed));
  for (const lss3d::OpReport& report : reports) {
    const bool op_pass = report.max_rel_error < cfg.tolerance;
    pass = pass && op_pass;
    std::printf("%-18s points=%-4d kink_adjustments=%-3d max_rel_error=%.3e %s\n",
                report.op.c_str(), report.points, report.kink_adjustments, report.max_rel_error,
                op_pass ? "PASS" : "FAIL");
    json entry;
    entry["op"] = report.op;
    entry["points"] = report.points;
    entry["kink_adjustments"] = report.kink_adjustments;
    entry["max_rel_error"] = report.max_rel_error;
    entry["pass"] = op_pass;
    doc["ops"].push_back(std::move(entry));
  }
  doc["pass"] = pass;
  std::printf("gradcheck: %s (tolerance %.3e)\n", pass ? "PASS" : "FAIL", cfg.tolerance);
  if (!out.empty())
    write_file(ensure_out_dir(out) / "gradcheck_report.json", doc.dump(2) + "\n");
  return pass ? 0 : 1;
}

// -------------------------------------------------------------------- bench

void apply_gen_config(const json& obj, const std::string& scope, lss3d::GenConfig& gen) {
  check_keys(obj,
             {"grid", "feature_dim", "feature_scale", "noise_sigma", "weight_full",
              "weight_bottom_half", "weight_random_blob", "weight_occluded", "occluded_rows_min",
              "occluded_rows_max"},
             scope);
  read_key(obj, "grid", gen.grid);
  read_key(obj, "feature_dim", gen.feature_dim);
  read_key(obj, "feature_scale", gen.feature_scale);
  read_key(obj, "noise_sigma", gen.noise_sigma);
  read_key(obj, "weight_full", gen.weight_full);
  read_key(obj, "weight_bottom_half", gen.weight_bottom_half);
  read_key(obj, "weight_random_blob", gen.weight_random_blob);
  read_key(obj, "weight_occluded", gen.weight_occluded);
  read_key(obj, "occluded_rows_min", gen.occluded_rows_min);
  read_key(obj, "occluded_rows_max", gen.occluded_rows_max);
}

void apply_train_config(const json& obj, lss3d::TrainParams& train) {
  check_keys(obj,
             {"epochs", "learning_rate", "warmup_fraction", "temperature", "binarize",
              "normalize_masked", "redraw_noise_per_step", "log_uncertainty_min",
              "log_uncertainty_max"},
             "train");
  read_key(obj, "epochs", train.epochs);
  read_key(obj, "learning_rate", train.learning_rate);
  read_key(obj, "warmup_fraction", train.warmup_fraction);
  read_key(obj, "temperature", train.temperature);
  read_key(obj, "binarize", train.binarize);
  read_key(obj, "normalize_masked", train.normalize_masked);
  read_key(obj, "redraw_noise_per_step", train.redraw_noise_per_step);
  read_key(obj, "log_uncertainty_min", train.log_uncertainty_min);
  read_key(obj, "log_uncertainty_max", train.log_uncertainty_max);
}

void apply_bench_config(const json& obj, lss3d::BenchConfig& cfg) {
  check_keys(obj,
             {"strategies", "seeds", "train", "gen", "train_count", "val_count",
              "run_warmup_ablation", "run_mixup_ablation", "mixup_gen", "mixup_train_count",
              "mixup_val_count", "mixup_epochs", "mixup_lambda"},
             "bench config");
  read_key(obj, "strategies", cfg.strategies);
  read_key(obj, "seeds", cfg.seeds);
  if (obj.contains("train")) apply_train_config(obj.at("train"), cfg.train);
  if (obj.contains("gen")) apply_gen_config(obj.at("gen"), "gen", cfg.gen);
  read_key(obj, "train_count", cfg.train_count);
  read_key(obj, "val_count", cfg.val_count);
  read_key(obj, "run_warmup_ablation", cfg.run_warmup_ablation);
  read_key(obj, "run_mixup_ablation", cfg.run_mixup_ablation);
  if (obj.contains("mixup_gen")) apply_gen_config(obj.at("mixup_gen"), "mixup_gen", cfg.mixup_gen);
  read_key(obj, "mixup_train_count", cfg.mixup_train_count);
  read_key(obj, "mixup_val_count", cfg.mixup_val_count);
  read_key(obj, "mixup_epochs", cfg.mixup_epochs);
  read_key(obj, "mixup_lambda", cfg.mixup_lambda);
}

json gen_config_json(const lss3d::GenConfig& gen) {
  json doc;
  doc["grid"] = gen.grid;
  doc["feature_dim"] = gen.feature_dim;
  doc["feature_scale"] = gen.feature_scale;
  doc["noise_sigma"] = gen.noise_sigma;
  doc["weight_full"] = gen.weight_full;
  doc["weight_bottom_half"] = gen.weight_bottom_half;
  doc["weight_random_blob"] = gen.weight_random_blob;
  doc["weight_occluded"] = gen.weight_occluded;
  doc["occluded_rows_min"] = gen.occluded_rows_min;
  doc["occluded_rows_max"] = gen.occluded_rows_max;
  return doc;
}

json bench_config_json(const lss3d::BenchConfig& cfg) {
  json doc;
  doc["strategies"] = cfg.strategies;
  doc["seeds"] = cfg.seeds;
  json train;
  train["epochs"] = cfg.train.epochs;
  train["learning_rate"] = cfg.train.learning_rate;
  train["warmup_fraction"] = cfg.train.warmup_fraction;
  train["temperature"] = cfg.train.temperature;
  train["binarize"] = cfg.train.binarize;
  train["normalize_masked"] = cfg.train.normalize_masked;
  train["redraw_noise_per_step"] = cfg.train.redraw_noise_per_step;
  train["log_uncertainty_min"] = cfg.train.log_uncertainty_min;
  train["log_uncertainty_max"] = cfg.train.log_uncertainty_max;
  doc["train"] = std::move(train);
  doc["gen"] = gen_config_json(cfg.gen);
  doc["train_count"] = cfg.train_count;
  doc["val_count"] = cfg.val_count;
  doc["run_warmup_ablation"] = cfg.run_warmup_ablation;
  doc["run_mixup_ablation"] = cfg.run_mixup_ablation;
  doc["mixup_gen"] = gen_config_json(cfg.mixup_gen);
  doc["mixup_train_count"] = cfg.mixup_train_count;
  doc["mixup_val_count"] = cfg.mixup_val_count;
  doc["mixup_epochs"] = cfg.mixup_epochs;
  doc["mixup_lambda"] = cfg.mixup_lambda;
  return doc;
}

int cmd_bench(const lss3d::BenchConfig& cfg, const std::string& out) {
  for (const std::string& name : cfg.strategies) lss3d::strategy_from_string(name);
  const json config = bench_config_json(cfg);
  const std::string hash = hash_hex(config);
  const fs::path out_dir = ensure_out_dir(out);

  const lss3d::BenchReport report = lss3d::compare(cfg);

  write_file(out_dir / "bench_report.csv", lss3d::bench_report_csv(report, hash));
  json doc = lss3d::bench_report_json(report, hash);
  doc["config"] = config;
  write_file(out_dir / "bench_report.json", doc.dump(2) + "\n");

  std::printf("# config_hash=%s\n", hash.c_str());
  std::printf("%-14s %12s %12s %12s %9s\n", "arm", "depth_mae", "dims_mae", "yaw_mae",
              "degraded");
  for (const lss3d::ArmResult& arm : report.arms)
    std::printf("%-14s %12.5f %12.5f %12.5f %6d/%-2d\n", arm.name.c_str(), arm.median_depth_mae,
                arm.median_dims_mae, arm.median_yaw_mae, arm.degraded_count,
                static_cast<int>(arm.runs.size()));
  std::printf("reports written to %s\n", out_dir.string().c_str());
  return 0;
}

// ------------------------------------------------------------------ augment

struct AugmentConfig {
  std::string input;
  lss3d::MixConfig mix;
  std::uint64_t seed = 1;
};

void apply_augment_config(const json& obj, AugmentConfig& cfg) {
  check_keys(obj, {"input", "lambda_policy", "lambda", "beta_alpha", "intrinsics_tolerance", "seed"},
             "augment config");
  read_key(obj, "input", cfg.input);
  if (obj.contains("lambda_policy")) {
    const std::string policy = obj.at("lambda_policy").get<std::string>();
    if (policy == "fixed")
      cfg.mix.lambda_policy = lss3d::LambdaPolicy::fixed;
    else if (policy == "beta")
      cfg.mix.lambda_policy = lss3d::LambdaPolicy::beta;
    else
      throw ConfigError("lambda_policy must be 'fixed' or 'beta', got '" + policy + "'");
  }
  read_key(obj, "lambda", cfg.mix.lambda);
  read_key(obj, "beta_alpha", cfg.mix.beta_alpha);
  read_key(obj, "intrinsics_tolerance", cfg.mix.intrinsics_tolerance);
  read_key(obj, "seed", cfg.seed);
}

json augment_config_json(const AugmentConfig& cfg) {
  json doc;
  doc["input"] = cfg.input;
  doc["lambda_policy"] = cfg.mix.lambda_policy == lss3d::LambdaPolicy::fixed ? "fixed" : "beta";
  doc["lambda"] = cfg.mix.lambda;
  doc["beta_alpha"] = cfg.mix.beta_alpha;
  doc["intrinsics_tolerance"] = cfg.mix.intrinsics_tolerance;
  doc["seed"] = cfg.seed;
  return doc;
}

int cmd_augment(const AugmentConfig& cfg, const std::string& out) {
  if (cfg.input.empty()) throw ConfigError("augment needs an input directory ('input' key or positional)");
  if (out.empty()) throw ConfigError("augment needs --out");
  for (const char* sub : {"image_2", "label_2", "calib"})
    if (!fs::is_directory(fs::path(cfg.input) / sub))
      throw ConfigError("input directory '" + cfg.input + "' lacks subdirectory '" + sub + "'");

  const json config = augment_config_json(cfg);
  const std::string hash = hash_hex(config);
  const fs::path out_dir = ensure_out_dir(out);

  const std::vector<lss3d::Scene> scenes = lss3d::load_scene_dir(cfg.input);
  lss3d::Rng rng(cfg.seed);
  const lss3d::AugmentResult result = lss3d::augment_dataset(scenes, cfg.mix, rng);
  lss3d::write_scene_dir(out_dir.string(), result.scenes);

  json doc = lss3d::mixup_report_json(result, cfg.mix);
  doc["config_hash"] = hash;
  doc["seeds"] = std::vector<std::uint64_t>{cfg.seed};
  write_file(out_dir / "mixup_report.json", doc.dump(2) + "\n");

  std::printf("# config_hash=%s\n", hash.c_str());
  std::printf("scenes=%zu mixed_pairs=%zu passthrough=%zu rejections=%zu\n", result.scenes.size(),
              result.pairs.size(), result.passthrough.size(), result.rejections.size());
  std::printf("augmented dataset written to %s\n", out_dir.string().c_str());
  return 0;
}

// ------------------------------------------------------------------ inspect

struct InspectConfig {
  std::vector<double> logits;   // row-major; empty → random rows x cols
  std::string logits_file;
  int rows = 0;                 // 0 → inferred (1 x N for explicit logits, 7 x 7 random)
  int cols = 0;
  double temperature = 1.0;
  std::string noise = "zero";   // "zero" | "gumbel"
  bool binarize = false;
  std::uint64_t seed = 1;
};

void apply_inspect_config(const json& obj, InspectConfig& cfg) {
  check_keys(obj,
             {"logits", "logits_file", "rows", "cols", "temperature", "noise", "binarize", "seed"},
             "inspect config");
  read_key(obj, "logits", cfg.logits);
  read_key(obj, "logits_file", cfg.logits_file);
  read_key(obj, "rows", cfg.rows);
  read_key(obj, "cols", cfg.cols);
  read_key(obj, "temperature", cfg.temperature);
  read_key(obj, "noise", cfg.noise);
  read_key(obj, "binarize", cfg.binarize);
  read_key(obj, "seed", cfg.seed);
}

json inspect_config_json(const InspectConfig& cfg) {
  json doc;
  doc["logits"] = cfg.logits;
  doc["logits_file"] = cfg.logits_file;
  doc["rows"] = cfg.rows;
  doc["cols"] = cfg.cols;
  doc["temperature"] = cfg.temperature;
  doc["noise"] = cfg.noise;
  doc["binarize"] = cfg.binarize;
  doc["seed"] = cfg.seed;
  return doc;
}

std::vector<double> parse_logits_csv(const std::string& text) {
  std::vector<double> values;
  std::string token;
  std::stringstream stream(text);
  while (std::getline(stream, token, ',')) {
    try {
      values.push_back(std::stod(token));
    } catch (const std::exception&) {
      throw ConfigError("bad logit value '" + token + "'");
    }
  }
  return values;
}

std::vector<double> read_logits_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open logits file '" + path + "'");
  std::vector<double> values;
  double v = 0.0;
  while (in >> v) values.push_back(v);
  if (!in.eof()) throw ConfigError("logits file '" + path + "' holds non-numeric data");
  return values;
}

int cmd_inspect(const InspectConfig& cfg, const std::string& out) {
  if (cfg.noise != "zero" && cfg.noise != "gumbel")
    throw ConfigError("noise must be 'zero' or 'gumbel', got '" + cfg.noise + "'");
  if (!(cfg.temperature > 0.0)) throw ConfigError("temperature must be positive");

  InspectConfig effective = cfg;
  if (effective.logits.empty() && !effective.logits_file.empty())
    effective.logits = read_logits_file(effective.logits_file);

  int rows = effective.rows, cols = effective.cols;
  if (effective.logits.empty()) {
    if (rows == 0) rows = 7;
    if (cols == 0) cols = 7;
    if (rows < 1 || cols < 1) throw ConfigError("rows and cols must be positive");
    lss3d::Rng rng(lss3d::mix_seed(effective.seed, lss3d::fnv1a64("inspect/logits")));
    effective.logits.resize(static_cast<std::size_t>(rows) * cols);
    for (double& v : effective.logits) v = lss3d::standard_normal(rng);
    effective.rows = rows;
    effective.cols = cols;
  } else {
    const auto n = static_cast<long long>(effective.logits.size());
    if (rows == 0 && cols == 0) {
      rows = 1;
      cols = static_cast<int>(n);
    } else if (rows == 0 || cols == 0) {
      throw ConfigError("rows and cols must be given together");
    }
    if (static_cast<long long>(rows) * cols != n)
      throw ConfigError("rows*cols does not match logits length " + std::to_string(n));
    effective.rows = rows;
    effective.cols = cols;
  }

  const json config = inspect_config_json(effective);
  const std::string hash = hash_hex(config);

  lss3d::GridXd logit_grid(rows, cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c)
      logit_grid(r, c) = effective.logits[static_cast<std::size_t>(r) * cols + c];

  lss3d::GridXd noise_grid;
  if (effective.noise == "gumbel") {
    lss3d::Rng rng(lss3d::mix_seed(effective.seed, lss3d::fnv1a64("inspect/noise")));
    noise_grid = lss3d::sample_gumbel_values<double>(rows, cols, rng);
  } else {
    noise_grid = lss3d::GridXd::Zero(rows, cols);
  }

  const lss3d::SoftMap<double> soft =
      lss3d::gumbel_softmax(logit_grid, noise_grid, effective.temperature);
  const lss3d::DividerResult<double> divider = lss3d::relative_distance_divide(soft);
  const lss3d::SampleMap<double> map = lss3d::build_sample_map(soft, divider, effective.binarize);
  const lss3d::Index positives_absolute = lss3d::absolute_distance_positives(soft);

  std::string csv = "# config_hash=" + hash + "\n# seeds=" + std::to_string(effective.seed) +
                    "\nindex,logit,noise,perturbed,soft,sample\n";
  const lss3d::FlatXd flat_logits = lss3d::flatten_rowmajor(logit_grid);
  const lss3d::FlatXd flat_noise = lss3d::flatten_rowmajor(noise_grid);
  const lss3d::FlatXd flat_soft = lss3d::flatten_rowmajor(soft.values);
  const lss3d::FlatXd flat_map = lss3d::flatten_rowmajor(map.values);
  for (lss3d::Index i = 0; i < flat_logits.size(); ++i) {
    csv += std::to_string(i);
    csv += ',';
    csv += format_double(flat_logits(i));
    csv += ',';
    csv += format_double(flat_noise(i));
    csv += ',';
    csv += format_double(flat_logits(i) + flat_noise(i));
    csv += ',';
    csv += format_double(flat_soft(i));
    csv += ',';
    csv += format_double(flat_map(i));
    csv += '\n';
  }
  csv += "# positives_relative=" + std::to_string(map.positive_count) + "\n";
  csv += "# positives_absolute=" + std::to_string(positives_absolute) + "\n";

  std::fputs(csv.c_str(), stdout);
  if (!out.empty()) write_file(ensure_out_dir(out) / "inspect.csv", csv);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Learnable sample selection toolkit: gradient checks, synthetic selection "
               "benchmark, scene mixing, soft/sample map inspection"};
  app.require_subcommand(1);

  // gradcheck
  auto* gradcheck = app.add_subcommand("gradcheck", "Check analytic gradients against finite differences");
  std::string gc_config, gc_out;
  GradcheckConfig gc;
  std::vector<std::string> gc_ops;
  gradcheck->add_option("--config", gc_config, "JSON config file");
  gradcheck->add_option("--out", gc_out, "Output directory for gradcheck_report.json");
  gradcheck->add_option("--op", gc_ops, "Restrict to these ops (repeatable)");
  auto* gc_points = gradcheck->add_option("--points", gc.points, "Random points per op");
  auto* gc_step = gradcheck->add_option("--step", gc.step, "Finite-difference step");
  auto* gc_tol = gradcheck->add_option("--tolerance", gc.tolerance, "Max relative error allowed");
  auto* gc_seed = gradcheck->add_option("--seed", gc.seed, "Base seed");

  // bench
  auto* bench = app.add_subcommand("bench", "Run the synthetic selection benchmark");
  std::string b_config, b_out = ".", b_preset = "full";
  std::uint64_t b_seed = 0;
  bench->add_option("--config", b_config, "JSON config file");
  bench->add_option("--out", b_out, "Output directory for bench_report.{csv,json}");
  bench->add_option("--preset", b_preset, "Base preset")->check(CLI::IsMember({"smoke", "full"}));
  auto* b_seed_opt = bench->add_option("--seed", b_seed, "Replace the seed list with this seed");

  // augment
  auto* augment = app.add_subcommand("augment", "Mix a KITTI-layout scene directory");
  std::string a_config, a_out, a_input;
  AugmentConfig ac;
  std::uint64_t a_seed = 0;
  augment->add_option("input", a_input, "Input scene directory (image_2/label_2/calib)");
  augment->add_option("--config", a_config, "JSON config file");
  augment->add_option("--out", a_out, "Output scene directory");
  auto* a_seed_opt = augment->add_option("--seed", a_seed, "Pairing/lambda seed");

  // inspect
  auto* inspect = app.add_subcommand("inspect", "Dump soft map / sample map for a logit grid");
  std::string i_config, i_out;
  InspectConfig ic;
  std::string i_logits;
  inspect->add_option("--config", i_config, "JSON config file");
  inspect->add_option("--out", i_out, "Also write inspect.csv to this directory");
  inspect->add_option("--logits", i_logits, "Comma-separated logits, row-major");
  auto* i_file = inspect->add_option("--logits-file", ic.logits_file, "Whitespace-separated logits file");
  auto* i_rows = inspect->add_option("--rows", ic.rows, "Grid rows");
  auto* i_cols = inspect->add_option("--cols", ic.cols, "Grid cols");
  auto* i_tau = inspect->add_option("--temperature", ic.temperature, "Softmax temperature");
  auto* i_noise = inspect->add_option("--noise", ic.noise, "Noise mode")
                      ->check(CLI::IsMember({"zero", "gumbel"}));
  auto* i_bin = inspect->add_flag("--binarize", ic.binarize, "Binarize retained cells to 1");
  auto* i_seed = inspect->add_option("--seed", ic.seed, "Seed for noise / random logits");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (gradcheck->parsed()) {
      GradcheckConfig cfg;
      if (!gc_config.empty()) {
        const json doc = load_config_file(gc_config);
        check_keys(doc, {"ops", "points", "step", "tolerance", "seed"}, "gradcheck config");
        read_key(doc, "ops", cfg.ops);
        read_key(doc, "points", cfg.points);
        read_key(doc, "step", cfg.step);
        read_key(doc, "tolerance", cfg.tolerance);
        read_key(doc, "seed", cfg.seed);
      }
      if (!gc_ops.empty()) cfg.ops = gc_ops;
      if (gc_points->count()) cfg.points = gc.points;
      if (gc_step->count()) cfg.step = gc.step;
      if (gc_tol->count()) cfg.tolerance = gc.tolerance;
      if (gc_seed->count()) cfg.seed = gc.seed;
      return cmd_gradcheck(cfg, gc_out);
    }
    if (bench->parsed()) {
      lss3d::BenchConfig cfg = b_preset == "smoke" ? lss3d::smoke_preset() : lss3d::full_preset();
      if (!b_config.empty()) apply_bench_config(load_config_file(b_config), cfg);
      if (b_seed_opt->count()) cfg.seeds = {b_seed};
      return cmd_bench(cfg, b_out);
    }
    if (augment->parsed()) {
      AugmentConfig cfg;
      if (!a_config.empty()) apply_augment_config(load_config_file(a_config), cfg);
      if (!a_input.empty()) cfg.input = a_input;
      if (a_seed_opt->count()) cfg.seed = a_seed;
      return cmd_augment(cfg, a_out);
    }
    if (inspect->parsed()) {
      InspectConfig cfg;
      if (!i_config.empty()) apply_inspect_config(load_config_file(i_config), cfg);
      if (!i_logits.empty()) cfg.logits = parse_logits_csv(i_logits);
      if (i_file->count()) cfg.logits_file = ic.logits_file;
      if (i_rows->count()) cfg.rows = ic.rows;
      if (i_cols->count()) cfg.cols = ic.cols;
      if (i_tau->count()) cfg.temperature = ic.temperature;
      if (i_noise->count()) cfg.noise = ic.noise;
      if (i_bin->count()) cfg.binarize = ic.binarize;
      if (i_seed->count()) cfg.seed = ic.seed;
      return cmd_inspect(cfg, i_out);
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
