#pragma once

#include "lss3d/losses.hpp"

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace lss3d {

/// Epoch counter plus the knobs the warm-up gate needs. `depth_loss_history`
/// holds one mean depth-loss value per finished epoch.
struct TrainState {
  int epoch = 0;
  int total_epochs = 0;
  double warmup_fraction = 0.3;
  std::vector<double> depth_loss_history;
};

/// Warm-up gate: all cells train for the first ceil(fraction * total)
/// epochs, selection takes over from then on. The boundary epoch itself is
/// the first selection epoch.
inline SampleMode warmup_gate(const TrainState& state) {
  if (state.total_epochs < 1) throw std::invalid_argument("warmup_gate: total_epochs must be positive");
  if (state.epoch < 0 || state.epoch >= state.total_epochs)
    throw std::invalid_argument("warmup_gate: epoch out of range");
  if (!(state.warmup_fraction >= 0.0) || state.warmup_fraction >= 1.0)
    throw std::invalid_argument("warmup_gate: warmup_fraction must be in [0, 1)");
  const int cutoff = static_cast<int>(std::ceil(state.warmup_fraction * state.total_epochs));
  return state.epoch < cutoff ? SampleMode::warmup_all : SampleMode::lss;
}

/// Diagnostic only, never a gate: relative change between the means of the
/// two most recent `window`-epoch spans of the depth-loss history. NaN until
/// 2 * window epochs have been recorded.
inline double depth_loss_stability(const TrainState& state, int window = 5) {
  if (window < 1) throw std::invalid_argument("depth_loss_stability: window must be positive");
  const auto& h = state.depth_loss_history;
  const std::size_t w = static_cast<std::size_t>(window);
  if (h.size() < 2 * w) return std::numeric_limits<double>::quiet_NaN();
  double recent = 0.0, previous = 0.0;
  for (std::size_t i = 0; i < w; ++i) {
    recent += h[h.size() - 1 - i];
    previous += h[h.size() - 1 - w - i];
  }
  recent /= window;
  previous /= window;
  const double denom = std::max(std::abs(previous), 1e-12);
  return std::abs(recent - previous) / denom;
}

/// One training step's losses as a JSON record for benchmark reports.
template <typename Scalar>
nlohmann::json loss_record_json(int epoch, SampleMode mode, const LossBreakdown<Scalar>& losses) {
  nlohmann::json rec;
  rec["epoch"] = epoch;
  rec["mode"] = to_string(mode);
  rec["depth"] = losses.depth.mean();
  rec["dims"] = losses.dims.mean();
  rec["orientation"] = losses.orientation.mean();
  rec["offset"] = losses.offset;
  if (std::isfinite(static_cast<double>(losses.masked_total))) rec["masked_total"] = losses.masked_total;
  return rec;
}

}  // namespace lss3d
