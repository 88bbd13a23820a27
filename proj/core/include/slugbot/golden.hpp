#pragma once

#include <nlohmann/json.hpp>

#include "slugbot/config.hpp"

namespace slugbot {

/// Pinned summary of a scenario run: cycle count, per-cycle transport,
/// kinematic checkpoints, jitter, and the first peristaltic wave, for both the
/// configured noise and a noise-free copy. Regenerated by `slugbot golden regen`.
nlohmann::json compute_golden(const SimConfig& config);

}  // namespace slugbot
