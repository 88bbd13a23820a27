#include "slugbot/golden.hpp"

#include "slugbot/analysis.hpp"
#include "slugbot/simulation.hpp"

namespace slugbot {

namespace {

nlohmann::json summarize(const SimConfig& config) {
  const Trace trace = run_scenario(config);
  const auto report = analysis::analyze(trace, config.analysis);

  nlohmann::json first_wave = nullptr;
  if (!report.waves.empty()) {
    nlohmann::json onsets = nlohmann::json::array();
    for (const auto& o : report.waves.front().onset_ms) onsets.push_back(o ? nlohmann::json(*o) : nlohmann::json(nullptr));
    first_wave = {{"duration_ms", report.waves.front().duration_ms}, {"onset_ms", std::move(onsets)}};
  }
  return {{"total_cycles", report.total_cycles},
          {"cycle_lengths_ms", report.profile.cycle_lengths_ms},
          {"transport_mm", report.transport_mm},
          {"final_ingested_mm", trace.empty() ? 0.0 : trace.back().food.ingested_mm},
          {"max_jitter_pct", report.jitter && report.jitter->max_pct ? nlohmann::json(*report.jitter->max_pct)
                                                                     : nlohmann::json(nullptr)},
          {"kinematics", analysis::to_json(report.kinematics)},
          {"first_wave", std::move(first_wave)},
          {"ru3_fired", report.ru3_fired}};
}

}  // namespace

nlohmann::json compute_golden(const SimConfig& config) {
  return {{"seed", config.scenario.seed},
          {"duration_s", config.scenario.duration_s},
          {"noisy", summarize(config)},
          {"noise_free", summarize(config.without_noise())}};
}

}  // namespace slugbot
