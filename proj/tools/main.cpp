// slugbot: command-line front end for the simulator, the analysis pipeline and
// the live telemetry service.

#include <atomic>
#include <csignal>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "slugbot/analysis.hpp"
#include "slugbot/config.hpp"
#include "slugbot/golden.hpp"
#include "slugbot/server.hpp"
#include "slugbot/simulation.hpp"
#include "slugbot/trace.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace slugbot;

namespace {

std::atomic<bool> g_interrupted{false};

void on_signal(int) { g_interrupted = true; }

SimConfig load_or_default(const std::string& path) {
  return path.empty() ? SimConfig::default_swallow() : load_config(path);
}

void write_json(const std::string& path, const json& j) {
  if (path.empty() || path == "-") {
    std::cout << j.dump(2) << '\n';
    return;
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out << j.dump(2) << '\n';
}

json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  return json::parse(in);
}

// Accepts either a bare profile or an analysis report that embeds one.
analysis::CycleProfile read_profile(const std::string& path) {
  json j = read_json(path);
  if (j.contains("profile")) j = j.at("profile");
  if (j.is_null()) throw std::runtime_error("'" + path + "' holds no profile");
  return analysis::profile_from_json(j);
}

std::string fmt(const std::optional<double>& v) {
  if (!v) return "absent";
  std::ostringstream s;
  s << std::fixed << std::setprecision(1) << *v;
  return s.str();
}

void print_summary(const analysis::AnalysisReport& r) {
  std::cerr << "cycles: " << r.total_cycles << " complete, " << r.analyzed.size() << " analyzed\n";
  if (r.jitter) std::cerr << "max jitter: " << fmt(r.jitter->max_pct) << "% (" << r.jitter->max_signal << ")\n";
  const auto& k = r.kinematics;
  if (k.degenerate) {
    std::cerr << "kinematics: degenerate (" << k.reason << ")\n";
  } else {
    std::cerr << "peak protraction " << k.peak_protraction_pct << "%, mid retraction " << k.mid_retraction_pct
              << "%, peak retraction " << k.peak_retraction_pct << "%\n"
              << "rotation swing: protraction " << fmt(k.protraction_swing_deg) << " deg, retraction "
              << fmt(k.retraction_swing_deg) << " deg\n";
  }
  std::cerr << "RU3 fired: " << (r.ru3_fired ? "yes" : "no") << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"SLUGBOT software twin: simulate, analyze and serve"};
  app.require_subcommand(1);

  // run
  auto* run = app.add_subcommand("run", "Run a scenario and write the per-tick trace as CSV");
  std::string run_config, run_out;
  std::optional<std::uint64_t> run_seed;
  std::optional<double> run_duration;
  bool run_quiet = false;
  run->add_option("--config", run_config, "Scenario config JSON (default: built-in swallow)");
  run->add_option("--out", run_out, "Trace CSV path")->required();
  run->add_option("--seed", run_seed, "Override the scenario seed");
  run->add_option("--duration", run_duration, "Override the duration in seconds")->check(CLI::PositiveNumber);
  run->add_flag("--no-noise", run_quiet, "Zero every sensor noise sigma");

  // analyze
  auto* an = app.add_subcommand("analyze", "Segment, normalize and score a trace");
  std::string an_trace, an_out, an_config;
  bool an_align = false;
  an->add_option("--trace", an_trace, "Trace CSV")->required()->check(CLI::ExistingFile);
  an->add_option("--config", an_config, "Config whose analysis section to use");
  an->add_flag("--align-peak-retraction", an_align, "Shift cycles so peak retraction sits at the configured phase");
  an->add_option("--out", an_out, "Report JSON path (default: stdout)");

  // compare
  auto* cmp = app.add_subcommand("compare", "Compare two cycle profiles");
  std::vector<std::string> cmp_profiles;
  double cmp_tol = -1.0;
  cmp->add_option("--profile", cmp_profiles, "Profile or report JSON (give twice)")
      ->required()
      ->expected(2)
      ->check(CLI::ExistingFile);
  cmp->add_option("--tolerance", cmp_tol, "Fail when any mean differs by more than this");

  // golden regen
  auto* golden = app.add_subcommand("golden", "Golden-value maintenance");
  golden->require_subcommand(1);
  auto* regen = golden->add_subcommand("regen", "Recompute pinned values from the shipped default config");
  std::string golden_config = "config/default_swallow.json";
  std::string golden_out = "tests/golden/default_swallow.json";
  regen->add_option("--config", golden_config, "Config to run")->check(CLI::ExistingFile);
  regen->add_option("--out", golden_out, "Golden JSON path");

  // config
  auto* cfgcmd = app.add_subcommand("config", "Print a complete config for a behavior");
  std::string cfg_mode = "swallow";
  cfgcmd->add_option("--mode", cfg_mode, "quiescent, bite, swallow or reject");

  // serve
  auto* serve = app.add_subcommand("serve", "Run a live session over newline-delimited JSON/TCP");
  std::string serve_config;
  telemetry::ServerOptions serve_opts;
  std::optional<std::uint16_t> serve_port;
  bool serve_autostart = false;
  serve->add_option("--config", serve_config, "Session config JSON");
  serve->add_option("--host", serve_opts.host, "Bind address");
  serve->add_option("--port", serve_port, "TCP port (default: $SLUGBOT_PORT, else 7878)");
  serve->add_option("--queue", serve_opts.client_queue_limit, "Frames buffered per client")->check(CLI::PositiveNumber);
  serve->add_flag("--start", serve_autostart, "Start the simulation immediately instead of paused");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      SimConfig cfg = load_or_default(run_config);
      if (run_seed) cfg.scenario.seed = *run_seed;
      if (run_duration) cfg.scenario.duration_s = *run_duration;
      if (run_quiet) cfg = cfg.without_noise();
      cfg.validate();
      const Trace trace = run_scenario(cfg);
      write_trace_csv(fs::path(run_out), trace);
      std::cerr << "wrote " << trace.size() << " rows to " << run_out << '\n';
      return 0;
    }

    if (*an) {
      SimConfig cfg = load_or_default(an_config);
      if (an_align) cfg.analysis.align_peak_retraction = true;
      const Trace trace = read_trace_csv(fs::path(an_trace));
      const auto report = analysis::analyze(trace, cfg.analysis);
      write_json(an_out, analysis::to_json(report));
      print_summary(report);
      return 0;
    }

    if (*cmp) {
      const auto a = read_profile(cmp_profiles[0]);
      const auto b = read_profile(cmp_profiles[1]);
      const auto diff = analysis::compare_profiles(a, b);
      json out = {{"max_mean_abs_diff", diff.max_mean_abs_diff},
                  {"worst", diff.worst},
                  {"worst_signal", diff.worst_signal}};
      std::cout << out.dump(2) << '\n';
      if (cmp_tol >= 0.0 && diff.worst > cmp_tol) {
        std::cerr << "profiles differ: " << diff.worst_signal << " by " << diff.worst << '\n';
        return 1;
      }
      return 0;
    }

    if (*regen) {
      const SimConfig cfg = load_config(golden_config);
      const fs::path out(golden_out);
      if (out.has_parent_path()) fs::create_directories(out.parent_path());
      write_json(golden_out, compute_golden(cfg));
      std::cerr << "golden values written to " << golden_out << '\n';
      return 0;
    }

    if (*cfgcmd) {
      auto mode = neural::parse_mode(cfg_mode);
      if (!mode) throw std::runtime_error("unknown mode '" + cfg_mode + "'");
      SimConfig cfg;
      cfg.scenario.schedule = {{0.0, stimulus_for(*mode)}};
      std::cout << config_to_json(cfg).dump(2) << '\n';
      return 0;
    }

    if (*serve) {
      SimConfig cfg = load_or_default(serve_config);
      if (serve_port) {
        serve_opts.port = *serve_port;
      } else if (const char* env = std::getenv("SLUGBOT_PORT")) {
        serve_opts.port = static_cast<std::uint16_t>(std::stoul(env));
      } else {
        serve_opts.port = 7878;
      }
      serve_opts.autostart = serve_autostart;
      telemetry::TelemetryServer server(std::move(cfg), serve_opts);
      server.start();
      std::cerr << "listening on " << serve_opts.host << ':' << server.port() << '\n';
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      while (!g_interrupted) server.wait_for(std::chrono::milliseconds(200));
      server.stop();
      return 0;
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
