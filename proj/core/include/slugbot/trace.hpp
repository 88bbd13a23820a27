#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "slugbot/mechanics.hpp"
#include "slugbot/neural.hpp"
#include "slugbot/plant.hpp"

namespace slugbot {

/// Full simulation state at the end of one tick. `t_ms` is the tick's start
/// time, which is when the neural units were evaluated.
struct TraceRecord {
  double t_ms = 0.0;
  neural::StimulusState stimulus;
  neural::BehaviorMode mode = neural::BehaviorMode::Quiescent;
  neural::Phase phase = neural::Phase::Idle;
  neural::UnitArray units{};
  plant::Channels channels = plant::make_channels();
  mech::GrasperState grasper;
  mech::FoodObject food;
  mech::SensorReadings sensors;

  friend bool operator==(const TraceRecord&, const TraceRecord&) = default;
};

using Trace = std::vector<TraceRecord>;

enum class ColumnKind : std::uint8_t { Real, Flag, Mode, Phase };

struct Column {
  std::string name;
  ColumnKind kind;
  std::function<double(const TraceRecord&)> get;
  std::function<void(TraceRecord&, double)> set;
};

/// The fixed CSV column order.
const std::vector<Column>& trace_columns();
const Column* find_column(std::string_view name);

/// Column name of ring j's activation (j is 0-based, anterior first).
std::string ring_activation_column(std::size_t j);

/// Values of one column over the whole trace. Throws std::out_of_range for an
/// unknown name.
std::vector<double> column_values(const Trace& trace, std::string_view name);

class TraceFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Canonical CSV: header row, one row per tick, reals in fixed six-decimal
/// notation, flags as 0/1, mode and phase by name.
void write_trace_csv(std::ostream& out, const Trace& trace);
void write_trace_csv(const std::filesystem::path& path, const Trace& trace);
Trace read_trace_csv(std::istream& in);
Trace read_trace_csv(const std::filesystem::path& path);

/// Formats a real the way the CSV writer does.
std::string format_real(double v);

}  // namespace slugbot
