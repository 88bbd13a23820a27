#include "slugbot/trace.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <unordered_map>

namespace slugbot {

using neural::Unit;

namespace {

constexpr int kDecimals = 6;

std::vector<Column> build_columns() {
  std::vector<Column> cols;
  auto real = [&](std::string name, auto get, auto set) {
    cols.push_back({std::move(name), ColumnKind::Real, get, set});
  };
  auto flag = [&](std::string name, auto get, auto set) {
    cols.push_back({std::move(name), ColumnKind::Flag, get, set});
  };

  real("t_ms", [](const TraceRecord& r) { return r.t_ms; }, [](TraceRecord& r, double v) { r.t_ms = v; });

  flag("mech_lips", [](const TraceRecord& r) { return double(r.stimulus.mech_lips); },
       [](TraceRecord& r, double v) { r.stimulus.mech_lips = v != 0.0; });
  flag("chem_lips", [](const TraceRecord& r) { return double(r.stimulus.chem_lips); },
       [](TraceRecord& r, double v) { r.stimulus.chem_lips = v != 0.0; });
  flag("mech_grasper", [](const TraceRecord& r) { return double(r.stimulus.mech_grasper); },
       [](TraceRecord& r, double v) { r.stimulus.mech_grasper = v != 0.0; });
  flag("arousal", [](const TraceRecord& r) { return double(r.stimulus.arousal); },
       [](TraceRecord& r, double v) { r.stimulus.arousal = v != 0.0; });

  cols.push_back({"mode", ColumnKind::Mode, [](const TraceRecord& r) { return double(r.mode); },
                  [](TraceRecord& r, double v) { r.mode = static_cast<neural::BehaviorMode>(v); }});
  cols.push_back({"phase", ColumnKind::Phase, [](const TraceRecord& r) { return double(r.phase); },
                  [](TraceRecord& r, double v) { r.phase = static_cast<neural::Phase>(v); }});

  for (std::size_t u = 0; u < neural::kUnitCount; ++u) {
    flag(std::string(neural::to_string(static_cast<Unit>(u))),
         [u](const TraceRecord& r) { return double(r.units[u]); },
         [u](TraceRecord& r, double v) { r.units[u] = v != 0.0; });
  }

  for (std::size_t i = 0; i < plant::kChannelCount; ++i) {
    const std::string role(plant::to_string(static_cast<plant::ChannelRole>(i)));
    real(role + "_act", [i](const TraceRecord& r) { return r.channels[i].activation; },
         [i](TraceRecord& r, double v) { r.channels[i].activation = v; });
    real(role + "_set", [i](const TraceRecord& r) { return r.channels[i].setpoint; },
         [i](TraceRecord& r, double v) { r.channels[i].setpoint = v; });
    real(role + "_p", [i](const TraceRecord& r) { return r.channels[i].pressure; },
         [i](TraceRecord& r, double v) { r.channels[i].pressure = v; });
    flag(role + "_inlet", [i](const TraceRecord& r) { return double(r.channels[i].inlet_open); },
         [i](TraceRecord& r, double v) { r.channels[i].inlet_open = v != 0.0; });
    flag(role + "_relief", [i](const TraceRecord& r) { return double(r.channels[i].relief_open); },
         [i](TraceRecord& r, double v) { r.channels[i].relief_open = v != 0.0; });
  }

  real("x", [](const TraceRecord& r) { return r.grasper.x; },
       [](TraceRecord& r, double v) { r.grasper.x = v; });
  real("theta_deg", [](const TraceRecord& r) { return r.grasper.theta_deg; },
       [](TraceRecord& r, double v) { r.grasper.theta_deg = v; });
  real("closure", [](const TraceRecord& r) { return r.grasper.closure; },
       [](TraceRecord& r, double v) { r.grasper.closure = v; });
  real("aperture", [](const TraceRecord& r) { return r.grasper.aperture; },
       [](TraceRecord& r, double v) { r.grasper.aperture = v; });

  real("food_position_mm", [](const TraceRecord& r) { return r.food.position_mm; },
       [](TraceRecord& r, double v) { r.food.position_mm = v; });
  flag("grasped", [](const TraceRecord& r) { return double(r.food.grasped); },
       [](TraceRecord& r, double v) { r.food.grasped = v != 0.0; });
  real("ingested_mm", [](const TraceRecord& r) { return r.food.ingested_mm; },
       [](TraceRecord& r, double v) { r.food.ingested_mm = v; });
  flag("externally_held", [](const TraceRecord& r) { return double(r.food.externally_held); },
       [](TraceRecord& r, double v) { r.food.externally_held = v != 0.0; });

  real("tof_mm", [](const TraceRecord& r) { return r.sensors.tof_distance_mm; },
       [](TraceRecord& r, double v) { r.sensors.tof_distance_mm = v; });
  real("imu_deg", [](const TraceRecord& r) { return r.sensors.imu_angle_deg; },
       [](TraceRecord& r, double v) { r.sensors.imu_angle_deg = v; });
  real("force", [](const TraceRecord& r) { return r.sensors.force_reading; },
       [](TraceRecord& r, double v) { r.sensors.force_reading = v; });
  real("x_hat", [](const TraceRecord& r) { return r.sensors.x_hat; },
       [](TraceRecord& r, double v) { r.sensors.x_hat = v; });
  return cols;
}

void append_real(std::string& out, double v) {
  std::array<char, 64> buf;
  auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v, std::chars_format::fixed, kDecimals);
  std::string_view s(buf.data(), static_cast<std::size_t>(res.ptr - buf.data()));
  // Values that round to zero lose their sign so that -0 never reaches the file.
  if (s.size() == 9 && s == "-0.000000") s.remove_prefix(1);
  out.append(s);
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(line.substr(start, comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

}  // namespace

const std::vector<Column>& trace_columns() {
  static const std::vector<Column> cols = build_columns();
  return cols;
}

const Column* find_column(std::string_view name) {
  for (const auto& c : trace_columns()) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

std::string ring_activation_column(std::size_t j) {
  return std::string(plant::to_string(static_cast<plant::ChannelRole>(j))) + "_act";
}

std::vector<double> column_values(const Trace& trace, std::string_view name) {
  const Column* c = find_column(name);
  if (!c) throw std::out_of_range("unknown trace column '" + std::string(name) + "'");
  std::vector<double> out;
  out.reserve(trace.size());
  for (const auto& r : trace) out.push_back(c->get(r));
  return out;
}

std::string format_real(double v) {
  std::string s;
  append_real(s, v);
  return s;
}

void write_trace_csv(std::ostream& out, const Trace& trace) {
  const auto& cols = trace_columns();
  std::string line;
  for (std::size_t i = 0; i < cols.size(); ++i) {
    if (i) line += ',';
    line += cols[i].name;
  }
  line += '\n';
  out << line;

  for (const auto& r : trace) {
    line.clear();
    for (std::size_t i = 0; i < cols.size(); ++i) {
      if (i) line += ',';
      const auto& c = cols[i];
      const double v = c.get(r);
      switch (c.kind) {
        case ColumnKind::Real: append_real(line, v); break;
        case ColumnKind::Flag: line += v != 0.0 ? '1' : '0'; break;
        case ColumnKind::Mode: line += neural::to_string(static_cast<neural::BehaviorMode>(v)); break;
        case ColumnKind::Phase: line += neural::to_string(static_cast<neural::Phase>(v)); break;
      }
    }
    line += '\n';
    out << line;
  }
}

void write_trace_csv(const std::filesystem::path& path, const Trace& trace) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw TraceFormatError("cannot open '" + path.string() + "' for writing");
  write_trace_csv(out, trace);
  if (!out) throw TraceFormatError("write failed for '" + path.string() + "'");
}

Trace read_trace_csv(std::istream& in) {
  const auto& cols = trace_columns();
  std::string line;
  if (!std::getline(in, line)) throw TraceFormatError("empty trace");
  const auto header = split(line);
  if (header.size() != cols.size()) {
    throw TraceFormatError("header has " + std::to_string(header.size()) + " columns, expected " +
                           std::to_string(cols.size()));
  }
  for (std::size_t i = 0; i < cols.size(); ++i) {
    if (header[i] != cols[i].name) {
      throw TraceFormatError("column " + std::to_string(i) + " is '" + std::string(header[i]) +
                             "', expected '" + cols[i].name + "'");
    }
  }

  static const std::unordered_map<std::string_view, double> kEnumValues = [] {
    std::unordered_map<std::string_view, double> m;
    for (auto mode : {neural::BehaviorMode::Quiescent, neural::BehaviorMode::Bite,
                      neural::BehaviorMode::Swallow, neural::BehaviorMode::Reject}) {
      m.emplace(neural::to_string(mode), double(mode));
    }
    for (auto ph : {neural::Phase::Idle, neural::Phase::Protraction, neural::Phase::Retraction}) {
      m.emplace(neural::to_string(ph), double(ph));
    }
    return m;
  }();

  Trace trace;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    const auto fields = split(line);
    if (fields.size() != cols.size()) {
      throw TraceFormatError("row " + std::to_string(row) + ": expected " + std::to_string(cols.size()) +
                             " fields, got " + std::to_string(fields.size()));
    }
    TraceRecord r;
    for (std::size_t i = 0; i < cols.size(); ++i) {
      const auto f = fields[i];
      double v = 0.0;
      const auto& c = cols[i];
      if (c.kind == ColumnKind::Mode || c.kind == ColumnKind::Phase) {
        auto it = kEnumValues.find(f);
        if (it == kEnumValues.end()) {
          throw TraceFormatError("row " + std::to_string(row) + ", " + c.name + ": bad value '" +
                                 std::string(f) + "'");
        }
        v = it->second;
      } else {
        auto res = std::from_chars(f.data(), f.data() + f.size(), v);
        if (res.ec != std::errc() || res.ptr != f.data() + f.size()) {
          throw TraceFormatError("row " + std::to_string(row) + ", " + c.name + ": bad number '" +
                                 std::string(f) + "'");
        }
      }
      c.set(r, v);
    }
    trace.push_back(std::move(r));
  }
  return trace;
}

Trace read_trace_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw TraceFormatError("cannot open '" + path.string() + "'");
  return read_trace_csv(in);
}

}  // namespace slugbot
