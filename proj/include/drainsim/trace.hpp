#pragma once

// trace.hpp: the record a simulation leaves behind, plus the efficacy
// metric computed from it and bit-stable CSV/JSON exporters.

#include <set>
#include <string>
#include <vector>

#include "drainsim/core.hpp"
#include "drainsim/serialization.hpp"

namespace drainsim {

enum class TerminalReason { goal_met, battery_dead, time_limit, plan_exhausted };

inline const char* to_string(TerminalReason r) {
  switch (r) {
    case TerminalReason::goal_met: return "goal_met";
    case TerminalReason::battery_dead: return "battery_dead";
    case TerminalReason::time_limit: return "time_limit";
    case TerminalReason::plan_exhausted: return "plan_exhausted";
  }
  return "time_limit";
}

// One step boundary. `active` and `charging` describe the state that is
// integrated over the step *starting* at this sample, so a trace can be
// re-integrated sample by sample; `events` lists what fired at this
// boundary (trigger actions, phase switches, charger flips).
struct TraceSample {
  double elapsed_seconds = 0.0;
  double level = 100.0;
  int reported_level = 100;
  std::set<std::string> active;
  bool charging = false;
  std::vector<std::string> events;

  bool operator==(const TraceSample&) const = default;
};

struct SimulationTrace {
  std::vector<TraceSample> samples;  // one per step boundary, t = 0 first
  TerminalReason terminal = TerminalReason::time_limit;

  bool operator==(const SimulationTrace&) const = default;

  double initial_level() const {
    return samples.empty() ? 0.0 : samples.front().level;
  }
  double final_level() const {
    return samples.empty() ? 0.0 : samples.back().level;
  }
  double elapsed_seconds() const {
    return samples.empty() ? 0.0 : samples.back().elapsed_seconds;
  }
  double elapsed_minutes() const { return elapsed_seconds() / 60.0; }
};

// Net drain speed achieved over a whole run: points drained (net of any
// charging) per minute of attack. Zero-length traces have no meaningful
// rate.
inline double efficacy(const SimulationTrace& trace) {
  double minutes = trace.elapsed_minutes();
  if (!(minutes > 0.0)) {
    throw std::invalid_argument("efficacy: trace covers zero elapsed time");
  }
  return (trace.initial_level() - trace.final_level()) / minutes;
}

// ---------------------------------------------------------------------------
// Export

// CSV, one row per sample. Active ids are '+'-joined (sets iterate
// sorted); events are ';'-joined.
inline std::string trace_to_csv(const SimulationTrace& trace) {
  std::string out = "t_seconds,level,reported_level,active,charging,event\n";
  for (const auto& s : trace.samples) {
    out += detail::format_double(s.elapsed_seconds);
    out += ',';
    out += detail::format_double(s.level);
    out += ',';
    out += std::to_string(s.reported_level);
    out += ',';
    out += active_set_key(s.active);
    out += ',';
    out += s.charging ? '1' : '0';
    out += ',';
    out += detail::join(s.events, ";");
    out += '\n';
  }
  return out;
}

inline json to_json(const SimulationTrace& trace) {
  json j;
  j["terminal"] = to_string(trace.terminal);
  j["samples"] = json::array();
  for (const auto& s : trace.samples) {
    json js;
    js["t_seconds"] = s.elapsed_seconds;
    js["level"] = s.level;
    js["reported_level"] = s.reported_level;
    js["active"] = json::array();
    for (const auto& id : s.active) js["active"].push_back(id);
    js["charging"] = s.charging;
    js["events"] = s.events;
    j["samples"].push_back(std::move(js));
  }
  return j;
}

}  // namespace drainsim
