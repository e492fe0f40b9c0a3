#pragma once

// engine.hpp: discrete-time simulation of an attack plan against a device.
//
// The simulator advances on a fixed step grid (default 1 s). Observer-grade
// machinery — triggers, the charging schedule, goal detection, trace
// samples — lives on grid boundaries, but *within* a step the level is
// integrated piecewise-exactly: dim-threshold crossings, phase-duration
// boundaries and 0/100 clamps take effect at their exact crossing times.
// That keeps terminal times stable under step refinement (halving the step
// can only move grid detection, never the underlying trajectory).
//
// Determinism: identical inputs (plan, profile, model, registry, options,
// seed) produce bit-identical traces. All randomness flows through
// sampling.hpp's fixed-sequence generators.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "drainsim/core.hpp"
#include "drainsim/plan.hpp"
#include "drainsim/sampling.hpp"
#include "drainsim/trace.hpp"

namespace drainsim {

// ---------------------------------------------------------------------------
// step: the public single-step atom.
//
// Advances one interval at a single rate chosen from the pre-step level:
//   gross = baseline            when nothing is active
//         = eta(active) * sum_i rate_i * (phi if display-class and dimmed)
//   net   = gross - supply      while charging
//   level'= clamp(level - net * dt, 0, 100)
// simulate() below refines this with sub-step crossing handling; use it
// when whole-run accuracy matters.
inline BatteryState step(const BatteryState& state,
                         const std::set<std::string>& active,
                         const PowerModel& model,
                         const ComponentRegistry& registry, double dt_seconds,
                         int report_granularity = 1) {
  if (!(dt_seconds > 0.0)) {
    throw std::invalid_argument("step: dt_seconds must be > 0");
  }
  double gross;
  if (active.empty()) {
    gross = model.baseline_rate;
  } else {
    const bool dimmed = state.level <= model.dim_threshold;
    double sum = 0.0;
    for (const auto& id : active) {
      const ComponentSpec& c = registry.at(id);  // throws on unknown ids
      double r = c.mean_rate();
      if (c.display_class && dimmed) r *= model.dim_factor_phi;
      sum += r;
    }
    gross = interference_factor(model, active) * sum;
  }
  const double net = gross - (state.charging ? model.charging_supply : 0.0);
  BatteryState next = state;
  next.level = std::clamp(state.level - net * dt_seconds / 60.0, 0.0, 100.0);
  next.reported_level = quantize_level(next.level, report_granularity);
  next.elapsed_seconds = state.elapsed_seconds + dt_seconds;
  return next;
}

// ---------------------------------------------------------------------------
// TriggerEngine: edge-detecting evaluator with per-rule memory.
//
// A rule fires when its condition turns true after being false at the
// previous evaluation. Battery and elapsed conditions start "false", so a
// rule already satisfied at t = 0 fires immediately; charging_became seeds
// its memory from the initial charging flag, so it fires only on an actual
// flip. `once` rules disarm after their first firing.
class TriggerEngine {
 public:
  TriggerEngine(const std::vector<Trigger>& triggers, bool initial_charging)
      : triggers_(&triggers),
        prev_(triggers.size(), 0),
        fired_(triggers.size(), 0) {
    for (std::size_t i = 0; i < triggers.size(); ++i) {
      const Trigger& t = triggers[i];
      if (t.condition.type == TriggerConditionType::charging_became) {
        prev_[i] = initial_charging == t.condition.charging_value;
      }
    }
  }

  struct Outcome {
    std::set<std::string> active;  // the active set after all fired actions
    std::vector<std::pair<std::string, double>> scaled;
    std::vector<std::string> events;
    bool any_fired = false;
  };

  // Evaluates every rule in declaration order against the observer-visible
  // state (reported level, charging flag, elapsed time); later rules see
  // the set mutations earlier ones made.
  Outcome evaluate(const BatteryState& state, std::set<std::string> active) {
    Outcome out;
    for (std::size_t i = 0; i < triggers_->size(); ++i) {
      const Trigger& t = (*triggers_)[i];
      bool cond = false;
      switch (t.condition.type) {
        case TriggerConditionType::battery_below:
          cond = state.reported_level < t.condition.threshold;
          break;
        case TriggerConditionType::battery_above:
          cond = state.reported_level > t.condition.threshold;
          break;
        case TriggerConditionType::charging_became:
          cond = state.charging == t.condition.charging_value;
          break;
        case TriggerConditionType::elapsed_exceeds:
          cond = state.elapsed_seconds > t.condition.threshold * 60.0;
          break;
      }
      const bool entering = cond && !prev_[i];
      prev_[i] = cond;
      if (!entering || (t.once && fired_[i])) continue;
      fired_[i] = 1;
      out.any_fired = true;

      switch (t.action.type) {
        case TriggerActionType::start:
          active.insert(t.action.components.begin(), t.action.components.end());
          out.events.push_back("start:" + active_set_key(t.action.components));
          break;
        case TriggerActionType::stop:
          for (const auto& id : t.action.components) active.erase(id);
          out.events.push_back("stop:" + active_set_key(t.action.components));
          break;
        case TriggerActionType::stop_all:
          active.clear();
          out.events.push_back("stop_all");
          break;
        case TriggerActionType::scale:
          for (const auto& id : t.action.components) {
            out.scaled.emplace_back(id, t.action.factor);
          }
          out.events.push_back("scale:" + active_set_key(t.action.components) +
                               "*" + detail::format_double(t.action.factor));
          break;
      }
    }
    out.active = std::move(active);
    return out;
  }

  // True while some start rule could still fire (used for plan exhaustion:
  // a plan whose controller may yet start components is not done).
  bool armed_start_remaining() const {
    for (std::size_t i = 0; i < triggers_->size(); ++i) {
      const Trigger& t = (*triggers_)[i];
      if (t.action.type == TriggerActionType::start &&
          !(t.once && fired_[i])) {
        return true;
      }
    }
    return false;
  }

 private:
  const std::vector<Trigger>* triggers_;
  std::vector<char> prev_;
  std::vector<char> fired_;
};

// ---------------------------------------------------------------------------
// Simulation options

enum class SimulationMode { deterministic, stochastic };

struct SimulationOptions {
  SimulationMode mode = SimulationMode::deterministic;
  std::uint64_t seed = 0;
  double step_seconds = 1.0;
  double time_limit_minutes = 1440.0;  // 24 h simulated cap

  // Run the plan even if check_feasibility rejects it (an attacker with a
  // foothold beyond the modeled permission gates).
  bool force = false;

  // External charger events: (elapsed seconds, plugged-in). Applied at the
  // first step boundary at or after each event time. This is the only
  // source of mid-run charging flips.
  std::vector<std::pair<double, bool>> charging_schedule;
};

// ---------------------------------------------------------------------------
// Simulation: a stateful run, advanced one grid step at a time.
//
// Holds references to the plan/profile/model/registry, which must outlive
// it. Not thread-safe; use one instance per thread.
class Simulation {
 public:
  Simulation(const AttackPlan& plan, const DeviceProfile& profile,
             const PowerModel& model, const ComponentRegistry& registry,
             SimulationOptions options = {})
      : plan_(plan),
        model_(model),
        registry_(registry),
        options_(std::move(options)),
        granularity_(profile.battery_report_granularity),
        triggers_(plan.triggers, profile.charging) {
    require_valid(validate(model), "power model");
    require_valid(validate(profile), "device profile");
    require_valid(validate_plan(plan, registry), "plan");
    if (!(options_.step_seconds > 0.0)) {
      throw std::invalid_argument("simulation: step_seconds must be > 0");
    }
    if (!(options_.time_limit_minutes > 0.0)) {
      throw std::invalid_argument("simulation: time_limit_minutes must be > 0");
    }
    if (!options_.force) {
      FeasibilityReport fr = check_feasibility(plan, profile, registry);
      if (!fr.feasible) {
        std::string msg = "plan is infeasible on this device:";
        for (const auto& v : fr.verdicts) {
          for (const auto& r : v.reasons) {
            msg += "\n  - " + v.component_id + ": " + r;
          }
        }
        throw InfeasiblePlanError(msg);
      }
    }

    // Per-trial drain-time draws, one per referenced component, frozen for
    // the whole run. Iteration over the (sorted) reference set keeps the
    // draw order deterministic.
    if (options_.mode == SimulationMode::stochastic) {
      Rng rng(options_.seed);
      for (const auto& id : plan.referenced_components()) {
        drawn_times_[id] = sample_drain_time(registry.at(id), rng);
      }
    }

    std::sort(options_.charging_schedule.begin(),
              options_.charging_schedule.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });

    // Absolute phase end times; a phase without a duration never ends.
    double boundary = 0.0;
    bool open_ended = false;
    for (const auto& p : plan.steps) {
      if (open_ended || !p.duration_minutes) {
        phase_end_s_.push_back(kInf);
        open_ended = true;
      } else {
        boundary += *p.duration_minutes * 60.0;
        phase_end_s_.push_back(boundary);
      }
    }

    state_ = make_battery_state(profile);
    initial_level_ = state_.level;
    if (!plan.steps.empty()) active_ = plan.steps.front().activate;
    rebuild_rate_cache();

    // Boundary work for t = 0: charger schedule, trigger pass, terminal
    // checks. The t = 0 sample already reflects all of it.
    apply_schedule();
    run_triggers();
    check_terminal();
  }

  bool finished() const { return finished_; }
  TerminalReason reason() const { return reason_; }
  const BatteryState& state() const { return state_; }
  const std::set<std::string>& active() const { return active_; }
  double initial_level() const { return initial_level_; }
  double step_seconds() const { return options_.step_seconds; }

  // Minutes drawn for each referenced component (stochastic mode only).
  const std::map<std::string, double>& drawn_times() const {
    return drawn_times_;
  }

  // Everything that fired at the most recent boundary (plus sub-step phase
  // switches inside the preceding step).
  const std::vector<std::string>& last_events() const { return events_; }

  TraceSample current_sample() const {
    TraceSample s;
    s.elapsed_seconds = state_.elapsed_seconds;
    s.level = state_.level;
    s.reported_level = state_.reported_level;
    s.active = active_;
    s.charging = state_.charging;
    s.events = events_;
    return s;
  }

  // Advances exactly one grid step (no-op once finished).
  void advance() {
    if (finished_) return;
    events_.clear();
    integrate(options_.step_seconds);
    ++step_count_;
    state_.elapsed_seconds = step_count_ * options_.step_seconds;
    state_.reported_level = quantize_level(state_.level, granularity_);
    apply_schedule();
    run_triggers();
    check_terminal();
  }

 private:
  static constexpr double kInf = std::numeric_limits<double>::infinity();

  static void require_valid(const std::vector<std::string>& issues,
                            const char* what) {
    if (issues.empty()) return;
    std::string msg = std::string("simulation: invalid ") + what + ":";
    for (const auto& i : issues) msg += "\n  - " + i;
    throw std::invalid_argument(msg);
  }

  // Cached per-active-component rates so the inner loop never touches the
  // registry. Rebuilt whenever the active set or a scale factor changes.
  void rebuild_rate_cache() {
    sum_all_ = 0.0;
    sum_display_ = 0.0;
    for (const auto& id : active_) {
      const ComponentSpec& c = registry_.at(id);
      double r;
      if (options_.mode == SimulationMode::stochastic) {
        r = rate_from_drain_time(kDrainQuantumPct, drawn_times_.at(id));
      } else {
        r = c.mean_rate();
      }
      auto it = scale_.find(id);
      if (it != scale_.end()) r *= it->second;
      sum_all_ += r;
      if (c.display_class) sum_display_ += r;
    }
    eta_ = interference_factor(model_, active_);
  }

  double net_rate_per_sec(bool dimmed) const {
    double gross;
    if (active_.empty()) {
      gross = model_.baseline_rate;
    } else {
      double sum = sum_all_;
      if (dimmed) sum -= sum_display_ * (1.0 - model_.dim_factor_phi);
      gross = eta_ * sum;
    }
    double net = gross - (state_.charging ? model_.charging_supply : 0.0);
    return net / 60.0;
  }

  // Piecewise-exact advance over one grid interval. Crossing times for the
  // dim threshold, the 0/100 clamps and phase-duration boundaries are
  // solved analytically and the level is assigned its exact boundary value
  // there, so grid refinement never changes the trajectory.
  void integrate(double dt) {
    double remaining = dt;
    int guard = 0;
    const double thr = model_.dim_threshold;
    while (remaining > 1e-12 && ++guard < 256) {
      double to_phase = kInf;
      if (phase_idx_ < phase_end_s_.size()) {
        const double now =
            step_count_ * options_.step_seconds + (dt - remaining);
        to_phase = phase_end_s_[phase_idx_] - now;
        if (to_phase <= 1e-12) {
          switch_phase();
          continue;
        }
      }
      const double seg = std::min(remaining, to_phase);

      bool dimmed = state_.level <= thr;
      double r = net_rate_per_sec(dimmed);
      if (dimmed && state_.level == thr && r < 0.0) {
        // Rising at the threshold: the region above runs undimmed. If that
        // region drains, the level slides along the threshold (net 0);
        // otherwise it escapes upward at the undimmed rate.
        const double r_up = net_rate_per_sec(false);
        if (r_up >= 0.0) {
          r = 0.0;
        } else {
          r = r_up;
        }
      }

      const bool pinned = (state_.level <= 0.0 && r >= 0.0) ||
                          (state_.level >= 100.0 && r <= 0.0) || r == 0.0;
      if (pinned) {
        remaining -= seg;
        if (seg == to_phase) switch_phase();
        continue;
      }

      double t_evt = kInf;
      double evt_level = 0.0;
      if (r > 0.0) {
        if (!dimmed && sum_display_ > 0.0 && model_.dim_factor_phi != 1.0 &&
            state_.level > thr) {
          t_evt = (state_.level - thr) / r;
          evt_level = thr;
        }
        const double t_zero = state_.level / r;
        if (t_zero <= t_evt) {
          t_evt = t_zero;
          evt_level = 0.0;
        }
      } else {
        if (dimmed && sum_display_ > 0.0 && model_.dim_factor_phi != 1.0 &&
            state_.level < thr) {
          t_evt = (thr - state_.level) / (-r);
          evt_level = thr;
        }
        const double t_full = (100.0 - state_.level) / (-r);
        if (t_full <= t_evt) {
          t_evt = t_full;
          evt_level = 100.0;
        }
      }

      if (t_evt < seg) {
        state_.level = evt_level;
        remaining -= t_evt;
        continue;
      }
      state_.level = std::clamp(state_.level - r * seg, 0.0, 100.0);
      remaining -= seg;
      if (seg == to_phase) switch_phase();
    }
    if (remaining > 1e-12) {
      // Pathological alternation guard; finish the interval single-rate.
      const bool dimmed = state_.level <= thr;
      state_.level = std::clamp(
          state_.level - net_rate_per_sec(dimmed) * remaining, 0.0, 100.0);
    }
  }

  // Moves to the next phase (or past the last one). Each phase starts from
  // its own activation set: trigger edits made during earlier phases do
  // not carry over, and after the final timed phase the set empties.
  void switch_phase() {
    ++phase_idx_;
    if (phase_idx_ < plan_.steps.size()) {
      active_ = plan_.steps[phase_idx_].activate;
      events_.push_back("phase:" + std::to_string(phase_idx_));
    } else {
      active_.clear();
      events_.push_back("phase:end");
    }
    rebuild_rate_cache();
  }

  void apply_schedule() {
    while (schedule_idx_ < options_.charging_schedule.size() &&
           options_.charging_schedule[schedule_idx_].first <=
               state_.elapsed_seconds + 1e-9) {
      const bool on = options_.charging_schedule[schedule_idx_].second;
      if (on != state_.charging) {
        state_.charging = on;
        events_.push_back(on ? "charging:on" : "charging:off");
      }
      ++schedule_idx_;
    }
  }

  void run_triggers() {
    if (plan_.triggers.empty()) return;
    TriggerEngine::Outcome out = triggers_.evaluate(state_, active_);
    for (const auto& e : out.events) events_.push_back(e);
    for (const auto& [id, factor] : out.scaled) {
      auto [it, inserted] = scale_.emplace(id, factor);
      if (!inserted) it->second *= factor;  // repeated scaling composes
    }
    if (out.any_fired) {
      active_ = std::move(out.active);
      rebuild_rate_cache();
    }
  }

  void check_terminal() {
    if (state_.level <= 0.0) {
      finish(TerminalReason::battery_dead);
      return;
    }
    if (plan_.goal.type == GoalType::partial_drain &&
        initial_level_ - state_.level >= plan_.goal.delta - kLevelEps) {
      finish(TerminalReason::goal_met);
      return;
    }
    if (state_.elapsed_seconds >=
        options_.time_limit_minutes * 60.0 - 1e-9) {
      finish(TerminalReason::time_limit);
      return;
    }
    const bool phases_done = phase_idx_ >= plan_.steps.size();
    if (phases_done && active_.empty() &&
        !triggers_.armed_start_remaining()) {
      finish(TerminalReason::plan_exhausted);
    }
  }

  void finish(TerminalReason r) {
    finished_ = true;
    reason_ = r;
  }

  const AttackPlan& plan_;
  const PowerModel& model_;
  const ComponentRegistry& registry_;
  SimulationOptions options_;
  int granularity_ = 1;

  BatteryState state_;
  double initial_level_ = 100.0;
  std::set<std::string> active_;
  std::map<std::string, double> scale_;
  std::map<std::string, double> drawn_times_;

  TriggerEngine triggers_;
  std::vector<double> phase_end_s_;
  std::size_t phase_idx_ = 0;
  std::size_t schedule_idx_ = 0;
  std::int64_t step_count_ = 0;

  // Rate cache for the current active set.
  double sum_all_ = 0.0;
  double sum_display_ = 0.0;
  double eta_ = 1.0;

  std::vector<std::string> events_;
  bool finished_ = false;
  TerminalReason reason_ = TerminalReason::time_limit;
};

// ---------------------------------------------------------------------------
// simulate: run a plan to termination and collect the full trace.
//
// Terminal reasons: battery_dead (level hit 0 — also how a met full_drain
// goal reads), goal_met (partial_drain target reached), time_limit, or
// plan_exhausted (all timed phases over, nothing active, no start trigger
// left armed).
inline SimulationTrace simulate(const AttackPlan& plan,
                                const DeviceProfile& profile,
                                const PowerModel& model,
                                const ComponentRegistry& registry,
                                const SimulationOptions& options = {}) {
  Simulation sim(plan, profile, model, registry, options);
  SimulationTrace trace;
  trace.samples.push_back(sim.current_sample());
  while (!sim.finished()) {
    sim.advance();
    trace.samples.push_back(sim.current_sample());
  }
  trace.terminal = sim.reason();
  return trace;
}

}  // namespace drainsim
