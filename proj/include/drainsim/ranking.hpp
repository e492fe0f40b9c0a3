#pragma once

// ranking.hpp: order candidate plans by what they would accomplish on a
// given device. Every plan is scored with a deterministic run (infeasible
// ones are force-run so the report can still show what they would do with
// the gates bypassed), then sorted: feasible before infeasible, higher
// efficacy first, name as the tiebreak.

#include <algorithm>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "drainsim/core.hpp"
#include "drainsim/engine.hpp"
#include "drainsim/plan.hpp"
#include "drainsim/trace.hpp"

namespace drainsim {

struct RankedPlan {
  std::string name;
  bool feasible = false;
  double efficacy = 0.0;  // battery points per minute over the run
  double drained_pct = 0.0;
  double minutes = 0.0;
  TerminalReason terminal = TerminalReason::time_limit;
  std::optional<int> stealth;  // set when every referenced component has one
  std::vector<std::string> infeasibility_reasons;
};

inline std::vector<RankedPlan> rank_plans(
    const std::vector<std::pair<std::string, AttackPlan>>& plans,
    const DeviceProfile& profile, const PowerModel& model,
    const ComponentRegistry& registry,
    const SimulationOptions& base_options = {}) {
  std::vector<RankedPlan> out;
  out.reserve(plans.size());
  for (const auto& [name, plan] : plans) {
    RankedPlan r;
    r.name = name;

    const FeasibilityReport fr = check_feasibility(plan, profile, registry);
    r.feasible = fr.feasible;
    for (const auto& v : fr.verdicts) {
      for (const auto& reason : v.reasons) {
        r.infeasibility_reasons.push_back(v.component_id + ": " + reason);
      }
    }

    SimulationOptions opts = base_options;
    opts.mode = SimulationMode::deterministic;
    opts.force = true;
    const SimulationTrace trace =
        simulate(plan, profile, model, registry, opts);
    r.minutes = trace.elapsed_minutes();
    r.drained_pct = trace.initial_level() - trace.final_level();
    r.efficacy = r.minutes > 0.0 ? r.drained_pct / r.minutes : 0.0;
    r.terminal = trace.terminal;

    try {
      r.stealth = stealth_score(plan, registry);
    } catch (const std::invalid_argument&) {
      // some referenced component has no stealth level configured
    }
    out.push_back(std::move(r));
  }
  std::sort(out.begin(), out.end(), [](const RankedPlan& a,
                                       const RankedPlan& b) {
    if (a.feasible != b.feasible) return a.feasible;
    if (a.efficacy != b.efficacy) return a.efficacy > b.efficacy;
    return a.name < b.name;
  });
  return out;
}

}  // namespace drainsim
