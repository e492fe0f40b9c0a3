#include <catch2/catch_amalgamated.hpp>

#include "drainsim/dataset.hpp"
#include "drainsim/plan.hpp"

using namespace drainsim;

namespace {

const ComponentRegistry& reg() {
  static const ComponentRegistry r = reference::registry();
  return r;
}

AttackPlan trio_full() {
  return reference::full_drain_plan(reference::trio_set());
}

}  // namespace

TEST_CASE("plan validation") {
  SECTION("well-formed plan") {
    CHECK(validate_plan(trio_full(), reg()).empty());
  }

  SECTION("partial goal delta bounds") {
    AttackPlan p = reference::partial_drain_plan({"cpu"}, 5);
    CHECK(validate_plan(p, reg()).empty());
    p.goal.delta = 0;
    CHECK_FALSE(validate_plan(p, reg()).empty());
    p.goal.delta = 101;
    CHECK_FALSE(validate_plan(p, reg()).empty());
    p.goal.delta = 100;
    CHECK(validate_plan(p, reg()).empty());
  }

  SECTION("unknown component ids are reported") {
    AttackPlan p = reference::full_drain_plan({"cpu", "warp_drive"});
    const auto issues = validate_plan(p, reg());
    REQUIRE(issues.size() == 1);
    CHECK(issues[0].find("warp_drive") != std::string::npos);
  }

  SECTION("phase durations must be positive") {
    AttackPlan p = trio_full();
    p.steps[0].duration_minutes = 0;
    CHECK_FALSE(validate_plan(p, reg()).empty());
    p.steps[0].duration_minutes = -3;
    CHECK_FALSE(validate_plan(p, reg()).empty());
    p.steps[0].duration_minutes = 10;
    CHECK(validate_plan(p, reg()).empty());
  }

  SECTION("trigger rules") {
    AttackPlan p = trio_full();
    Trigger t;
    t.condition.type = TriggerConditionType::battery_below;
    t.condition.threshold = 20;
    t.action.type = TriggerActionType::stop_all;
    p.triggers.push_back(t);
    CHECK(validate_plan(p, reg()).empty());

    p.triggers[0].action.components = {"cpu"};
    CHECK_FALSE(validate_plan(p, reg()).empty());  // stop_all takes no set

    p.triggers[0].action.components.clear();
    p.triggers[0].condition.threshold = 150;
    CHECK_FALSE(validate_plan(p, reg()).empty());  // threshold out of range

    p.triggers[0].condition.threshold = 20;
    p.triggers[0].action.type = TriggerActionType::scale;
    p.triggers[0].action.components = {"cpu"};
    p.triggers[0].action.factor = 0;
    CHECK_FALSE(validate_plan(p, reg()).empty());  // factor must be positive

    p.triggers[0].action.factor = 2;
    CHECK(validate_plan(p, reg()).empty());

    p.triggers[0].action.components.clear();
    CHECK_FALSE(validate_plan(p, reg()).empty());  // scale needs a set
  }

  SECTION("a plan must be able to activate something") {
    AttackPlan p;
    p.goal.type = GoalType::full_drain;
    CHECK_FALSE(validate_plan(p, reg()).empty());

    Trigger t;
    t.condition.type = TriggerConditionType::elapsed_exceeds;
    t.condition.threshold = 1;
    t.action.type = TriggerActionType::start;
    t.action.components = {"cpu"};
    p.triggers.push_back(t);
    CHECK(validate_plan(p, reg()).empty());
  }
}

TEST_CASE("plan serialization round-trips canonically") {
  AttackPlan p = reference::partial_drain_plan(reference::trio_set(), 35);
  p.steps[0].duration_minutes = 45;
  Phase second;
  second.activate = {"gps"};
  p.steps.push_back(second);

  Trigger charge;
  charge.condition.type = TriggerConditionType::charging_became;
  charge.condition.charging_value = true;
  charge.action.type = TriggerActionType::scale;
  charge.action.components = {"cpu"};
  charge.action.factor = 2.5;
  p.triggers.push_back(charge);

  Trigger low;
  low.condition.type = TriggerConditionType::battery_below;
  low.condition.threshold = 15;
  low.action.type = TriggerActionType::stop_all;
  low.once = true;
  p.triggers.push_back(low);

  Trigger timer;
  timer.condition.type = TriggerConditionType::elapsed_exceeds;
  timer.condition.threshold = 90;
  timer.action.type = TriggerActionType::start;
  timer.action.components = {"vibration", "photo"};
  p.triggers.push_back(timer);

  p.launch_location = LaunchLocation::remote;
  p.metadata.targets = "single device";
  p.metadata.control = ControlMode::uncontrolled;
  p.metadata.process = "installed app";

  const std::string text = serialize_plan(p);
  const PlanParseResult parsed = parse_plan(text, reg());
  REQUIRE(parsed.ok());
  CHECK(serialize_plan(*parsed.plan) == text);

  const AttackPlan& q = *parsed.plan;
  CHECK(q.goal.type == GoalType::partial_drain);
  CHECK(q.goal.delta == 35);
  REQUIRE(q.steps.size() == 2);
  CHECK(q.steps[0].duration_minutes == 45);
  CHECK_FALSE(q.steps[1].duration_minutes.has_value());
  REQUIRE(q.triggers.size() == 3);
  CHECK(q.triggers[0].condition.charging_value);
  CHECK(q.triggers[1].once);
  CHECK(q.triggers[2].action.components ==
        std::set<std::string>{"photo", "vibration"});
  CHECK(q.launch_location == LaunchLocation::remote);
  CHECK(q.metadata.control == ControlMode::uncontrolled);
}

TEST_CASE("plan parsing never throws and accumulates violations") {
  SECTION("malformed JSON") {
    const PlanParseResult r = parse_plan("{oops", reg());
    CHECK_FALSE(r.ok());
    CHECK_FALSE(r.violations.empty());
  }

  SECTION("several independent problems in one document") {
    const std::string text = R"({
      "goal": {"type": "partial_drain", "delta": 0},
      "steps": [{"activate": ["warp_drive"], "duration_minutes": -1}],
      "launch_location": "carrier_pigeon",
      "surprise": true
    })";
    const PlanParseResult r = parse_plan(text, reg());
    CHECK_FALSE(r.ok());
    CHECK(r.violations.size() >= 4);
  }

  SECTION("degradation goals are out of scope with an explanation") {
    const std::string text = R"({
      "goal": {"type": "degradation"},
      "steps": [{"activate": ["cpu"]}],
      "launch_location": "app"
    })";
    const PlanParseResult r = parse_plan(text, reg());
    CHECK_FALSE(r.ok());
    REQUIRE_FALSE(r.violations.empty());
    bool explained = false;
    for (const auto& v : r.violations) {
      if (v.find("degradation") != std::string::npos) explained = true;
    }
    CHECK(explained);
  }

  SECTION("metadata is optional") {
    const std::string text = R"({
      "goal": {"type": "full_drain"},
      "steps": [{"activate": ["cpu"]}],
      "launch_location": "app"
    })";
    CHECK(parse_plan(text, reg()).ok());
  }
}

TEST_CASE("feasibility gating") {
  const DeviceProfile bare;  // nothing granted, nothing enabled

  SECTION("permission required even when no setting exists") {
    const AttackPlan p = reference::full_drain_plan({"vibration"});
    const FeasibilityReport r = check_feasibility(p, bare, reg());
    CHECK_FALSE(r.feasible);
    REQUIRE(r.missing_permissions.count("VIBRATE") == 1);

    DeviceProfile granted;
    granted.granted_permissions = {"VIBRATE"};
    CHECK(check_feasibility(p, granted, reg()).feasible);
  }

  SECTION("ungated components are always feasible") {
    const AttackPlan p = reference::full_drain_plan({"cpu", "brightness"});
    CHECK(check_feasibility(p, bare, reg()).feasible);
  }

  SECTION("setting satisfied either directly or via permission") {
    const AttackPlan p = reference::full_drain_plan({"wifi_down"});
    CHECK_FALSE(check_feasibility(p, bare, reg()).feasible);

    DeviceProfile enabled;
    enabled.enabled_settings = {"wifi_enabled"};
    CHECK(check_feasibility(p, enabled, reg()).feasible);

    DeviceProfile authorized;
    authorized.granted_permissions = {"CHANGE_WIFI_STATE"};
    CHECK(check_feasibility(p, authorized, reg()).feasible);
  }

  SECTION("hard permission gate is not bypassed by the setting") {
    const AttackPlan p = reference::full_drain_plan({"bluetooth"});
    DeviceProfile enabled;
    enabled.enabled_settings = {"bluetooth_enabled"};
    const FeasibilityReport r = check_feasibility(p, enabled, reg());
    CHECK_FALSE(r.feasible);
    CHECK(r.missing_permissions.count("BLUETOOTH") == 1);
  }

  SECTION("web launches bypass permissions but require web access") {
    AttackPlan p = reference::full_drain_plan({"cpu", "gps"},
                                              LaunchLocation::web);
    const FeasibilityReport r = check_feasibility(p, bare, reg());
    CHECK_FALSE(r.feasible);
    REQUIRE(r.web_blocked.count("gps") == 1);
    CHECK(r.web_blocked.count("cpu") == 0);
    CHECK(r.missing_permissions.empty());

    AttackPlan ok = reference::full_drain_plan(
        {"cpu", "encryption", "web_composite"}, LaunchLocation::web);
    CHECK(check_feasibility(ok, bare, reg()).feasible);
  }

  SECTION("verdicts cover every referenced component") {
    const AttackPlan p = reference::full_drain_plan({"gps", "photo", "cpu"});
    const FeasibilityReport r = check_feasibility(p, bare, reg());
    CHECK(r.verdicts.size() == 3);
  }
}

TEST_CASE("stealth scoring") {
  SECTION("bundled components score 4") {
    CHECK(stealth_score(trio_full(), reg()) == 4);
  }

  SECTION("minimum over referenced components") {
    ComponentRegistry custom = reg();
    ComponentSpec noisy = custom.at("vibration");
    noisy.stealth_level = 1;
    custom.add(noisy);
    const AttackPlan p = reference::full_drain_plan({"cpu", "vibration"});
    CHECK(stealth_score(p, custom) == 1);
  }

  SECTION("unset stealth refuses to guess") {
    ComponentRegistry custom = reg();
    ComponentSpec unknown = custom.at("cpu");
    unknown.stealth_level.reset();
    custom.add(unknown);
    const AttackPlan p = reference::full_drain_plan({"cpu"});
    CHECK_THROWS_WITH(stealth_score(p, custom),
                      Catch::Matchers::ContainsSubstring("stealth"));
  }
}
