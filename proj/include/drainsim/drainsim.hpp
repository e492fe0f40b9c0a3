#pragma once

// Umbrella header: the whole battery-drain attack simulator.

#include "drainsim/core.hpp"
#include "drainsim/sampling.hpp"
#include "drainsim/serialization.hpp"
#include "drainsim/plan.hpp"
#include "drainsim/trace.hpp"
#include "drainsim/engine.hpp"
#include "drainsim/calibration.hpp"
#include "drainsim/ranking.hpp"
#include "drainsim/dataset.hpp"
#include "drainsim/harness.hpp"
