#pragma once

#include "ballistic/analytic.hpp"
#include "ballistic/config.hpp"
#include "ballistic/core.hpp"
#include "ballistic/errors.hpp"
#include "ballistic/grid.hpp"
#include "ballistic/interference.hpp"
#include "ballistic/runs.hpp"
#include "ballistic/stepper.hpp"
#include "ballistic/table.hpp"
#include "ballistic/trajectories.hpp"
