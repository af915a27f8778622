#pragma once

// Umbrella header: the solver path plus the exact-oracle verification layer.

#include "stackgame/config.hpp"
#include "stackgame/lagrangian.hpp"
#include "stackgame/monotone.hpp"
#include "stackgame/operator.hpp"
#include "stackgame/outer_loop.hpp"
#include "stackgame/problem.hpp"
#include "stackgame/problems.hpp"
#include "stackgame/quadratic_oracle.hpp"
#include "stackgame/random.hpp"
#include "stackgame/ratefit.hpp"
#include "stackgame/schedule.hpp"
#include "stackgame/trace_io.hpp"
#include "stackgame/types.hpp"
