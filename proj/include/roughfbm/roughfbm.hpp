#pragma once

// Umbrella header: fractional Brownian motion sampling, level-2 rough path
// lifts, rough integration of one-forms in both the Stratonovich and the
// zero-mean (Ito) sense, differential equations driven by either lift, and
// the fractional Black-Scholes pricing layer built on top.

#include "roughfbm/core.hpp"
#include "roughfbm/fbm.hpp"
#include "roughfbm/finance.hpp"
#include "roughfbm/grid.hpp"
#include "roughfbm/integrate.hpp"
#include "roughfbm/io.hpp"
#include "roughfbm/linalg.hpp"
#include "roughfbm/mc.hpp"
#include "roughfbm/oneform.hpp"
#include "roughfbm/rde.hpp"
#include "roughfbm/rng.hpp"
#include "roughfbm/roughpath.hpp"
#include "roughfbm/version.hpp"
