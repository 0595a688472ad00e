#pragma once

// Umbrella header for the blocksolve library: randomized primal-dual
// proximal block coordinate updates for multi-block linearly constrained
// convex programs, their stochastic-gradient variant, parameter
// validators, deterministic reference methods, and the benchmark
// harness.

#include "blocksolve/block.hpp"
#include "blocksolve/linear_map.hpp"
#include "blocksolve/prox.hpp"
#include "blocksolve/smooth.hpp"
#include "blocksolve/problem.hpp"
#include "blocksolve/generators.hpp"
#include "blocksolve/problem_io.hpp"
#include "blocksolve/sampler.hpp"
#include "blocksolve/config.hpp"
#include "blocksolve/state.hpp"
#include "blocksolve/rpdbu.hpp"
#include "blocksolve/rpdbus.hpp"
#include "blocksolve/validator.hpp"
#include "blocksolve/baselines.hpp"
#include "blocksolve/runner.hpp"
#include "blocksolve/trace.hpp"
#include "blocksolve/harness.hpp"
