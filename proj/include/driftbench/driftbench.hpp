#pragma once

// Umbrella header for the whole library.

#include "driftbench/active.hpp"
#include "driftbench/civil.hpp"
#include "driftbench/corpus.hpp"
#include "driftbench/error.hpp"
#include "driftbench/features.hpp"
#include "driftbench/io.hpp"
#include "driftbench/metrics.hpp"
#include "driftbench/models.hpp"
#include "driftbench/parallel.hpp"
#include "driftbench/rng.hpp"
#include "driftbench/synthgen.hpp"
#include "driftbench/tuning.hpp"
#include "driftbench/version.hpp"
#include "driftbench/windows.hpp"
