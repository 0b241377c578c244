#pragma once

// Umbrella header for the full library.

#include "augbagg/config.hpp"
#include "augbagg/csv.hpp"
#include "augbagg/dataset.hpp"
#include "augbagg/ensemble.hpp"
#include "augbagg/errors.hpp"
#include "augbagg/experiment.hpp"
#include "augbagg/linear.hpp"
#include "augbagg/parallel.hpp"
#include "augbagg/plot.hpp"
#include "augbagg/rng.hpp"
#include "augbagg/runner.hpp"
#include "augbagg/stats.hpp"
#include "augbagg/synth.hpp"
#include "augbagg/tree.hpp"
#include "augbagg/vartest.hpp"
