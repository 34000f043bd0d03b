#pragma once

// Umbrella header.

#include "phest/bench.hpp"
#include "phest/bottleneck.hpp"
#include "phest/complex.hpp"
#include "phest/diagram.hpp"
#include "phest/errors.hpp"
#include "phest/estimator.hpp"
#include "phest/geometry.hpp"
#include "phest/grid.hpp"
#include "phest/image_persistence.hpp"
#include "phest/observation.hpp"
#include "phest/rank_oracle.hpp"
#include "phest/signal.hpp"
