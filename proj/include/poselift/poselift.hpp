#pragma once

// Umbrella header for the poselift benchmark kit.

#include "poselift/adam.hpp"
#include "poselift/autodiff.hpp"
#include "poselift/budgeting.hpp"
#include "poselift/error.hpp"
#include "poselift/io.hpp"
#include "poselift/liftnet.hpp"
#include "poselift/metrics.hpp"
#include "poselift/report.hpp"
#include "poselift/rng.hpp"
#include "poselift/synthmotion.hpp"
#include "poselift/tensor.hpp"
#include "poselift/trainer.hpp"
