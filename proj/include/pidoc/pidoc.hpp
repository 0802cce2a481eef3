// Umbrella header.
#pragma once

#include "pidoc/config.hpp"
#include "pidoc/csv.hpp"
#include "pidoc/error.hpp"
#include "pidoc/experiment.hpp"
#include "pidoc/lbfgs.hpp"
#include "pidoc/loss.hpp"
#include "pidoc/metrics.hpp"
#include "pidoc/network.hpp"
#include "pidoc/plotdata.hpp"
#include "pidoc/signal.hpp"
#include "pidoc/sweep.hpp"
#include "pidoc/vdp.hpp"
