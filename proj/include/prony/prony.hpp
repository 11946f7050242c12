#pragma once

// Umbrella header: spike-train signals, moment Hankel matrices, Prony
// inversion, exact low-rank fitting geometry, distance lower bounds and the
// search oracle that confronts them.

#include "prony/bounds.hpp"
#include "prony/errors.hpp"
#include "prony/experiments.hpp"
#include "prony/hankel.hpp"
#include "prony/inversion.hpp"
#include "prony/io.hpp"
#include "prony/rng.hpp"
#include "prony/search.hpp"
#include "prony/sigma.hpp"
#include "prony/signal.hpp"
