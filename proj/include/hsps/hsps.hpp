#pragma once

#include "hsps/config.hpp"
#include "hsps/errors.hpp"
#include "hsps/estimates.hpp"
#include "hsps/event_io.hpp"
#include "hsps/event_stream.hpp"
#include "hsps/fit.hpp"
#include "hsps/pair_distribution.hpp"
#include "hsps/rng.hpp"
#include "hsps/simulate.hpp"
#include "hsps/source_model.hpp"
#include "hsps/stats.hpp"
#include "hsps/sweep.hpp"
#include "hsps/tally.hpp"
