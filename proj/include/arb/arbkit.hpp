#pragma once

// Umbrella header: cost-performance frontiers, cascade policies, arbitrage
// search, price competition, robustness analysis, and the simulation oracle.

#include "arb/arbitrage.hpp"
#include "arb/cascade.hpp"
#include "arb/competition.hpp"
#include "arb/curves.hpp"
#include "arb/error.hpp"
#include "arb/ingest.hpp"
#include "arb/io.hpp"
#include "arb/mc_oracle.hpp"
#include "arb/passk.hpp"
#include "arb/pricing.hpp"
#include "arb/rng.hpp"
#include "arb/robustness.hpp"
#include "arb/types.hpp"
