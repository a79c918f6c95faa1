#pragma once

#include "vodsim/clustering.hpp"
#include "vodsim/error.hpp"
#include "vodsim/experiments.hpp"
#include "vodsim/gf256.hpp"
#include "vodsim/graph.hpp"
#include "vodsim/netcode.hpp"
#include "vodsim/probe.hpp"
#include "vodsim/rng.hpp"
#include "vodsim/rrdbfsf.hpp"
#include "vodsim/scenario.hpp"
#include "vodsim/sim.hpp"
