#pragma once

// Umbrella header.

#include "pdrplan/types.hpp"
#include "pdrplan/core_model.hpp"
#include "pdrplan/feasibility.hpp"
#include "pdrplan/floorplan.hpp"
#include "pdrplan/rcg.hpp"
#include "pdrplan/cost.hpp"
#include "pdrplan/iar.hpp"
#include "pdrplan/anneal.hpp"
#include "pdrplan/oracle.hpp"
#include "pdrplan/bench_io.hpp"
