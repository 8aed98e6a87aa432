#pragma once
// Umbrella header: the whole library.

#include "config.hpp"
#include "csvio.hpp"
#include "growth.hpp"
#include "harness.hpp"
#include "mixbits.hpp"
#include "noise.hpp"
#include "numerics.hpp"
#include "polymer.hpp"
#include "report.hpp"
#include "rollers.hpp"
#include "she.hpp"
#include "stats.hpp"
#include "walk_kernels.hpp"
