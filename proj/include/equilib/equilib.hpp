#pragma once

// Umbrella header for the minimum-energy / capacity / balayage toolkit.

#include "equilib/balayage.hpp"
#include "equilib/cli.hpp"
#include "equilib/common.hpp"
#include "equilib/equilibrium.hpp"
#include "equilib/exhaustion.hpp"
#include "equilib/gauss.hpp"
#include "equilib/geometry.hpp"
#include "equilib/io.hpp"
#include "equilib/kernels.hpp"
#include "equilib/measures.hpp"
#include "equilib/qp.hpp"
