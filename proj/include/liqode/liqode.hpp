#pragma once

#include "liqode/bounds.hpp"
#include "liqode/core.hpp"
#include "liqode/errors.hpp"
#include "liqode/finance.hpp"
#include "liqode/grid_solution.hpp"
#include "liqode/io.hpp"
#include "liqode/log.hpp"
#include "liqode/ode.hpp"
#include "liqode/properties.hpp"
#include "liqode/series.hpp"
#include "liqode/solver.hpp"
