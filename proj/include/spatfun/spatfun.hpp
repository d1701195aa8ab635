#pragma once

#include "spatfun/bounds.hpp"
#include "spatfun/covariance.hpp"
#include "spatfun/designs.hpp"
#include "spatfun/estimators.hpp"
#include "spatfun/grid.hpp"
#include "spatfun/mc.hpp"
#include "spatfun/operators.hpp"
#include "spatfun/report.hpp"
#include "spatfun/rng.hpp"
#include "spatfun/simulate.hpp"
