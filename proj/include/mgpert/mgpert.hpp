#pragma once

#include "mgpert/analytic.hpp"
#include "mgpert/calibration.hpp"
#include "mgpert/errors.hpp"
#include "mgpert/gauss_legendre.hpp"
#include "mgpert/heat_kernel.hpp"
#include "mgpert/io.hpp"
#include "mgpert/model.hpp"
#include "mgpert/monte_carlo.hpp"
#include "mgpert/nelder_mead.hpp"
#include "mgpert/normal.hpp"
#include "mgpert/parallel.hpp"
#include "mgpert/philox.hpp"
