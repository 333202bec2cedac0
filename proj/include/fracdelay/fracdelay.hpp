#pragma once

// Umbrella header: delayed Mittag-Leffler matrix functions, the analytical
// solver for Hilfer-type fractional linear time-delay systems, and the
// verification oracles.

#include "fracdelay/delayed_ml.hpp"
#include "fracdelay/errors.hpp"
#include "fracdelay/fractional_ops.hpp"
#include "fracdelay/function_spec.hpp"
#include "fracdelay/kernel.hpp"
#include "fracdelay/matrix.hpp"
#include "fracdelay/parallel.hpp"
#include "fracdelay/problem.hpp"
#include "fracdelay/problem_io.hpp"
#include "fracdelay/quadrature.hpp"
#include "fracdelay/solver.hpp"
#include "fracdelay/special.hpp"
#include "fracdelay/verify.hpp"
