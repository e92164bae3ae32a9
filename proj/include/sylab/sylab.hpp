#pragma once

// Umbrella header.

#include "sylab/coefficients.hpp"
#include "sylab/config.hpp"
#include "sylab/error.hpp"
#include "sylab/exponents.hpp"
#include "sylab/glue.hpp"
#include "sylab/grid.hpp"
#include "sylab/hyperdual.hpp"
#include "sylab/linear_checks.hpp"
#include "sylab/mode_solver.hpp"
#include "sylab/nullspace.hpp"
#include "sylab/picard.hpp"
#include "sylab/radial_profile.hpp"
#include "sylab/runner.hpp"
#include "sylab/tridiagonal.hpp"
#include "sylab/warped_lift.hpp"
#include "sylab/weighted_norms.hpp"
