#pragma once

// Umbrella header for the slender-body toolkit.

#include "errors.hpp"
#include "types.hpp"
#include "fourier.hpp"
#include "quadrature.hpp"
#include "geometry.hpp"
#include "kernels.hpp"
#include "force.hpp"
#include "slender_body.hpp"
#include "residuals.hpp"
#include "parallel.hpp"
#include "harness.hpp"
