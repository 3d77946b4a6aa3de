// Umbrella header for the PT-symmetric birefringent-coupler quadrimer
// library.
#pragma once

#include "ptquad/core.hpp"
#include "ptquad/linalg.hpp"
#include "ptquad/spectrum.hpp"
#include "ptquad/perturbation.hpp"
#include "ptquad/exact_modes.hpp"
#include "ptquad/newton.hpp"
#include "ptquad/continuation.hpp"
#include "ptquad/stability.hpp"
#include "ptquad/ghosts.hpp"
#include "ptquad/dynamics.hpp"
#include "ptquad/rng.hpp"
#include "ptquad/io.hpp"
