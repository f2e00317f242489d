#pragma once

// umbrella header

#include "cglwave/config.hpp"
#include "cglwave/errors.hpp"
#include "cglwave/experiments.hpp"
#include "cglwave/field.hpp"
#include "cglwave/grid.hpp"
#include "cglwave/hydro.hpp"
#include "cglwave/io.hpp"
#include "cglwave/norms.hpp"
#include "cglwave/params.hpp"
#include "cglwave/propagators.hpp"
#include "cglwave/random_field.hpp"
#include "cglwave/run.hpp"
#include "cglwave/solver.hpp"
#include "cglwave/two_by_two.hpp"
