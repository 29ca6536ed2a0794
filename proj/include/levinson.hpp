#pragma once

#include "levinson/errors.hpp"
#include "levinson/levinson.hpp"
#include "levinson/numerics.hpp"
#include "levinson/potentials.hpp"
#include "levinson/smatrix.hpp"
#include "levinson/solver.hpp"
#include "levinson/spectral.hpp"
#include "levinson/tolerances.hpp"
