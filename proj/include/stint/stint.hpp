#pragma once

#include "stint/common.hpp"
#include "stint/identities.hpp"
#include "stint/jobs.hpp"
#include "stint/lattice.hpp"
#include "stint/quadrature.hpp"
#include "stint/shapes.hpp"
#include "stint/specfun.hpp"
#include "stint/weights.hpp"
