#pragma once

#include "dvpp/ratfun/polynomial.hpp"
#include "dvpp/ratfun/rational.hpp"
#include "dvpp/ratfun/roots.hpp"
#include "dvpp/ratfun/state_space.hpp"
#include "dvpp/ratfun/tolerances.hpp"
