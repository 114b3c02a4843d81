#pragma once

#include "nlom/core.hpp"
#include "nlom/f_functions.hpp"
#include "nlom/fock.hpp"
#include "nlom/linearized.hpp"
#include "nlom/observables.hpp"
#include "nlom/oracle.hpp"
#include "nlom/propagate.hpp"
#include "nlom/quadrature.hpp"
#include "nlom/reduced_state.hpp"
#include "nlom/special_functions.hpp"
