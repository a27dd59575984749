#pragma once

#include "phonsub/analysis.hpp"
#include "phonsub/constants.hpp"
#include "phonsub/dynamics.hpp"
#include "phonsub/errors.hpp"
#include "phonsub/fock_oracle.hpp"
#include "phonsub/gaussian.hpp"
#include "phonsub/params.hpp"
#include "phonsub/quadrature.hpp"
#include "phonsub/subtraction.hpp"
