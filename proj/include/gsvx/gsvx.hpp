#pragma once

#include "gsvx/cli.hpp"
#include "gsvx/core.hpp"
#include "gsvx/experiments.hpp"
#include "gsvx/gmp.hpp"
#include "gsvx/grassmann_newton.hpp"
#include "gsvx/io.hpp"
#include "gsvx/lanczos.hpp"
#include "gsvx/solver.hpp"
