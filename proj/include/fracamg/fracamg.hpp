#pragma once

#include "fracamg/errors.hpp"
#include "fracamg/problem.hpp"
#include "fracamg/toeplitz.hpp"
#include "fracamg/vecops.hpp"
#include "fracamg/assembly.hpp"
#include "fracamg/solvers.hpp"
#include "fracamg/amg.hpp"
#include "fracamg/camg_dense.hpp"
#include "fracamg/analysis.hpp"
#include "fracamg/timestepper.hpp"
#include "fracamg/csv.hpp"
#include "fracamg/cli.hpp"
