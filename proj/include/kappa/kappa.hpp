#pragma once

#include "kappa/core.hpp"
#include "kappa/density.hpp"
#include "kappa/gibbs.hpp"
#include "kappa/invariants.hpp"
#include "kappa/io.hpp"
#include "kappa/manifold.hpp"
#include "kappa/solver.hpp"
