#pragma once

// Umbrella header: supervised cross-aligned-network link prediction for new
// users, with personalized within-network sampling.

#include "scanps/experiment.hpp"
#include "scanps/features.hpp"
#include "scanps/hetnet.hpp"
#include "scanps/learn.hpp"
#include "scanps/methods.hpp"
#include "scanps/rng.hpp"
#include "scanps/sampling.hpp"
#include "scanps/sparse_vector.hpp"
#include "scanps/synthgen.hpp"
