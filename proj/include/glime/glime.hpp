#pragma once

// Umbrella header: local explanation of black-box classifiers through
// sparse conditional-dependence networks, with a linear-surrogate baseline
// and a rank-stability harness.

#include "glime/errors.hpp"
#include "glime/rng.hpp"
#include "glime/tabular.hpp"
#include "glime/perturbation.hpp"
#include "glime/predictor.hpp"
#include "glime/glasso.hpp"
#include "glime/network.hpp"
#include "glime/explanation.hpp"
#include "glime/lime.hpp"
#include "glime/stability.hpp"
#include "glime/exporters.hpp"
#include "glime/datagen.hpp"
#include "glime/pipeline.hpp"
