#pragma once

#include "lensq/array.hpp"
#include "lensq/constants.hpp"
#include "lensq/dust.hpp"
#include "lensq/estimators.hpp"
#include "lensq/geometry.hpp"
#include "lensq/phase.hpp"
#include "lensq/phasor_sum.hpp"
#include "lensq/rng.hpp"
#include "lensq/signal_model.hpp"
#include "lensq/theory.hpp"
#include "lensq/undersampling.hpp"
#include "lensq/yield.hpp"
