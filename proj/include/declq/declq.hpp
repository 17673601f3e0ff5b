#pragma once

#include "declq/errors.hpp"
#include "declq/linalg.hpp"
#include "declq/model.hpp"
#include "declq/riccati.hpp"
#include "declq/observers.hpp"
#include "declq/gain_synthesis.hpp"
#include "declq/sim.hpp"
#include "declq/cost.hpp"
