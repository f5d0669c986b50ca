// bestk.hpp - umbrella header
#pragma once

#include "bestk/rng.hpp"
#include "bestk/errors.hpp"
#include "bestk/arm_model.hpp"
#include "bestk/instance.hpp"
#include "bestk/complexity.hpp"
#include "bestk/subroutines.hpp"
#include "bestk/algorithm.hpp"
#include "bestk/harness.hpp"
#include "bestk/cli.hpp"
