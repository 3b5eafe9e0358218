#pragma once

// Umbrella header.

#include "ball.hpp"
#include "csv.hpp"
#include "experiment.hpp"
#include "exploration.hpp"
#include "graphs.hpp"
#include "percolation.hpp"
#include "rng.hpp"
#include "walk.hpp"
#include "words.hpp"
