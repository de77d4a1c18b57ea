#pragma once

#include "forestgd/errors.hpp"
#include "forestgd/graph.hpp"
#include "forestgd/graph_io.hpp"
#include "forestgd/generators.hpp"
#include "forestgd/random.hpp"
#include "forestgd/linalg.hpp"
#include "forestgd/forest.hpp"
#include "forestgd/forest_enumeration.hpp"
#include "forestgd/estimators.hpp"
#include "forestgd/monte_carlo.hpp"
#include "forestgd/ssl.hpp"
#include "forestgd/experiments.hpp"
