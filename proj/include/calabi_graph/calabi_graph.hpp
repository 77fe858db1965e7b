#pragma once

#include "curvature.hpp"
#include "existence.hpp"
#include "flows.hpp"
#include "generators.hpp"
#include "graph.hpp"
#include "io.hpp"
#include "operators.hpp"
#include "random.hpp"
