#pragma once

// Core library. The JSON pieces (config.hpp, report_io.hpp) need
// nlohmann_json and are included separately.

#include "graphx/error.hpp"
#include "graphx/graph.hpp"
#include "graphx/graph_io.hpp"
#include "graphx/gradient.hpp"
#include "graphx/solver.hpp"
#include "graphx/datasets.hpp"
#include "graphx/csv.hpp"
#include "graphx/eval.hpp"
