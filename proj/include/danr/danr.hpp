#pragma once

#include <danr/error.hpp>
#include <danr/linalg.hpp>
#include <danr/graph.hpp>
#include <danr/prox.hpp>
#include <danr/objectives.hpp>
#include <danr/engine.hpp>
#include <danr/solver.hpp>
#include <danr/st_solver.hpp>
#include <danr/synthetic.hpp>
#include <danr/io.hpp>
#include <danr/harness.hpp>
#include <danr/svg.hpp>
