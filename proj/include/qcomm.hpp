#pragma once

#include "qcomm/errors.hpp"
#include "qcomm/graph.hpp"
#include "qcomm/qubo.hpp"
#include "qcomm/model.hpp"
#include "qcomm/rng.hpp"
#include "qcomm/annealer.hpp"
#include "qcomm/engine.hpp"
#include "qcomm/datasets.hpp"
#include "qcomm/record.hpp"
#include "qcomm/bench.hpp"
