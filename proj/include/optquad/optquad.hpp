#pragma once

#include "optquad/bigreal.hpp"
#include "optquad/discrete_operator.hpp"
#include "optquad/errors.hpp"
#include "optquad/exact_core.hpp"
#include "optquad/quad_engine.hpp"
#include "optquad/rootfinder.hpp"
#include "optquad/rule_builder.hpp"
#include "optquad/rule_file.hpp"
