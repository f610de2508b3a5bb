#pragma once

#include "iqp/credal.hpp"
#include "iqp/csv.hpp"
#include "iqp/error.hpp"
#include "iqp/event_expr.hpp"
#include "iqp/quantum.hpp"
#include "iqp/scenario.hpp"
#include "iqp/simplex.hpp"
#include "iqp/trajectory.hpp"
#include "iqp/typicality.hpp"
