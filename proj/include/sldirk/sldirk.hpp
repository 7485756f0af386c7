#pragma once

#include "sldirk/errors.hpp"
#include "sldirk/keyvalue.hpp"
#include "sldirk/butcher.hpp"
#include "sldirk/order_analysis.hpp"
#include "sldirk/stability.hpp"
#include "sldirk/dg.hpp"
#include "sldirk/models.hpp"
#include "sldirk/sl_solver.hpp"
#include "sldirk/harness.hpp"
