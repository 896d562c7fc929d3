#pragma once

#include "frogsim/aux_process.hpp"
#include "frogsim/branching.hpp"
#include "frogsim/exact.hpp"
#include "frogsim/experiments.hpp"
#include "frogsim/frog.hpp"
#include "frogsim/model.hpp"
#include "frogsim/report_io.hpp"
#include "frogsim/stats.hpp"
#include "frogsim/theory.hpp"
