#pragma once

#include "noma/special_math.hpp"
#include "noma/system_model.hpp"
#include "noma/analytic_outage.hpp"
#include "noma/analytic_rate.hpp"
#include "noma/montecarlo.hpp"
#include "noma/throughput_ee.hpp"
#include "noma/sweep.hpp"
