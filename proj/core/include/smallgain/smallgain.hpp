#pragma once

#include "smallgain/behaviors.hpp"
#include "smallgain/certify.hpp"
#include "smallgain/decrease.hpp"
#include "smallgain/error.hpp"
#include "smallgain/gains.hpp"
#include "smallgain/signals.hpp"
#include "smallgain/simulate.hpp"
