#pragma once

#include "microtrap/dynamics.hpp"
#include "microtrap/errors.hpp"
#include "microtrap/field.hpp"
#include "microtrap/grid.hpp"
#include "microtrap/layout.hpp"
#include "microtrap/layout_io.hpp"
#include "microtrap/schedule.hpp"
#include "microtrap/species.hpp"
#include "microtrap/trap_analysis.hpp"
#include "microtrap/trap_library.hpp"
#include "microtrap/units.hpp"
