#pragma once

// Umbrella header: the whole library in one include.

#include "deconflict/aircraft.hpp"
#include "deconflict/bench.hpp"
#include "deconflict/branch_and_bound.hpp"
#include "deconflict/control_model.hpp"
#include "deconflict/convex_qp.hpp"
#include "deconflict/errors.hpp"
#include "deconflict/generators.hpp"
#include "deconflict/geometry.hpp"
#include "deconflict/instance_io.hpp"
#include "deconflict/interior_point.hpp"
#include "deconflict/io_util.hpp"
#include "deconflict/local_nlp.hpp"
#include "deconflict/log.hpp"
#include "deconflict/relaxations.hpp"
#include "deconflict/report_io.hpp"
#include "deconflict/resolution.hpp"
#include "deconflict/rng.hpp"
#include "deconflict/svg_plot.hpp"
#include "deconflict/vec2.hpp"
