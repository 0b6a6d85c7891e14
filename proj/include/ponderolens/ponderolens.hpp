#pragma once
/// Umbrella header for the ponderolens toolkit.
#include "config.hpp"
#include "constants.hpp"
#include "cost.hpp"
#include "electron_probe.hpp"
#include "errors.hpp"
#include "grid.hpp"
#include "grid_file.hpp"
#include "interpolation.hpp"
#include "kinematics.hpp"
#include "metrics.hpp"
#include "optimizer.hpp"
#include "parallel.hpp"
#include "pipeline.hpp"
#include "ponderomotive.hpp"
#include "rng.hpp"
#include "vector_focus.hpp"
#include "zernike.hpp"
#include "zoom_dft.hpp"
