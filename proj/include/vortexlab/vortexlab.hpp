#pragma once

#include "config.hpp"
#include "diagnostics.hpp"
#include "green.hpp"
#include "grid.hpp"
#include "io.hpp"
#include "plot.hpp"
#include "radial.hpp"
#include "solver.hpp"
#include "spectral.hpp"
#include "toml_lite.hpp"
