#pragma once

#include "bdf3/errors.hpp"
#include "bdf3/time_grid.hpp"
#include "bdf3/linalg.hpp"
#include "bdf3/bdf_kernels.hpp"
#include "bdf3/ratio_analysis.hpp"
#include "bdf3/spectral.hpp"
#include "bdf3/allen_cahn.hpp"
#include "bdf3/study.hpp"
#include "bdf3/io.hpp"
