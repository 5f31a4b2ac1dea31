#pragma once

#include "geostorage/analysis.hpp"
#include "geostorage/assembly.hpp"
#include "geostorage/coefficients.hpp"
#include "geostorage/config.hpp"
#include "geostorage/errors.hpp"
#include "geostorage/format.hpp"
#include "geostorage/grid.hpp"
#include "geostorage/io/output.hpp"
#include "geostorage/io/run_file.hpp"
#include "geostorage/io/runner.hpp"
#include "geostorage/timestepping.hpp"
