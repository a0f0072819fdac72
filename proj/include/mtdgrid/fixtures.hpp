#pragma once

#include <string>

#include "mtdgrid/grid_model.hpp"

namespace mtdgrid {

// Directory holding the bundled .case files; the MTDGRID_FIXTURES environment
// variable overrides the compiled-in default.
std::string fixtures_dir();

// Loads "<fixtures_dir()>/<name>.case".
GridCase load_fixture(const std::string& name);

}  // namespace mtdgrid
