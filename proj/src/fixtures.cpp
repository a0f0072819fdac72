#include "mtdgrid/fixtures.hpp"

#include <cstdlib>

namespace mtdgrid {

std::string fixtures_dir() {
    if (const char* env = std::getenv("MTDGRID_FIXTURES"); env && *env) return env;
#ifdef MTDGRID_DEFAULT_FIXTURES
    return MTDGRID_DEFAULT_FIXTURES;
#else
    return "fixtures";
#endif
}

GridCase load_fixture(const std::string& name) {
    return load_case_file(fixtures_dir() + "/" + name + ".case");
}

}  // namespace mtdgrid
