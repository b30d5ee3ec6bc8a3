#pragma once

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "rsynth/arena_text.hpp"

namespace testutil {

inline std::string fixture_path(const std::string& rel) {
    return std::string(RSYNTH_FIXTURE_DIR) + "/" + rel;
}

inline std::string slurp(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

inline rsynth::SMG load_fixture(const std::string& rel) {
    return rsynth::parse_arena(slurp(fixture_path(rel)));
}

// Profile fixtures omit choiceless vertices; complete them like the CLI does.
inline rsynth::StationaryProfile load_profile_fixture(const rsynth::SMG& g,
                                                      const std::string& rel) {
    return rsynth::complete_forced(g, rsynth::parse_profile(g, slurp(fixture_path(rel))));
}

}  // namespace testutil
