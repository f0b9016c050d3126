#pragma once

#include <cstdlib>
#include <string>

#ifndef HEVLAB_DEFAULT_DATA_DIR
#define HEVLAB_DEFAULT_DATA_DIR "data"
#endif

namespace hevlab {

/// Bundled asset directory; HEVLAB_DATA_DIR in the environment overrides the build-time default.
inline std::string data_dir()
{
    if (const char* env = std::getenv("HEVLAB_DATA_DIR"); env != nullptr && *env != '\0') {
        return env;
    }
    return HEVLAB_DEFAULT_DATA_DIR;
}

inline std::string data_path(const std::string& relative) { return data_dir() + "/" + relative; }

} // namespace hevlab
