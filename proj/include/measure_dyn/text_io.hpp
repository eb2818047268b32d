#ifndef MEASURE_DYN_TEXT_IO_HPP
#define MEASURE_DYN_TEXT_IO_HPP

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <system_error>

#include "measure_dyn/errors.hpp"

namespace measure_dyn {

/// Shortest decimal form that parses back to the same double ('.' decimal,
/// locale independent). This is the representation used in all CSV output.
inline std::string double_to_string(double x) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, res.ptr);
}

inline std::string long_to_string(long x) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, res.ptr);
}

/// Write-then-rename so readers never observe a partial file.
inline void atomic_write_file(const std::filesystem::path& path, const std::string& contents) {
    namespace fs = std::filesystem;
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw error("cannot open " + tmp.string() + " for writing");
        out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
        out.flush();
        if (!out) throw error("failed writing " + tmp.string());
    }
    fs::rename(tmp, path);
}

}  // namespace measure_dyn

#endif
