#pragma once

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include "fpx/error.hpp"
#include "fpx/grid.hpp"

namespace fpx {

namespace detail {

// Shortest decimal text that parses back to the same double.
inline std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

inline double parse_double(const std::string& s) {
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) throw IoError("bad number '" + s + "'");
    return v;
}

}  // namespace detail

// Binary PGM (P5, maxval 255). Pixels are the raw cell bytes in storage order
// (row 0 = minimum y first). Geometry travels in a header comment.
inline void write_pgm(std::ostream& os, const GridMap& map) {
    os << "P5\n# resolution=" << detail::format_double(map.resolution())
       << " origin=" << detail::format_double(map.origin().x) << ',' << detail::format_double(map.origin().y) << '\n'
       << map.width() << ' ' << map.height() << "\n255\n";
    os.write(reinterpret_cast<const char*>(map.bytes().data()), static_cast<std::streamsize>(map.size()));
}

inline void write_pgm(const std::string& path, const GridMap& map) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open " + path + " for writing");
    write_pgm(f, map);
    if (!f) throw IoError("write failed for " + path);
}

inline GridMap read_pgm(std::istream& is) {
    std::string magic;
    is >> magic;
    if (magic != "P5") throw IoError("not a binary PGM (P5) stream");

    double resolution = kDefaultResolution;
    WorldPoint origin{};
    std::vector<int> header;
    while (header.size() < 3) {
        is >> std::ws;
        if (!is) throw IoError("truncated PGM header");
        if (is.peek() == '#') {
            std::string line;
            std::getline(is, line);
            std::istringstream ls(line.substr(1));
            std::string tok;
            while (ls >> tok) {
                if (tok.rfind("resolution=", 0) == 0) {
                    resolution = detail::parse_double(tok.substr(11));
                } else if (tok.rfind("origin=", 0) == 0) {
                    const std::string xy = tok.substr(7);
                    const auto comma = xy.find(',');
                    if (comma == std::string::npos) throw IoError("bad origin in PGM comment");
                    origin = {detail::parse_double(xy.substr(0, comma)), detail::parse_double(xy.substr(comma + 1))};
                }
            }
            continue;
        }
        int v = 0;
        if (!(is >> v)) throw IoError("truncated PGM header");
        header.push_back(v);
    }
    if (header[2] != 255) throw IoError("PGM maxval must be 255");
    is.get();  // single whitespace before the raster
    std::vector<std::uint8_t> bytes(static_cast<std::size_t>(header[0]) * static_cast<std::size_t>(header[1]));
    is.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (is.gcount() != static_cast<std::streamsize>(bytes.size())) throw IoError("truncated PGM raster");
    return GridMap::from_bytes(header[0], header[1], std::move(bytes), resolution, origin);
}

inline GridMap read_pgm(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open " + path);
    return read_pgm(f);
}

}  // namespace fpx
