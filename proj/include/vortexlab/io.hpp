#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>

#include "json.hpp"

#include "grid.hpp"
#include "radial.hpp"

namespace vortexlab {

using json = nlohmann::json;

inline std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << content;
}

namespace detail {

inline void put_le64(std::string& buf, double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, 8);
    if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
    char b[8];
    std::memcpy(b, &bits, 8);
    buf.append(b, 8);
}

inline double get_le64(const char* p) {
    std::uint64_t bits;
    std::memcpy(&bits, p, 8);
    if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
    double v;
    std::memcpy(&v, &bits, 8);
    return v;
}

}  // namespace detail

// Header line of JSON metadata, then nx*ny little-endian doubles, row-major
// (j outer, i inner, matching ScalarField storage).
inline void dump_field_binary(const ScalarField& f, const std::string& name,
                              const std::string& path) {
    const TorusGrid& g = f.grid();
    json hdr = {{"Nx", g.nx}, {"Ny", g.ny}, {"Lx", g.lx}, {"Ly", g.ly}, {"name", name}};
    std::string buf = hdr.dump();
    buf.push_back('\n');
    buf.reserve(buf.size() + 8 * f.size());
    for (std::size_t k = 0; k < f.size(); ++k) detail::put_le64(buf, f[k]);
    write_text_file(path, buf);
}

struct LoadedField {
    ScalarField field;
    std::string name;
};

inline LoadedField load_field_binary(const std::string& path) {
    const std::string buf = read_text_file(path);
    const std::size_t nl = buf.find('\n');
    if (nl == std::string::npos) throw std::runtime_error("field file has no header line: " + path);
    json hdr = json::parse(buf.substr(0, nl));
    const int nx = hdr.at("Nx").get<int>();
    const int ny = hdr.at("Ny").get<int>();
    TorusGrid g(nx, ny, hdr.at("Lx").get<double>(), hdr.at("Ly").get<double>());
    const std::size_t need = std::size_t(nx) * std::size_t(ny) * 8;
    if (buf.size() - nl - 1 != need)
        throw std::runtime_error("field payload size mismatch in " + path);
    LoadedField out{ScalarField(g), hdr.value("name", "")};
    const char* p = buf.data() + nl + 1;
    for (std::size_t k = 0; k < out.field.size(); ++k) out.field[k] = detail::get_le64(p + 8 * k);
    return out;
}

inline void dump_field_csv(const ScalarField& f, const std::string& path) {
    const TorusGrid& g = f.grid();
    std::ostringstream out;
    out.precision(17);
    out << "x,y,value\n";
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i)
            out << g.x(i) << ',' << g.y(j) << ',' << f.at(i, j) << '\n';
    write_text_file(path, out.str());
}

inline std::string boundary_label(const RadialProfile& prof) {
    if (prof.non_physical) return "non_physical";
    return prof.boundary_class == BoundaryClass::log_divergent ? "log_divergent"
                                                               : "decays_to_zero";
}

inline void dump_profile_csv(const RadialProfile& prof, const std::string& path) {
    std::ostringstream out;
    out.precision(17);
    out << "r,w\n";
    for (std::size_t k = 0; k < prof.r_grid.size(); ++k)
        out << prof.r_grid[k] << ',' << prof.w_grid[k] << '\n';
    write_text_file(path, out.str());
}

inline json profile_metadata(const RadialProfile& prof) {
    return json{{"m", prof.m},
                {"s", prof.s},
                {"beta", prof.beta},
                {"r_max", prof.r_max},
                {"boundary_class", boundary_label(prof)},
                {"partial", prof.partial}};
}

// FNV-1a over the canonical (sorted-key, shortest-round-trip) JSON dump.
inline std::uint64_t fnv1a64(const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::string config_hash(const json& canonical) {
    const std::uint64_t h = fnv1a64(canonical.dump());
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return std::string(buf);
}

}  // namespace vortexlab
