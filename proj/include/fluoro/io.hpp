#pragma once
// File formats.
//
// Photon stream CSV: header "time_s,channel", one row per photon.
// Photon stream binary: magic "FBT1", uint64 count, then count float64
// timestamps; little-endian throughout.
// Detection events CSV: header "time_s,side,port"; side 0=Alice 1=Bob,
// port 0/1; the flat channel map is {A1,A2,B1,B2} -> {0,1,2,3}.
// All floats are written with %.17g so reruns are byte-identical.
#include <bit>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>
#include "fluoro/errors.hpp"
#include "fluoro/franson.hpp"

static_assert(std::endian::native == std::endian::little,
              "binary stream format assumes a little-endian host");

namespace fluoro {

inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline void write_text_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open for writing: " + path.string());
    f.write(content.data(), std::streamsize(content.size()));
    if (!f) throw IoError("write failed: " + path.string());
}

inline std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open: " + path.string());
    std::string s((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    return s;
}

// ---- photon streams ---------------------------------------------------------

inline void write_photon_stream_csv(const std::filesystem::path& path,
                                    const std::vector<double>& times, int channel = 0) {
    std::string s = "time_s,channel\n";
    for (double t : times) {
        s += format_double(t);
        s += ',';
        s += std::to_string(channel);
        s += '\n';
    }
    write_text_file(path, s);
}

inline std::vector<double> read_photon_stream_csv(const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot open: " + path.string());
    std::string line;
    if (!std::getline(f, line) || line.rfind("time_s", 0) != 0)
        throw IoError("bad photon stream header in " + path.string());
    std::vector<double> out;
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        out.push_back(std::strtod(line.c_str(), nullptr));
    }
    return out;
}

inline void write_photon_stream_binary(const std::filesystem::path& path,
                                       const std::vector<double>& times) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open for writing: " + path.string());
    f.write("FBT1", 4);
    uint64_t n = times.size();
    f.write(reinterpret_cast<const char*>(&n), 8);
    f.write(reinterpret_cast<const char*>(times.data()), std::streamsize(8 * times.size()));
    if (!f) throw IoError("write failed: " + path.string());
}

inline std::vector<double> read_photon_stream_binary(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open: " + path.string());
    char magic[4];
    f.read(magic, 4);
    if (!f || std::memcmp(magic, "FBT1", 4) != 0)
        throw IoError("bad magic in " + path.string());
    uint64_t n = 0;
    f.read(reinterpret_cast<char*>(&n), 8);
    if (!f) throw IoError("truncated stream file: " + path.string());
    std::vector<double> out(n);
    f.read(reinterpret_cast<char*>(out.data()), std::streamsize(8 * n));
    if (!f) throw IoError("truncated stream file: " + path.string());
    return out;
}

// ---- detection events ---------------------------------------------------------

inline void write_detection_events_csv(const std::filesystem::path& path,
                                       const std::vector<DetectionEvent>& events) {
    std::string s = "time_s,side,port\n";
    for (const auto& e : events) {
        s += format_double(e.time);
        s += ',';
        s += char('0' + e.side);
        s += ',';
        s += char('0' + e.port);
        s += '\n';
    }
    write_text_file(path, s);
}

inline std::vector<DetectionEvent> read_detection_events_csv(const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot open: " + path.string());
    std::string line;
    if (!std::getline(f, line) || line.rfind("time_s,side,port", 0) != 0)
        throw IoError("bad detection event header in " + path.string());
    std::vector<DetectionEvent> out;
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        char* p = nullptr;
        double t = std::strtod(line.c_str(), &p);
        if (!p || *p != ',') throw IoError("bad row in " + path.string());
        long side = std::strtol(p + 1, &p, 10);
        if (!p || *p != ',') throw IoError("bad row in " + path.string());
        long port = std::strtol(p + 1, &p, 10);
        if (side < 0 || side > 1 || port < 0 || port > 1)
            throw IoError("bad side/port in " + path.string());
        out.push_back({t, uint8_t(side), uint8_t(port)});
    }
    return out;
}

// ---- misc ----------------------------------------------------------------------

// FNV-1a 64-bit, used to stamp configs into run metadata
inline uint64_t fnv1a64(const std::string& s) {
    uint64_t h = 14695981039346656037ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

inline std::string hex64(uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

} // namespace fluoro
