#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <json.hpp>
#include <string>
#include <vector>

#include "error.hpp"
#include "types.hpp"

namespace rfeye {

// Raw captures: interleaved little-endian float32 I/Q, with a JSON sidecar at <path>.json
// holding sample_rate, wavelength and length.

inline void write_iq(const std::string& path, const IqTrace& t) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error(ErrorCode::Io, "cannot write " + path);
    std::vector<float> buf;
    buf.reserve(2 * t.size());
    for (const cplx& c : t.samples) {
        buf.push_back(static_cast<float>(c.real()));
        buf.push_back(static_cast<float>(c.imag()));
    }
    f.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size() * sizeof(float)));
    std::ofstream s(path + ".json");
    if (!s) throw Error(ErrorCode::Io, "cannot write " + path + ".json");
    nlohmann::json j{{"sample_rate", t.sample_rate}, {"wavelength", t.carrier_wavelength}, {"length", t.size()}};
    s << j.dump(2) << '\n';
}

inline IqTrace read_iq(const std::string& path) {
    std::ifstream s(path + ".json");
    if (!s) throw Error(ErrorCode::Io, "missing sidecar " + path + ".json");
    nlohmann::json j;
    try {
        s >> j;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::Io, std::string("bad sidecar: ") + e.what());
    }
    IqTrace t;
    t.sample_rate = j.value("sample_rate", 1.0);
    t.carrier_wavelength = j.value("wavelength", 1.0);
    const std::size_t n = j.value("length", std::size_t{0});
    std::ifstream f(path, std::ios::binary);
    if (!f) throw Error(ErrorCode::Io, "cannot read " + path);
    std::vector<float> buf(2 * n);
    f.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size() * sizeof(float)));
    if (static_cast<std::size_t>(f.gcount()) != buf.size() * sizeof(float))
        throw Error(ErrorCode::Io, path + ": shorter than the sidecar length");
    t.samples.resize(n);
    for (std::size_t i = 0; i < n; ++i) t.samples[i] = {buf[2 * i], buf[2 * i + 1]};
    return t;
}

} // namespace rfeye
