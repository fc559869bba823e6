#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "ymh/fields.hpp"

namespace ymh {

static_assert(std::endian::native == std::endian::little,
              "snapshot format is little-endian; big-endian hosts are not supported");

/// Binary state file. Layout (little-endian):
///   magic "YMH1" | u32 version | u32 n | u32 fiber kind | f64 length | f64 time
///   A1 (n^2 f64) | A2 (n^2 f64) | phi component planes (ambient_dim * n^2 f64)
/// all arrays row-major with ix fastest. The byte length is exactly the
/// header-implied length; reads reject anything else.
namespace snapshot {

inline constexpr char kMagic[4] = {'Y', 'M', 'H', '1'};
inline constexpr std::uint32_t kVersion = 1;

inline std::vector<char> encode(const FlowState& state) {
    const GridSpec& g = state.spec();
    const FiberModel& m = state.model();
    const std::uint32_t n = static_cast<std::uint32_t>(g.n);
    const std::uint32_t kind = m.kind == FiberKind::Sphere ? 0u : 1u;
    const size_t cells = static_cast<size_t>(g.size());
    const size_t bytes = 4 + 4 + 4 + 4 + 8 + 8 + 8 * cells * (2 + m.ambient_dim());

    std::vector<char> buf(bytes);
    char* p = buf.data();
    auto put = [&p](const void* src, size_t len) {
        std::memcpy(p, src, len);
        p += len;
    };
    put(kMagic, 4);
    put(&kVersion, 4);
    put(&n, 4);
    put(&kind, 4);
    put(&g.length, 8);
    put(&state.time, 8);
    for (int axis = 1; axis <= 2; ++axis)
        put(state.A.comp(axis).data(), 8 * cells);
    std::vector<double> plane(cells);
    const int adim = m.ambient_dim();
    for (int c = 0; c < adim; ++c) {
        for (size_t i = 0; i < cells; ++i) {
            const Vec3& q = state.phi.points()[i];
            plane[i] = c == 0 ? q.x : (c == 1 ? q.y : q.z);
        }
        put(plane.data(), 8 * cells);
    }
    return buf;
}

inline FlowState decode(const std::vector<char>& buf) {
    if (buf.size() < 32) throw BadSnapshot("snapshot: file too short for header");
    const char* p = buf.data();
    auto get = [&p](void* dst, size_t len) {
        std::memcpy(dst, p, len);
        p += len;
    };
    char magic[4];
    std::uint32_t version = 0, n = 0, kind = 0;
    double length = 0, time = 0;
    get(magic, 4);
    if (std::memcmp(magic, kMagic, 4) != 0) throw BadSnapshot("snapshot: bad magic");
    get(&version, 4);
    if (version != kVersion)
        throw BadSnapshot("snapshot: unsupported version " + std::to_string(version));
    get(&n, 4);
    get(&kind, 4);
    get(&length, 8);
    get(&time, 8);
    if (kind > 1) throw BadSnapshot("snapshot: unknown fiber kind");

    FiberModel model = kind == 0 ? FiberModel::sphere() : FiberModel::plane();
    GridSpec spec;
    try {
        spec = GridSpec(static_cast<int>(n), length);
    } catch (const Error& e) {
        throw BadSnapshot(std::string("snapshot: ") + e.what());
    }
    const size_t cells = static_cast<size_t>(spec.size());
    const size_t expect = 32 + 8 * cells * (2 + model.ambient_dim());
    if (buf.size() != expect)
        throw BadSnapshot("snapshot: byte length " + std::to_string(buf.size()) +
                          " does not match header-implied " + std::to_string(expect));

    GaugeField A(spec);
    for (int axis = 1; axis <= 2; ++axis)
        get(A.comp(axis).data(), 8 * cells);
    SectionField phi(spec, model, Vec3{0, 0, 0});
    std::vector<double> plane(cells);
    const int adim = model.ambient_dim();
    for (int c = 0; c < adim; ++c) {
        get(plane.data(), 8 * cells);
        for (size_t i = 0; i < cells; ++i) {
            Vec3& q = phi.points()[i];
            (c == 0 ? q.x : (c == 1 ? q.y : q.z)) = plane[i];
        }
    }
    return FlowState{std::move(A), std::move(phi), time};
}

} // namespace snapshot

/// Atomic write: encode to <path>.tmp, then rename.
inline void write_snapshot(const std::filesystem::path& path, const FlowState& state) {
    std::vector<char> buf = snapshot::encode(state);
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("write_snapshot: cannot open " + tmp.string());
        out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
        if (!out) throw Error("write_snapshot: write failed for " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

inline FlowState read_snapshot(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw BadSnapshot("read_snapshot: cannot open " + path.string());
    std::vector<char> buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return snapshot::decode(buf);
}

} // namespace ymh
