#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "ymh/energy.hpp"

namespace ymh {

struct GrayImage {
    int width = 0, height = 0;
    std::vector<std::uint8_t> pixels; ///< row-major, top row first
};

/// Min-max normalized grayscale of a field of the state. Selectors: density,
/// curvature, moment. A constant field renders as all-zero pixels.
inline GrayImage render_field(const FlowState& state, const std::string& selector) {
    const GridSpec& g = state.spec();
    ScalarGrid f(g);
    if (selector == "density") {
        f = density_field(state);
    } else if (selector == "curvature") {
        f = curvature(state.A);
    } else if (selector == "moment") {
        for (int iy = 0; iy < g.n; ++iy)
            for (int ix = 0; ix < g.n; ++ix)
                f(ix, iy) = moment(state.model(), state.phi(ix, iy));
    } else {
        throw Error("render: unknown field selector '" + selector + "'");
    }

    double lo = f.data()[0], hi = f.data()[0];
    for (size_t i = 0; i < f.size(); ++i) {
        lo = std::min(lo, f.data()[i]);
        hi = std::max(hi, f.data()[i]);
    }
    GrayImage img;
    img.width = g.n;
    img.height = g.n;
    img.pixels.resize(f.size(), 0);
    if (hi > lo) {
        const double scale = 255.0 / (hi - lo);
        for (int iy = 0; iy < g.n; ++iy)
            for (int ix = 0; ix < g.n; ++ix)
                img.pixels[static_cast<size_t>(iy) * g.n + ix] =
                    static_cast<std::uint8_t>(std::lround((f(ix, iy) - lo) * scale));
    }
    return img;
}

/// Binary portable graymap (P5), written atomically.
inline void write_pgm(const std::filesystem::path& path, const GrayImage& img) {
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("write_pgm: cannot open " + tmp.string());
        out << "P5\n" << img.width << " " << img.height << "\n255\n";
        out.write(reinterpret_cast<const char*>(img.pixels.data()),
                  static_cast<std::streamsize>(img.pixels.size()));
        if (!out) throw Error("write_pgm: write failed");
    }
    std::filesystem::rename(tmp, path);
}

} // namespace ymh
