#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <filesystem>
#include <numbers>
#include <random>
#include <string>
#include <unistd.h>

#include "epishear/grid.hpp"
#include "epishear/image.hpp"

namespace testutil {

inline epishear::Grid random_grid(int rows, int cols, std::uint64_t seed, double lo = -1, double hi = 1) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> U(lo, hi);
    epishear::Grid g(rows, cols);
    for (double& v : g.data) v = U(rng);
    return g;
}

inline epishear::Image random_image(int h, int w, int c, std::uint64_t seed, int peak = 255) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> U(0, peak);
    epishear::Image im(h, w, c);
    for (double& v : im.data) v = U(rng);
    return im;
}

inline double max_diff(const epishear::Grid& a, const epishear::Grid& b) {
    double m = 0;
    for (std::size_t i = 0; i < a.data.size(); ++i) m = std::max(m, std::abs(a.data[i] - b.data[i]));
    return m;
}

// brute-force circular convolution, out(t,v) = sum f(a,b) x(t-a, v-b)
inline epishear::Grid circ_conv(const epishear::Grid& x, const epishear::Grid& f) {
    epishear::Grid out(x.rows, x.cols);
    for (int t = 0; t < x.rows; ++t)
        for (int v = 0; v < x.cols; ++v) {
            double s = 0;
            for (int a = 0; a < f.rows; ++a)
                for (int b = 0; b < f.cols; ++b) {
                    const double w = f(a, b);
                    if (w == 0) continue;
                    s += w * x((t - a + x.rows) % x.rows, (v - b + x.cols) % x.cols);
                }
            out(t, v) = s;
        }
    return out;
}

inline std::filesystem::path temp_dir(const std::string& name) {
    auto p = std::filesystem::temp_directory_path() / ("epishear_test_" + name + "_" + std::to_string(::getpid()));
    std::filesystem::remove_all(p);
    std::filesystem::create_directories(p);
    return p;
}

}  // namespace testutil
