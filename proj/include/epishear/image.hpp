#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace epishear {

// interleaved (y, x, c) intensities in the dataset's native range
struct Image {
    int height = 0;
    int width = 0;
    int channels = 0;
    std::vector<double> data;

    Image() = default;
    Image(int h, int w, int c, double fill = 0.0)
        : height(h), width(w), channels(c), data(std::size_t(h) * w * c, fill) {}

    double& at(int y, int x, int c) { return data[(std::size_t(y) * width + x) * channels + c]; }
    double at(int y, int x, int c) const { return data[(std::size_t(y) * width + x) * channels + c]; }
    bool same_shape(const Image& o) const {
        return height == o.height && width == o.width && channels == o.channels;
    }
};

inline void require_same_shape(const Image& a, const Image& b, const char* what) {
    if (!a.same_shape(b))
        throw std::invalid_argument(std::string(what) + ": image shapes differ (" + std::to_string(a.width) + "x" +
                                    std::to_string(a.height) + "x" + std::to_string(a.channels) + " vs " +
                                    std::to_string(b.width) + "x" + std::to_string(b.height) + "x" +
                                    std::to_string(b.channels) + ")");
}

}  // namespace epishear
