#pragma once

#include <algorithm>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace epishear {

// row-major real 2D array; rows are the t axis for EPIs
struct Grid {
    int rows = 0;
    int cols = 0;
    std::vector<double> data;

    Grid() = default;
    Grid(int r, int c, double fill = 0.0) : rows(r), cols(c), data(std::size_t(r) * c, fill) {
        if (r < 0 || c < 0) throw std::invalid_argument("Grid: negative size");
    }

    double& operator()(int r, int c) { return data[std::size_t(r) * cols + c]; }
    double operator()(int r, int c) const { return data[std::size_t(r) * cols + c]; }
    double* row(int r) { return data.data() + std::size_t(r) * cols; }
    const double* row(int r) const { return data.data() + std::size_t(r) * cols; }

    std::size_t size() const { return data.size(); }
    bool empty() const { return data.empty(); }
    bool same_shape(const Grid& o) const { return rows == o.rows && cols == o.cols; }

    double max_abs() const {
        double m = 0;
        for (double v : data) m = std::max(m, v < 0 ? -v : v);
        return m;
    }
};

inline void require_same_shape(const Grid& a, const Grid& b, const char* what) {
    if (!a.same_shape(b))
        throw std::invalid_argument(std::string(what) + ": shape mismatch (" + std::to_string(a.rows) + "x" +
                                    std::to_string(a.cols) + " vs " + std::to_string(b.rows) + "x" +
                                    std::to_string(b.cols) + ")");
}

}  // namespace epishear
