#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "epishear/grid.hpp"
#include "epishear/image.hpp"
#include "epishear/reconstruct.hpp"
#include "epishear/shearlet.hpp"

namespace epishear {

// n_s x n_t grid of views; s indexes camera rows, t camera columns.
// Inside a view u is the pixel row and v the pixel column.
struct LightField {
    int n_s = 0, n_t = 0;
    int height = 0, width = 0, channels = 0;
    int bit_depth = 8;
    std::vector<Image> views;  // s * n_t + t

    LightField() = default;
    LightField(int ns, int nt, int h, int w, int c, int bits = 8);

    Image& view(int s, int t) { return views.at(std::size_t(s) * n_t + t); }
    const Image& view(int s, int t) const { return views.at(std::size_t(s) * n_t + t); }
    double peak() const { return double((1u << bit_depth) - 1); }
    void validate() const;
};

struct CameraGeometry {
    double focal = 1;
    double z_min = 1;
    double z_max = 1;
    double delta_v = 1;  // pixel pitch
    double delta_t = 1;  // camera step

    void validate() const;
};

// largest camera step keeping disparity <= 1 px: (z_min / f) * delta_v
double camera_step_bound(const CameraGeometry& g);
// (f / z) * delta_t, in pixels of size delta_v
double disparity(const CameraGeometry& g, double z);

// rows = t, cols = v
Grid extract_epi(const LightField& lf, int s_index, int u, int channel);
void insert_epi(LightField& lf, int s_index, int u, int channel, const Grid& epi);

// swaps s<->t and u<->v so vertical EPIs become horizontal ones
LightField transpose(const LightField& lf);

class ReconstructionError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

using SystemProvider = std::function<ShearletSystem(int rows, int cols, int scales)>;

struct DriverOptions {
    ShearletConfig system = reconstruction_config();
    SystemProvider provider;  // overrides `system` when set (e.g. a cache)
    // -1 when scene points move towards smaller v as t grows; EPIs are
    // mirrored so every line has non-negative slope
    int disparity_sign = 1;
    std::function<void(int done, int total)> progress;
    // per-iteration callback for one EPI (job index = (s * height + u) * channels + c)
    int observed_job = -1;
    IterationObserver observer;
};

int scales_for(int d_max);  // ceil(log2 d_max)
int padded_rows(int rows, int scales);

// one coarse camera row -> (m-1) d_max + 1 views
LightField reconstruct_hpo(const LightField& coarse, int d_max, const IterationParams& params,
                           const DriverOptions& opts = {});
// every camera row horizontally, then every resulting column vertically
LightField reconstruct_full_parallax(const LightField& coarse, int d_max_h, int d_max_v, const IterationParams& params,
                                     const DriverOptions& opts = {});

// shift-and-add with bilinear resampling around the central view
Image refocus(const LightField& lf, double slope);

// +inf when the images are identical
double psnr(const Image& a, const Image& b, double peak);
double psnr(const Grid& a, const Grid& b, double peak);
double psnr_channel(const Image& a, const Image& b, int channel, double peak);

}  // namespace epishear
