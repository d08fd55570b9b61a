#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "epishear/grid.hpp"
#include "epishear/image.hpp"
#include "epishear/lightfield.hpp"
#include "epishear/reconstruct.hpp"

namespace epishear {

// ---- synthetic scenes ----

struct SyntheticLine {
    double position = 0;   // left edge on row 0, px
    double disparity = 0;  // px per row
    double intensity = 1;
    double width = 12;     // px
};

struct SyntheticOptions {
    double max_disparity = 1.0;
    double background = 0.5;
    double texture_amplitude = 0.05;  // low-frequency background texture, 0 disables
    int supersample = 8;
};

struct SyntheticEpi {
    Grid epi;                 // rows = t, intensities in [0, 1]
    std::string description;  // JSON with every parameter
};

// Lambertian stripes; a larger disparity (nearer) occludes a smaller one.
// The background sits at disparity 0 with a texture drawn from `texture_seed`.
SyntheticEpi make_synthetic_epi(int width, int height, const std::vector<SyntheticLine>& lines,
                                std::uint64_t texture_seed, const SyntheticOptions& opts = {});

std::vector<SyntheticLine> random_lines(int count, int width, double max_disparity, std::uint64_t seed);

// one synthetic EPI per image row u; a single camera row of `views` views
LightField make_synthetic_lightfield(int views, int height, int width, int lines_per_epi, double max_disparity,
                                     std::uint64_t seed, int bit_depth = 8);

// ---- evaluation ----

enum class PsnrMode { rgb_mean, luma };

struct EvalConfig {
    IterationParams params;
    DriverOptions driver;
    PsnrMode mode = PsnrMode::rgb_mean;
    bool keep_estimates = false;  // fill EvalReport::estimates (for difference maps)
};

struct EvalReport {
    std::string dataset;
    std::vector<std::pair<int, double>> per_view;  // index s * n_t + t
    std::vector<std::pair<int, Image>> estimates;
    double mean_psnr = 0;
    bool trivial = false;
    int n = 1;
    int d_max = 1;
    int scales = 0;
    IterationParams params;
    PsnrMode mode = PsnrMode::rgb_mean;
    double wall_time = 0;
    std::string notes;
};

double image_psnr(const Image& a, const Image& b, double peak, PsnrMode mode);

// Keeps views 0, n, 2n, ... (along both axes for a 2D grid), reconstructs a
// dense grid with d_max views per kept gap and scores the dropped views that
// lie between kept ones. Dropped views that fall between dense views are read
// by (bi)linear interpolation of the neighbours.
EvalReport leave_n_out(const LightField& full, int n, int d_max, const EvalConfig& cfg, const std::string& name = "");

// scaled absolute difference, clamped to [0, peak]
Image diff_map(const Image& a, const Image& b, double gain, double peak);

// mean of the finite entries
double mean_finite(const std::vector<std::pair<int, double>>& per_view);

std::string report_csv(const EvalReport& r);
std::string report_json(const EvalReport& r);
void write_report(const EvalReport& r, const std::filesystem::path& csv_path);

std::string psnr_mode_name(PsnrMode m);

}  // namespace epishear
