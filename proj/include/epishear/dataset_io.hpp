#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "epishear/grid.hpp"
#include "epishear/image.hpp"
#include "epishear/lightfield.hpp"
#include "epishear/shearlet.hpp"

namespace epishear {

namespace fs = std::filesystem;

class FormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// cache exists but was built for a different grid, J or format version
class CacheMismatch : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// ---- images ----
struct LoadedImage {
    Image image;
    int bit_depth = 8;
};

// PNG (8/16 bit, gray/RGB, alpha dropped) or binary PPM/PGM, chosen by extension
LoadedImage read_image(const fs::path& path);
// values are rounded and clamped to [0, 2^bits - 1]
void write_image(const fs::path& path, const Image& img, int bit_depth);

// portable float map; little-endian (negative scale), bottom-to-top rows
Grid read_pfm(const fs::path& path);
void write_pfm(const fs::path& path, const Grid& g);
void write_pfm(const fs::path& path, const Image& img);  // 1 or 3 channels

// ---- manifests ----
struct PlaneSpec {
    std::string name;  // "Y", "U", "V"
    int width = 0, height = 0;
    int d_max = 1;
};

struct DatasetManifest {
    std::string name;
    std::string view_pattern;  // printf-style; one index (t) or two (s, t)
    int n_s = 1, n_t = 1;
    std::string channel_layout = "RGB";  // RGB or YUV
    std::vector<int> d_max{1};           // one value, or one per plane
    int bit_depth = 8;
    int leave_n = 1;
    int disparity_sign = 1;
    std::vector<PlaneSpec> planes;  // YUV only: planar raw layout
    fs::path base_dir;              // directory the pattern is relative to

    int d_max_for(int plane) const;
    void validate() const;
};

DatasetManifest parse_manifest(const std::string& json_text, const fs::path& base_dir = {});
DatasetManifest load_manifest(const fs::path& path);
std::string manifest_to_json(const DatasetManifest& m);

// expands the pattern for grid position (s, t); a single field gets s * n_t + t
std::string view_filename(const std::string& pattern, int n_t, int s, int t);

// RGB/gray datasets: one light field with all channels
LightField load_views(const DatasetManifest& m);
// YUV datasets: one single-channel light field per plane
std::vector<LightField> load_planes(const DatasetManifest& m);

// returns the number of files written; single-row light fields use one index
int save_views(const LightField& lf, const fs::path& dir, const std::string& pattern);

// ---- shearlet system cache ----
// "SHLC", u8 version, u32 rows, u32 cols, u8 J, u16 count, then per element
// the analysis and dual half-grids, then the frame function, each as
// interleaved complex float32, all little-endian.
inline constexpr unsigned char kCacheVersion = 1;

void cache_system(const ShearletSystem& sys, const fs::path& path);
ShearletSystem load_cached_system(const fs::path& path, int rows, int cols, int scales);
// loads a matching cache or builds and writes one; either way the result
// carries the cached float32 precision
ShearletSystem cached_or_built(const fs::path& dir, int rows, int cols, int scales, const ShearletConfig& cfg);

}  // namespace epishear
