#include "epishear/dataset_io.hpp"

#include <png.h>
#include <unistd.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <json.hpp>
#include <memory>
#include <mutex>
#include <sstream>

#include "epishear/parallel.hpp"

namespace epishear {

using json = nlohmann::json;

namespace {

std::string lower_ext(const fs::path& p) {
    std::string e = p.extension().string();
    std::transform(e.begin(), e.end(), e.begin(), [](unsigned char c) { return char(std::tolower(c)); });
    return e;
}

double clamp_round(double v, double peak) {
    v = std::round(v);
    return v < 0 ? 0 : (v > peak ? peak : v);
}

struct FileCloser {
    void operator()(FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<FILE, FileCloser>;

FilePtr open_file(const fs::path& p, const char* mode) {
    FilePtr f(std::fopen(p.c_str(), mode));
    if (!f) throw std::runtime_error("cannot open " + p.string() + ": " + std::strerror(errno));
    return f;
}

// ---- PNG ----

LoadedImage read_png(const fs::path& path) {
    FilePtr f = open_file(path, "rb");
    unsigned char sig[8];
    if (std::fread(sig, 1, 8, f.get()) != 8 || png_sig_cmp(sig, 0, 8)) throw FormatError(path.string() + ": not a PNG");
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw std::runtime_error("libpng init failed");
    }
    LoadedImage out;
    std::vector<png_bytep> rows;
    std::vector<unsigned char> buf;
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw FormatError(path.string() + ": PNG decode failed");
    }
    png_init_io(png, f.get());
    png_set_sig_bytes(png, 8);
    png_read_info(png, info);
    const int color = png_get_color_type(png, info);
    const int depth = png_get_bit_depth(png, info);
    if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
    if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
    if (color & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
    if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png), png_set_strip_alpha(png);
    png_read_update_info(png, info);
    const int w = int(png_get_image_width(png, info));
    const int h = int(png_get_image_height(png, info));
    const int ch = int(png_get_channels(png, info));
    const int bd = png_get_bit_depth(png, info);
    const std::size_t stride = png_get_rowbytes(png, info);
    buf.resize(stride * h);
    rows.resize(h);
    for (int y = 0; y < h; ++y) rows[y] = buf.data() + stride * y;
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);

    out.bit_depth = bd == 16 ? 16 : 8;
    out.image = Image(h, w, ch);
    for (int y = 0; y < h; ++y)
        for (int i = 0; i < w * ch; ++i) {
            const unsigned char* p = rows[y];
            out.image.data[std::size_t(y) * w * ch + i] = bd == 16 ? double((p[2 * i] << 8) | p[2 * i + 1]) : double(p[i]);
        }
    return out;
}

void write_png(const fs::path& path, const Image& img, int bits) {
    if (img.channels != 1 && img.channels != 3) throw std::invalid_argument("PNG output needs 1 or 3 channels");
    const int bd = bits > 8 ? 16 : 8;
    const double peak = double((1u << bits) - 1);
    FilePtr f = open_file(path, "wb");
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_write_struct(&png, &info);
        throw std::runtime_error("libpng init failed");
    }
    const std::size_t stride = std::size_t(img.width) * img.channels * (bd / 8);
    std::vector<unsigned char> buf(stride * img.height);
    for (int y = 0; y < img.height; ++y)
        for (int i = 0; i < img.width * img.channels; ++i) {
            const auto v = unsigned(clamp_round(img.data[std::size_t(y) * img.width * img.channels + i], peak));
            unsigned char* p = buf.data() + stride * y;
            if (bd == 16) {
                p[2 * i] = (v >> 8) & 0xff;
                p[2 * i + 1] = v & 0xff;
            } else {
                p[i] = v & 0xff;
            }
        }
    std::vector<png_bytep> rows(img.height);
    for (int y = 0; y < img.height; ++y) rows[y] = buf.data() + stride * y;
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw std::runtime_error(path.string() + ": PNG encode failed");
    }
    png_init_io(png, f.get());
    png_set_IHDR(png, info, img.width, img.height, bd, img.channels == 3 ? PNG_COLOR_TYPE_RGB : PNG_COLOR_TYPE_GRAY,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    png_write_image(png, rows.data());
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

// ---- PPM / PGM ----

std::string next_token(std::istream& in) {
    std::string tok;
    char c;
    while (in.get(c)) {
        if (c == '#') {
            std::string line;
            std::getline(in, line);
        } else if (!std::isspace(static_cast<unsigned char>(c))) {
            tok.push_back(c);
            break;
        }
    }
    while (in.get(c) && !std::isspace(static_cast<unsigned char>(c))) tok.push_back(c);
    return tok;
}

LoadedImage read_pnm(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    const std::string magic = next_token(in);
    if (magic != "P5" && magic != "P6") throw FormatError(path.string() + ": only binary P5/P6 supported");
    int w = 0, h = 0, maxval = 0;
    try {
        w = std::stoi(next_token(in));
        h = std::stoi(next_token(in));
        maxval = std::stoi(next_token(in));
    } catch (const std::exception&) {
        throw FormatError(path.string() + ": bad PNM header");
    }
    if (w <= 0 || h <= 0 || maxval <= 0 || maxval > 65535) throw FormatError(path.string() + ": bad PNM header");
    const int ch = magic == "P6" ? 3 : 1;
    const int bytes = maxval > 255 ? 2 : 1;
    std::vector<unsigned char> buf(std::size_t(w) * h * ch * bytes);
    if (!in.read(reinterpret_cast<char*>(buf.data()), std::streamsize(buf.size())))
        throw FormatError(path.string() + ": truncated PNM data");
    LoadedImage out;
    out.bit_depth = bytes == 2 ? 16 : 8;
    out.image = Image(h, w, ch);
    for (std::size_t i = 0; i < out.image.data.size(); ++i)
        out.image.data[i] = bytes == 2 ? double((buf[2 * i] << 8) | buf[2 * i + 1]) : double(buf[i]);
    return out;
}

void write_pnm(const fs::path& path, const Image& img, int bits) {
    if (img.channels != 1 && img.channels != 3) throw std::invalid_argument("PNM output needs 1 or 3 channels");
    const unsigned maxval = (1u << bits) - 1;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << (img.channels == 3 ? "P6" : "P5") << "\n" << img.width << " " << img.height << "\n" << maxval << "\n";
    std::vector<unsigned char> buf;
    buf.reserve(img.data.size() * 2);
    for (double v : img.data) {
        const auto q = unsigned(clamp_round(v, maxval));
        if (maxval > 255) buf.push_back((q >> 8) & 0xff);
        buf.push_back(q & 0xff);
    }
    out.write(reinterpret_cast<const char*>(buf.data()), std::streamsize(buf.size()));
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

// ---- little-endian helpers ----

template <class T>
void put_le(std::string& out, T v) {
    using U = std::make_unsigned_t<std::conditional_t<std::is_floating_point_v<T>,
                                                      std::conditional_t<sizeof(T) == 4, std::int32_t, std::int64_t>, T>>;
    U u;
    std::memcpy(&u, &v, sizeof(T));
    for (std::size_t i = 0; i < sizeof(T); ++i) out.push_back(char((u >> (8 * i)) & 0xff));
}

template <class T>
T get_le(const unsigned char* p) {
    using U = std::make_unsigned_t<std::conditional_t<std::is_floating_point_v<T>,
                                                      std::conditional_t<sizeof(T) == 4, std::int32_t, std::int64_t>, T>>;
    U u = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) u |= U(p[i]) << (8 * i);
    T v;
    std::memcpy(&v, &u, sizeof(T));
    return v;
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

LoadedImage read_image(const fs::path& path) {
    const std::string e = lower_ext(path);
    if (e == ".png") return read_png(path);
    if (e == ".ppm" || e == ".pgm" || e == ".pnm") return read_pnm(path);
    throw FormatError(path.string() + ": unsupported image extension");
}

void write_image(const fs::path& path, const Image& img, int bit_depth) {
    if (bit_depth < 1 || bit_depth > 16) throw std::invalid_argument("bit depth must be in 1..16");
    const std::string e = lower_ext(path);
    if (e == ".png") return write_png(path, img, bit_depth);
    if (e == ".ppm" || e == ".pgm" || e == ".pnm") return write_pnm(path, img, bit_depth);
    if (e == ".pfm") return write_pfm(path, img);
    throw FormatError(path.string() + ": unsupported image extension");
}

// ---- PFM ----

namespace {
void write_pfm_raw(const fs::path& path, int w, int h, int ch, const std::vector<float>& top_down) {
    std::string out = std::string(ch == 3 ? "PF" : "Pf") + "\n" + std::to_string(w) + " " + std::to_string(h) + "\n-1.0\n";
    for (int y = h - 1; y >= 0; --y)
        for (int i = 0; i < w * ch; ++i) put_le<float>(out, top_down[std::size_t(y) * w * ch + i]);
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + path.string());
    f.write(out.data(), std::streamsize(out.size()));
    if (!f) throw std::runtime_error("write failed: " + path.string());
}
}  // namespace

void write_pfm(const fs::path& path, const Grid& g) {
    std::vector<float> v(g.data.begin(), g.data.end());
    write_pfm_raw(path, g.cols, g.rows, 1, v);
}

void write_pfm(const fs::path& path, const Image& img) {
    if (img.channels != 1 && img.channels != 3) throw std::invalid_argument("PFM needs 1 or 3 channels");
    std::vector<float> v(img.data.begin(), img.data.end());
    write_pfm_raw(path, img.width, img.height, img.channels, v);
}

Grid read_pfm(const fs::path& path) {
    const std::string s = slurp(path);
    std::istringstream in(s);
    std::string magic, ws, hs, scale;
    in >> magic >> ws >> hs >> scale;
    if (magic != "Pf") throw FormatError(path.string() + ": expected a single-channel PFM");
    int w = 0, h = 0;
    double sc = 0;
    try {
        w = std::stoi(ws);
        h = std::stoi(hs);
        sc = std::stod(scale);
    } catch (const std::exception&) {
        throw FormatError(path.string() + ": bad PFM header");
    }
    in.get();
    const std::size_t off = std::size_t(in.tellg());
    if (w <= 0 || h <= 0 || sc == 0 || s.size() < off + std::size_t(w) * h * 4)
        throw FormatError(path.string() + ": bad or truncated PFM");
    const bool little = sc < 0;
    const double k = std::abs(sc);
    Grid g(h, w);
    const auto* p = reinterpret_cast<const unsigned char*>(s.data() + off);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const unsigned char* q = p + (std::size_t(y) * w + x) * 4;
            float v;
            if (little) {
                v = get_le<float>(q);
            } else {
                const unsigned char r[4] = {q[3], q[2], q[1], q[0]};
                v = get_le<float>(r);
            }
            g(h - 1 - y, x) = v * k;
        }
    return g;
}

// ---- manifests ----

int DatasetManifest::d_max_for(int plane) const {
    if (d_max.empty()) throw std::invalid_argument("manifest: d_max missing");
    if (plane < int(d_max.size())) return d_max[plane];
    return d_max.back();
}

void DatasetManifest::validate() const {
    if (view_pattern.empty()) throw std::invalid_argument("manifest: view_pattern missing");
    if (n_s < 1 || n_t < 1) throw std::invalid_argument("manifest: grid must be positive");
    if (channel_layout != "RGB" && channel_layout != "YUV")
        throw std::invalid_argument("manifest: channel_layout must be RGB or YUV");
    if (d_max.empty()) throw std::invalid_argument("manifest: d_max missing");
    for (int d : d_max)
        if (d < 1) throw std::invalid_argument("manifest: d_max must be >= 1");
    if (bit_depth != 8 && bit_depth != 16) throw std::invalid_argument("manifest: bit_depth must be 8 or 16");
    if (leave_n < 1) throw std::invalid_argument("manifest: leave_n must be >= 1");
    if (disparity_sign != 1 && disparity_sign != -1) throw std::invalid_argument("manifest: disparity_sign must be +-1");
    if (channel_layout == "YUV" && planes.empty()) throw std::invalid_argument("manifest: YUV layout needs planes");
}

DatasetManifest parse_manifest(const std::string& text, const fs::path& base_dir) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw FormatError(std::string("manifest: ") + e.what());
    }
    DatasetManifest m;
    try {
        m.name = j.value("name", "");
        m.view_pattern = j.at("view_pattern").get<std::string>();
        if (j.contains("grid")) {
            const auto g = j.at("grid").get<std::vector<int>>();
            if (g.size() != 2) throw FormatError("manifest: grid must be [n_s, n_t]");
            m.n_s = g[0];
            m.n_t = g[1];
        }
        m.channel_layout = j.value("channel_layout", "RGB");
        if (j.contains("d_max")) {
            if (j["d_max"].is_array()) m.d_max = j["d_max"].get<std::vector<int>>();
            else m.d_max = {j["d_max"].get<int>()};
        }
        m.bit_depth = j.value("bit_depth", 8);
        m.leave_n = j.value("leave_n", 1);
        m.disparity_sign = j.value("disparity_sign", 1);
        if (j.contains("planes"))
            for (const auto& p : j["planes"])
                m.planes.push_back({p.value("name", ""), p.at("width").get<int>(), p.at("height").get<int>(),
                                    p.value("d_max", 1)});
    } catch (const json::exception& e) {
        throw FormatError(std::string("manifest: ") + e.what());
    }
    m.base_dir = base_dir;
    m.validate();
    return m;
}

DatasetManifest load_manifest(const fs::path& path) {
    return parse_manifest(slurp(path), path.parent_path());
}

std::string manifest_to_json(const DatasetManifest& m) {
    json j;
    j["name"] = m.name;
    j["view_pattern"] = m.view_pattern;
    j["grid"] = {m.n_s, m.n_t};
    j["channel_layout"] = m.channel_layout;
    j["d_max"] = m.d_max;
    j["bit_depth"] = m.bit_depth;
    j["leave_n"] = m.leave_n;
    j["disparity_sign"] = m.disparity_sign;
    if (!m.planes.empty()) {
        j["planes"] = json::array();
        for (const auto& p : m.planes)
            j["planes"].push_back({{"name", p.name}, {"width", p.width}, {"height", p.height}, {"d_max", p.d_max}});
    }
    return j.dump(2);
}

std::string view_filename(const std::string& pattern, int n_t, int s, int t) {
    // only %d, %Nd and %0Nd conversions (plus %%) are honoured
    int fields = 0;
    for (std::size_t i = 0; i < pattern.size(); ++i)
        if (pattern[i] == '%') {
            if (i + 1 < pattern.size() && pattern[i + 1] == '%') ++i;
            else ++fields;
        }
    if (fields < 1 || fields > 2) throw std::invalid_argument("view pattern needs one or two integer fields: " + pattern);
    const int values[2] = {fields == 2 ? s : s * n_t + t, t};
    std::string out;
    int field = 0;
    for (std::size_t i = 0; i < pattern.size(); ++i) {
        if (pattern[i] != '%') {
            out.push_back(pattern[i]);
            continue;
        }
        if (i + 1 < pattern.size() && pattern[i + 1] == '%') {
            out.push_back('%');
            ++i;
            continue;
        }
        std::size_t k = i + 1;
        const bool zero = k < pattern.size() && pattern[k] == '0';
        if (zero) ++k;
        int width = 0;
        while (k < pattern.size() && std::isdigit(static_cast<unsigned char>(pattern[k]))) width = width * 10 + (pattern[k++] - '0');
        if (k >= pattern.size() || (pattern[k] != 'd' && pattern[k] != 'i' && pattern[k] != 'u'))
            throw std::invalid_argument("unsupported conversion in view pattern: " + pattern);
        std::string num = std::to_string(values[field++]);
        if (int(num.size()) < width) num.insert(0, std::size_t(width) - num.size(), zero ? '0' : ' ');
        out += num;
        i = k;
    }
    return out;
}

namespace {

double rescale(double v, int from_bits, int to_bits) {
    if (from_bits == to_bits) return v;
    const double a = double((1u << from_bits) - 1), b = double((1u << to_bits) - 1);
    return std::round(v * b / a);
}

fs::path view_path(const DatasetManifest& m, int s, int t) {
    return m.base_dir / view_filename(m.view_pattern, m.n_t, s, t);
}

template <class F>
void for_each_view(const DatasetManifest& m, F&& body) {
    const int n = m.n_s * m.n_t;
    std::mutex mu;
    std::exception_ptr failure;
    parallel_for(n, [&](int i) {
        try {
            body(i / m.n_t, i % m.n_t);
        } catch (...) {
            std::lock_guard<std::mutex> lk(mu);
            if (!failure) failure = std::current_exception();
        }
    });
    if (failure) std::rethrow_exception(failure);
}

}  // namespace

LightField load_views(const DatasetManifest& m) {
    m.validate();
    if (m.channel_layout != "RGB") throw std::invalid_argument("load_views: use load_planes for YUV datasets");
    std::vector<LoadedImage> imgs(std::size_t(m.n_s) * m.n_t);
    for_each_view(m, [&](int s, int t) {
        const fs::path p = view_path(m, s, t);
        if (!fs::exists(p))
            throw std::runtime_error("missing view " + std::to_string(s * m.n_t + t) + ": " + p.string());
        imgs[std::size_t(s) * m.n_t + t] = read_image(p);
    });
    const Image& first = imgs[0].image;
    LightField lf(m.n_s, m.n_t, first.height, first.width, first.channels, m.bit_depth);
    for (std::size_t i = 0; i < imgs.size(); ++i) {
        Image& im = imgs[i].image;
        if (!im.same_shape(first))
            throw std::runtime_error("view " + std::to_string(i) + " has dimensions " + std::to_string(im.width) + "x" +
                                     std::to_string(im.height) + "x" + std::to_string(im.channels) + ", expected " +
                                     std::to_string(first.width) + "x" + std::to_string(first.height) + "x" +
                                     std::to_string(first.channels));
        for (double& v : im.data) v = rescale(v, imgs[i].bit_depth, m.bit_depth);
        lf.views[i] = std::move(im);
    }
    return lf;
}

std::vector<LightField> load_planes(const DatasetManifest& m) {
    m.validate();
    if (m.channel_layout != "YUV") {
        LightField lf = load_views(m);
        std::vector<LightField> out;
        for (int c = 0; c < lf.channels; ++c) {
            LightField p(lf.n_s, lf.n_t, lf.height, lf.width, 1, lf.bit_depth);
            for (std::size_t i = 0; i < lf.views.size(); ++i)
                for (int y = 0; y < lf.height; ++y)
                    for (int x = 0; x < lf.width; ++x) p.views[i].at(y, x, 0) = lf.views[i].at(y, x, c);
            out.push_back(std::move(p));
        }
        return out;
    }
    const int bytes = m.bit_depth > 8 ? 2 : 1;
    std::size_t frame = 0;
    for (const auto& p : m.planes) frame += std::size_t(p.width) * p.height * bytes;
    std::vector<LightField> out;
    for (const auto& p : m.planes) out.emplace_back(m.n_s, m.n_t, p.height, p.width, 1, m.bit_depth);
    for_each_view(m, [&](int s, int t) {
        const fs::path path = view_path(m, s, t);
        if (!fs::exists(path))
            throw std::runtime_error("missing view " + std::to_string(s * m.n_t + t) + ": " + path.string());
        const std::string raw = slurp(path);
        if (raw.size() < frame)
            throw FormatError("view " + std::to_string(s * m.n_t + t) + ": raw frame too short (" +
                              std::to_string(raw.size()) + " < " + std::to_string(frame) + " bytes)");
        const auto* q = reinterpret_cast<const unsigned char*>(raw.data());
        for (std::size_t k = 0; k < m.planes.size(); ++k) {
            Image& im = out[k].view(s, t);
            for (std::size_t i = 0; i < im.data.size(); ++i, q += bytes)
                im.data[i] = bytes == 2 ? double(q[0] | (q[1] << 8)) : double(q[0]);
        }
    });
    return out;
}

int save_views(const LightField& lf, const fs::path& dir, const std::string& pattern) {
    lf.validate();
    fs::create_directories(dir);
    int count = 0;
    for (int s = 0; s < lf.n_s; ++s)
        for (int t = 0; t < lf.n_t; ++t) {
            const fs::path p = dir / view_filename(pattern, lf.n_t, s, t);
            try {
                write_image(p, lf.view(s, t), lf.bit_depth);
            } catch (const std::exception& e) {
                throw std::runtime_error("saving " + p.string() + ": " + e.what());
            }
            ++count;
        }
    return count;
}

// ---- cache ----

namespace {
void put_grid(std::string& out, const std::vector<double>& g) {
    for (double v : g) {
        put_le<float>(out, float(v));
        put_le<float>(out, 0.0f);
    }
}
}  // namespace

void cache_system(const ShearletSystem& sys, const fs::path& path) {
    std::string out = "SHLC";
    out.push_back(char(kCacheVersion));
    put_le<std::uint32_t>(out, std::uint32_t(sys.rows));
    put_le<std::uint32_t>(out, std::uint32_t(sys.cols));
    out.push_back(char(sys.scales));
    put_le<std::uint16_t>(out, std::uint16_t(sys.eta()));
    for (int e = 0; e < sys.eta(); ++e) {
        put_grid(out, sys.analysis[e]);
        put_grid(out, sys.dual[e]);
    }
    put_grid(out, sys.frame);

    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    const fs::path tmp = path.string() + ".tmp." + std::to_string(::getpid());
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw std::runtime_error("cannot write " + tmp.string());
        f.write(out.data(), std::streamsize(out.size()));
        if (!f) throw std::runtime_error("write failed: " + tmp.string());
    }
    fs::rename(tmp, path);
}

ShearletSystem load_cached_system(const fs::path& path, int rows, int cols, int scales) {
    const std::string s = slurp(path);
    const auto* p = reinterpret_cast<const unsigned char*>(s.data());
    constexpr std::size_t header = 4 + 1 + 4 + 4 + 1 + 2;
    if (s.size() < header || std::memcmp(p, "SHLC", 4) != 0) throw FormatError(path.string() + ": not a system cache");
    if (p[4] != kCacheVersion)
        throw CacheMismatch(path.string() + ": cache version " + std::to_string(p[4]) + ", expected " +
                            std::to_string(kCacheVersion) + "; rebuild needed");
    ShearletSystem sys;
    sys.rows = int(get_le<std::uint32_t>(p + 5));
    sys.cols = int(get_le<std::uint32_t>(p + 9));
    sys.scales = p[13];
    const int count = get_le<std::uint16_t>(p + 14);
    if (sys.rows != rows || sys.cols != cols || sys.scales != scales)
        throw CacheMismatch(path.string() + ": cached " + std::to_string(sys.rows) + "x" + std::to_string(sys.cols) +
                            " J=" + std::to_string(sys.scales) + ", wanted " + std::to_string(rows) + "x" +
                            std::to_string(cols) + " J=" + std::to_string(scales) + "; rebuild needed");
    if (count != element_count(scales)) throw FormatError(path.string() + ": element count does not match J");
    sys.elements = element_list(scales);
    const std::size_t n = sys.half_size();
    const std::size_t need = header + (std::size_t(2) * count + 1) * n * 8;
    if (s.size() != need) throw FormatError(path.string() + ": size " + std::to_string(s.size()) + ", expected " + std::to_string(need));
    const unsigned char* q = p + header;
    auto grid = [&](std::vector<double>& g) {
        g.resize(n);
        for (std::size_t i = 0; i < n; ++i, q += 8) g[i] = get_le<float>(q);
    };
    sys.analysis.resize(count);
    sys.dual.resize(count);
    for (int e = 0; e < count; ++e) {
        grid(sys.analysis[e]);
        grid(sys.dual[e]);
    }
    grid(sys.frame);
    sys.finalize();
    return sys;
}

ShearletSystem cached_or_built(const fs::path& dir, int rows, int cols, int scales, const ShearletConfig& cfg) {
    // config fingerprint keeps caches of different filters apart
    std::uint64_t h = 1469598103934665603ull;
    auto mix = [&](double v) {
        std::uint64_t u;
        std::memcpy(&u, &v, 8);
        h = (h ^ u) * 1099511628211ull;
    };
    for (double v : cfg.base.h) mix(v);
    for (double v : cfg.base.g) mix(v);
    mix(cfg.fan_order);
    mix(cfg.norm == Normalization::full_cone ? 1 : 0);
    mix(cfg.dual_floor);
    char tag[17];
    std::snprintf(tag, sizeof tag, "%016llx", static_cast<unsigned long long>(h));
    const fs::path path =
        dir / ("system_" + std::to_string(rows) + "x" + std::to_string(cols) + "_J" + std::to_string(scales) + "_" + tag + ".shlc");
    if (fs::exists(path)) {
        try {
            ShearletSystem sys = load_cached_system(path, rows, cols, scales);
            sys.norm = cfg.norm;
            return sys;
        } catch (const CacheMismatch&) {
        } catch (const FormatError&) {
        }
    }
    cache_system(build_system(rows, cols, scales, cfg), path);
    // hand back the stored float32 grids, so a hit and a miss agree
    ShearletSystem sys = load_cached_system(path, rows, cols, scales);
    sys.norm = cfg.norm;
    return sys;
}

}  // namespace epishear
