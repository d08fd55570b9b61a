#include "epishear/lightfield.hpp"

#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>

#include "epishear/parallel.hpp"

namespace epishear {

LightField::LightField(int ns, int nt, int h, int w, int c, int bits)
    : n_s(ns), n_t(nt), height(h), width(w), channels(c), bit_depth(bits),
      views(std::size_t(ns) * nt, Image(h, w, c)) {
    if (ns < 1 || nt < 1 || h < 1 || w < 1 || c < 1) throw std::invalid_argument("LightField: empty dimensions");
    if (bits < 1 || bits > 16) throw std::invalid_argument("LightField: bit depth must be in 1..16");
}

void LightField::validate() const {
    if (views.size() != std::size_t(n_s) * n_t) throw std::invalid_argument("LightField: view count mismatch");
    for (std::size_t i = 0; i < views.size(); ++i)
        if (views[i].height != height || views[i].width != width || views[i].channels != channels)
            throw std::invalid_argument("LightField: view " + std::to_string(i) + " has different dimensions");
}

void CameraGeometry::validate() const {
    if (!(z_min > 0) || z_max < z_min) throw std::invalid_argument("geometry: need 0 < z_min <= z_max");
    if (!(focal > 0) || !(delta_v > 0) || !(delta_t > 0))
        throw std::invalid_argument("geometry: focal, delta_v and delta_t must be positive");
}

double camera_step_bound(const CameraGeometry& g) {
    g.validate();
    return g.z_min / g.focal * g.delta_v;
}

double disparity(const CameraGeometry& g, double z) {
    if (!(z > 0)) throw std::invalid_argument("disparity: depth must be positive");
    return g.focal / z * g.delta_t / g.delta_v;
}

Grid extract_epi(const LightField& lf, int s_index, int u, int channel) {
    if (s_index < 0 || s_index >= lf.n_s || u < 0 || u >= lf.height || channel < 0 || channel >= lf.channels)
        throw std::out_of_range("extract_epi: index out of range (s=" + std::to_string(s_index) + " u=" +
                                std::to_string(u) + " c=" + std::to_string(channel) + ")");
    Grid epi(lf.n_t, lf.width);
    for (int t = 0; t < lf.n_t; ++t) {
        const Image& im = lf.view(s_index, t);
        for (int v = 0; v < lf.width; ++v) epi(t, v) = im.at(u, v, channel);
    }
    return epi;
}

void insert_epi(LightField& lf, int s_index, int u, int channel, const Grid& epi) {
    if (s_index < 0 || s_index >= lf.n_s || u < 0 || u >= lf.height || channel < 0 || channel >= lf.channels)
        throw std::out_of_range("insert_epi: index out of range");
    if (epi.rows != lf.n_t || epi.cols != lf.width) throw std::invalid_argument("insert_epi: EPI shape mismatch");
    for (int t = 0; t < lf.n_t; ++t) {
        Image& im = lf.view(s_index, t);
        for (int v = 0; v < lf.width; ++v) im.at(u, v, channel) = epi(t, v);
    }
}

LightField transpose(const LightField& lf) {
    LightField out(lf.n_t, lf.n_s, lf.width, lf.height, lf.channels, lf.bit_depth);
    for (int s = 0; s < lf.n_s; ++s)
        for (int t = 0; t < lf.n_t; ++t) {
            const Image& a = lf.view(s, t);
            Image& b = out.view(t, s);
            for (int u = 0; u < lf.height; ++u)
                for (int v = 0; v < lf.width; ++v)
                    for (int c = 0; c < lf.channels; ++c) b.at(v, u, c) = a.at(u, v, c);
        }
    return out;
}

int scales_for(int d_max) {
    if (d_max < 1) throw std::invalid_argument("d_max must be >= 1");
    int J = 0;
    while ((1 << J) < d_max) ++J;
    return J;
}

int padded_rows(int rows, int scales) {
    const int q = 1 << scales;
    return (rows + q - 1) / q * q;
}

namespace {

// densify along t for every camera row
LightField densify_rows(const LightField& in, int d_max, const IterationParams& params, const DriverOptions& opts) {
    in.validate();
    if (d_max < 1) throw std::invalid_argument("d_max must be >= 1");
    if (in.n_t < 2) throw std::invalid_argument("need at least 2 views per camera row");
    if (d_max == 1) return in;
    if (opts.disparity_sign != 1 && opts.disparity_sign != -1)
        throw std::invalid_argument("disparity_sign must be +1 or -1");
    params.validate();

    const int m = in.n_t;
    const int rows = (m - 1) * d_max + 1;
    const int J = scales_for(d_max);
    const int P = padded_rows(rows, J);
    const ShearletSystem sys = opts.provider ? opts.provider(P, in.width, J) : build_system(P, in.width, J, opts.system);
    if (sys.rows != P || sys.cols != in.width || sys.scales != J)
        throw std::invalid_argument("system provider returned a system of the wrong shape");
    const SamplingMask mask = build_mask(rows, d_max, m).padded(P);

    LightField out(in.n_s, rows, in.height, in.width, in.channels, in.bit_depth);
    const int W = in.width;
    const bool mirror = opts.disparity_sign < 0;
    const int jobs = in.n_s * in.height * in.channels;

    std::mutex mu;
    std::exception_ptr failure;
    std::atomic<int> done{0};
    parallel_for(jobs, [&](int job) {
        const int c = job % in.channels;
        const int u = (job / in.channels) % in.height;
        const int s = job / (in.channels * in.height);
        try {
            Grid y(P, W);
            auto put = [&](int r, const Image& im) {
                for (int v = 0; v < W; ++v) y(r, mirror ? W - 1 - v : v) = im.at(u, v, c);
            };
            for (int i = 0; i < m; ++i) put(i * d_max, in.view(s, i));
            const ReconResult res = reconstruct_epi(y, mask, sys, params,
                                                   job == opts.observed_job ? opts.observer : IterationObserver{});
            if (res.diverged)
                throw ReconstructionError("reconstruction diverged at EPI (s=" + std::to_string(s) + ", u=" +
                                          std::to_string(u) + ", channel=" + std::to_string(c) + ") after " +
                                          std::to_string(res.iterations) + " iterations");
            for (int t = 0; t < rows; ++t) {
                Image& im = out.view(s, t);
                for (int v = 0; v < W; ++v) im.at(u, v, c) = res.x(t, mirror ? W - 1 - v : v);
            }
        } catch (...) {
            std::lock_guard<std::mutex> lk(mu);
            if (!failure) failure = std::current_exception();
        }
        const int k = ++done;
        if (opts.progress) {
            std::lock_guard<std::mutex> lk(mu);
            opts.progress(k, jobs);
        }
    });
    if (failure) std::rethrow_exception(failure);

    for (int s = 0; s < in.n_s; ++s)
        for (int i = 0; i < m; ++i) out.view(s, i * d_max) = in.view(s, i);
    return out;
}

}  // namespace

LightField reconstruct_hpo(const LightField& coarse, int d_max, const IterationParams& params,
                           const DriverOptions& opts) {
    if (coarse.n_s != 1) throw std::invalid_argument("reconstruct_hpo: expects a single camera row");
    return densify_rows(coarse, d_max, params, opts);
}

LightField reconstruct_full_parallax(const LightField& coarse, int d_max_h, int d_max_v, const IterationParams& params,
                                     const DriverOptions& opts) {
    if (coarse.n_s < 2 || coarse.n_t < 2) throw std::invalid_argument("reconstruct_full_parallax: need a 2D grid");
    const LightField rows_done = densify_rows(coarse, d_max_h, params, opts);
    return transpose(densify_rows(transpose(rows_done), d_max_v, params, opts));
}

Image refocus(const LightField& lf, double slope) {
    lf.validate();
    Image out(lf.height, lf.width, lf.channels);
    const double cs = 0.5 * (lf.n_s - 1), ct = 0.5 * (lf.n_t - 1);
    auto clampi = [](int v, int hi) { return v < 0 ? 0 : (v > hi ? hi : v); };
    for (int s = 0; s < lf.n_s; ++s)
        for (int t = 0; t < lf.n_t; ++t) {
            const Image& im = lf.view(s, t);
            const double dy = slope * (s - cs), dx = slope * (t - ct);
            for (int y = 0; y < lf.height; ++y) {
                const double sy = y + dy;
                const int y0 = int(std::floor(sy));
                const double fy = sy - y0;
                const int ya = clampi(y0, lf.height - 1), yb = clampi(y0 + 1, lf.height - 1);
                for (int x = 0; x < lf.width; ++x) {
                    const double sx = x + dx;
                    const int x0 = int(std::floor(sx));
                    const double fx = sx - x0;
                    const int xa = clampi(x0, lf.width - 1), xb = clampi(x0 + 1, lf.width - 1);
                    for (int c = 0; c < lf.channels; ++c) {
                        const double top = (1 - fx) * im.at(ya, xa, c) + fx * im.at(ya, xb, c);
                        const double bot = (1 - fx) * im.at(yb, xa, c) + fx * im.at(yb, xb, c);
                        out.at(y, x, c) += (1 - fy) * top + fy * bot;
                    }
                }
            }
        }
    const double k = 1.0 / (double(lf.n_s) * lf.n_t);
    for (double& v : out.data) v *= k;
    return out;
}

namespace {
double psnr_from_mse(double mse, double peak) {
    if (mse == 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(peak * peak / mse);
}
}  // namespace

double psnr(const Image& a, const Image& b, double peak) {
    require_same_shape(a, b, "psnr");
    double s = 0;
    for (std::size_t i = 0; i < a.data.size(); ++i) {
        const double d = a.data[i] - b.data[i];
        s += d * d;
    }
    return psnr_from_mse(s / double(a.data.size()), peak);
}

double psnr(const Grid& a, const Grid& b, double peak) {
    require_same_shape(a, b, "psnr");
    double s = 0;
    for (std::size_t i = 0; i < a.data.size(); ++i) {
        const double d = a.data[i] - b.data[i];
        s += d * d;
    }
    return psnr_from_mse(s / double(a.data.size()), peak);
}

double psnr_channel(const Image& a, const Image& b, int channel, double peak) {
    require_same_shape(a, b, "psnr");
    if (channel < 0 || channel >= a.channels) throw std::out_of_range("psnr_channel: bad channel");
    double s = 0;
    for (std::size_t i = channel; i < a.data.size(); i += a.channels) {
        const double d = a.data[i] - b.data[i];
        s += d * d;
    }
    return psnr_from_mse(s / double(std::size_t(a.height) * a.width), peak);
}

}  // namespace epishear
