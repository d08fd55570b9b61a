#include "epishear/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <json.hpp>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>

namespace epishear {

using json = nlohmann::json;

SyntheticEpi make_synthetic_epi(int width, int height, const std::vector<SyntheticLine>& lines,
                                std::uint64_t texture_seed, const SyntheticOptions& opts) {
    if (width < 1 || height < 1) throw std::invalid_argument("make_synthetic_epi: empty size");
    if (opts.supersample < 1) throw std::invalid_argument("make_synthetic_epi: supersample must be >= 1");
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const auto& l = lines[i];
        if (!(l.disparity >= 0.0 && l.disparity <= opts.max_disparity))
            throw std::invalid_argument("make_synthetic_epi: line " + std::to_string(i) + " disparity " +
                                        std::to_string(l.disparity) + " outside [0, " +
                                        std::to_string(opts.max_disparity) + "]");
        if (!(l.width > 0)) throw std::invalid_argument("make_synthetic_epi: line width must be positive");
    }
    // far first, so nearer stripes are painted over them
    std::vector<SyntheticLine> order = lines;
    std::stable_sort(order.begin(), order.end(),
                     [](const SyntheticLine& a, const SyntheticLine& b) { return a.disparity < b.disparity; });

    std::mt19937_64 rng(texture_seed);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    struct Wave {
        double f, phase, amp;
    };
    std::vector<Wave> waves;
    if (opts.texture_amplitude > 0)
        for (int i = 0; i < 6; ++i)
            waves.push_back({0.03 + 0.27 * U(rng), 2 * std::numbers::pi * U(rng), opts.texture_amplitude / 6.0});

    const int ss = opts.supersample;
    SyntheticEpi out{Grid(height, width), {}};
    std::vector<double> row(std::size_t(width) * ss);
    for (int t = 0; t < height; ++t) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            const double v = (double(i) + 0.5) / ss;
            double val = opts.background;
            for (const auto& w : waves) val += w.amp * std::sin(w.f * v + w.phase);
            for (const auto& l : order) {
                const double x0 = l.position + l.disparity * t;
                if (v >= x0 && v < x0 + l.width) val = l.intensity;
            }
            row[i] = val;
        }
        for (int c = 0; c < width; ++c) {
            double s = 0;
            for (int k = 0; k < ss; ++k) s += row[std::size_t(c) * ss + k];
            out.epi(t, c) = s / ss;
        }
    }

    json d;
    d["width"] = width;
    d["height"] = height;
    d["texture_seed"] = texture_seed;
    d["max_disparity"] = opts.max_disparity;
    d["background"] = opts.background;
    d["texture_amplitude"] = opts.texture_amplitude;
    d["supersample"] = ss;
    d["lines"] = json::array();
    for (const auto& l : lines)
        d["lines"].push_back({{"position", l.position}, {"disparity", l.disparity}, {"intensity", l.intensity},
                              {"width", l.width}});
    out.description = d.dump();
    return out;
}

std::vector<SyntheticLine> random_lines(int count, int width, double max_disparity, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    std::vector<SyntheticLine> out;
    for (int i = 0; i < count; ++i) {
        SyntheticLine l;
        l.position = width * (-0.2 + 1.2 * U(rng));
        l.disparity = max_disparity * U(rng);
        l.intensity = 0.1 + 0.8 * U(rng);
        l.width = 8 + 32 * U(rng);
        out.push_back(l);
    }
    return out;
}

LightField make_synthetic_lightfield(int views, int height, int width, int lines_per_epi, double max_disparity,
                                     std::uint64_t seed, int bit_depth) {
    LightField lf(1, views, height, width, 1, bit_depth);
    const double peak = lf.peak();
    SyntheticOptions opts;
    opts.max_disparity = max_disparity;
    for (int u = 0; u < height; ++u) {
        const auto lines = random_lines(lines_per_epi, width, max_disparity, seed * 1000003ull + u);
        const Grid epi = make_synthetic_epi(width, views, lines, seed + 7919ull * u, opts).epi;
        for (int t = 0; t < views; ++t)
            for (int v = 0; v < width; ++v) lf.view(0, t).at(u, v, 0) = std::round(epi(t, v) * peak);
    }
    return lf;
}

double image_psnr(const Image& a, const Image& b, double peak, PsnrMode mode) {
    require_same_shape(a, b, "image_psnr");
    if (mode == PsnrMode::luma && a.channels == 3) {
        double s = 0;
        for (std::size_t i = 0; i < a.data.size(); i += 3) {
            const double ya = 0.299 * a.data[i] + 0.587 * a.data[i + 1] + 0.114 * a.data[i + 2];
            const double yb = 0.299 * b.data[i] + 0.587 * b.data[i + 1] + 0.114 * b.data[i + 2];
            s += (ya - yb) * (ya - yb);
        }
        const double mse = s / (double(a.height) * a.width);
        return mse == 0 ? std::numeric_limits<double>::infinity() : 10 * std::log10(peak * peak / mse);
    }
    // per channel, then averaged; identical channels stay +inf
    double acc = 0;
    int finite = 0;
    for (int c = 0; c < a.channels; ++c) {
        const double p = psnr_channel(a, b, c, peak);
        if (std::isfinite(p)) {
            acc += p;
            ++finite;
        }
    }
    return finite ? acc / finite : std::numeric_limits<double>::infinity();
}

double mean_finite(const std::vector<std::pair<int, double>>& per_view) {
    double s = 0;
    int n = 0;
    for (const auto& [i, p] : per_view)
        if (std::isfinite(p)) {
            s += p;
            ++n;
        }
    return n ? s / n : std::numeric_limits<double>::quiet_NaN();
}

namespace {

// dense view at fractional grid position (ps, pt)
Image sample_dense(const LightField& dense, double ps, double pt) {
    const int s0 = int(std::floor(ps)), t0 = int(std::floor(pt));
    const double fs = ps - s0, ft = pt - t0;
    Image out = dense.view(s0, t0);
    if (fs == 0 && ft == 0) return out;
    const int s1 = fs > 0 ? s0 + 1 : s0, t1 = ft > 0 ? t0 + 1 : t0;
    const Image& a = dense.view(s0, t1);
    const Image& b = dense.view(s1, t0);
    const Image& c = dense.view(s1, t1);
    for (std::size_t i = 0; i < out.data.size(); ++i)
        out.data[i] = (1 - fs) * ((1 - ft) * out.data[i] + ft * a.data[i]) + fs * ((1 - ft) * b.data[i] + ft * c.data[i]);
    return out;
}

}  // namespace

EvalReport leave_n_out(const LightField& full, int n, int d_max, const EvalConfig& cfg, const std::string& name) {
    full.validate();
    if (n < 1) throw std::invalid_argument("leave_n_out: n must be >= 1");
    const auto t0 = std::chrono::steady_clock::now();
    EvalReport r;
    r.dataset = name;
    r.n = n;
    r.d_max = d_max;
    r.params = cfg.params;
    r.mode = cfg.mode;
    r.scales = d_max > 1 ? scales_for(d_max) : 0;
    if (n == 1) {
        r.trivial = true;
        r.mean_psnr = std::numeric_limits<double>::quiet_NaN();
        r.notes = "n=1 keeps every view; nothing to score";
        return r;
    }
    const bool grid2d = full.n_s > 1;
    const int kept_t = (full.n_t - 1) / n + 1;
    const int kept_s = grid2d ? (full.n_s - 1) / n + 1 : 1;
    if (kept_t < 2 || (grid2d && kept_s < 2))
        throw std::invalid_argument("leave_n_out: keeping every " + std::to_string(n) + "th of " +
                                    std::to_string(full.n_s) + "x" + std::to_string(full.n_t) +
                                    " views leaves fewer than 2 per axis");
    LightField coarse(kept_s, kept_t, full.height, full.width, full.channels, full.bit_depth);
    for (int i = 0; i < kept_s; ++i)
        for (int k = 0; k < kept_t; ++k) coarse.view(i, k) = full.view(i * n, k * n);
    const LightField dense = grid2d ? reconstruct_full_parallax(coarse, d_max, d_max, cfg.params, cfg.driver)
                                    : reconstruct_hpo(coarse, d_max, cfg.params, cfg.driver);

    const int last_s = (kept_s - 1) * n, last_t = (kept_t - 1) * n;
    for (int qs = 0; qs <= last_s; ++qs)
        for (int qt = 0; qt <= last_t; ++qt) {
            if (qs % n == 0 && qt % n == 0) continue;
            const Image est = sample_dense(dense, double(qs) * d_max / n, double(qt) * d_max / n);
            const int idx = qs * full.n_t + qt;
            r.per_view.push_back({idx, image_psnr(est, full.view(qs, qt), full.peak(), cfg.mode)});
            if (cfg.keep_estimates) r.estimates.push_back({idx, est});
        }
    r.mean_psnr = mean_finite(r.per_view);
    r.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return r;
}

Image diff_map(const Image& a, const Image& b, double gain, double peak) {
    require_same_shape(a, b, "diff_map");
    Image out(a.height, a.width, a.channels);
    for (std::size_t i = 0; i < a.data.size(); ++i) out.data[i] = std::min(peak, gain * std::abs(a.data[i] - b.data[i]));
    return out;
}

std::string psnr_mode_name(PsnrMode m) { return m == PsnrMode::luma ? "luma" : "rgb_mean"; }

namespace {
std::string fmt(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    if (std::isnan(v)) return "nan";
    std::ostringstream ss;
    ss.precision(6);
    ss << std::fixed << v;
    return ss.str();
}
}  // namespace

std::string report_csv(const EvalReport& r) {
    std::string out = "view_index,psnr_db\n";
    for (const auto& [i, p] : r.per_view) out += std::to_string(i) + "," + fmt(p) + "\n";
    out += "mean," + fmt(r.mean_psnr) + "\n";
    return out;
}

std::string report_json(const EvalReport& r) {
    json j;
    j["dataset"] = r.dataset;
    j["n"] = r.n;
    j["d_max"] = r.d_max;
    j["scales"] = r.scales;
    j["psnr_mode"] = psnr_mode_name(r.mode);
    j["trivial"] = r.trivial;
    j["mean_psnr"] = fmt(r.mean_psnr);
    j["wall_time_s"] = r.wall_time;
    j["per_view"] = json::array();
    for (const auto& [i, p] : r.per_view) j["per_view"].push_back({{"view_index", i}, {"psnr_db", fmt(p)}});
    json p;
    p["n_iter"] = r.params.n_iter;
    p["lambda_max"] = r.params.lambda_max ? json(*r.params.lambda_max) : json("auto");
    p["lambda_min"] = r.params.lambda_min ? json(*r.params.lambda_min) : json("auto");
    p["alpha"] = r.params.adaptive_alpha ? json("adaptive") : json(r.params.alpha);
    p["init"] = r.params.init == InitMode::lowpass ? "lowpass" : "zero";
    j["params"] = p;
    if (!r.notes.empty()) j["notes"] = r.notes;
    return j.dump(2);
}

void write_report(const EvalReport& r, const std::filesystem::path& csv_path) {
    if (csv_path.has_parent_path()) std::filesystem::create_directories(csv_path.parent_path());
    std::ofstream f(csv_path);
    if (!f) throw std::runtime_error("cannot write " + csv_path.string());
    f << report_csv(r);
    std::filesystem::path side = csv_path;
    side.replace_extension(".json");
    std::ofstream g(side);
    if (!g) throw std::runtime_error("cannot write " + side.string());
    g << report_json(r) << "\n";
}

}  // namespace epishear
