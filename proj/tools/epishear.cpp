// epishear command line front end
#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "epishear/dataset_io.hpp"
#include "epishear/harness.hpp"
#include "epishear/lightfield.hpp"
#include "epishear/parallel.hpp"
#include "epishear/reconstruct.hpp"
#include "epishear/shearlet.hpp"

using namespace epishear;
namespace fs = std::filesystem;

namespace {

struct Common {
    bool verbose = false;
    int threads = 0;
    std::string cache_dir;
    std::string norm;  // empty: per-command default
};

struct IterFlags {
    int iters = 100;
    double lambda_max = -1, lambda_min = -1;
    std::string alpha = "adaptive";
    std::string init = "lowpass";
};

void add_iter_flags(CLI::App* c, IterFlags& f) {
    c->add_option("--iters", f.iters, "iterations")->check(CLI::PositiveNumber);
    auto* lmax = c->add_option("--lambda-max", f.lambda_max, "first threshold (default: from the data)");
    c->add_option("--lambda-min", f.lambda_min, "last threshold")->needs(lmax);
    c->add_option("--alpha", f.alpha, "fixed:A or adaptive");
    c->add_option("--init", f.init, "zero or lowpass")->check(CLI::IsMember({"zero", "lowpass"}));
}

IterationParams make_params(const IterFlags& f) {
    IterationParams p;
    p.n_iter = f.iters;
    if (f.lambda_max >= 0) p.lambda_max = f.lambda_max;
    if (f.lambda_min >= 0) p.lambda_min = f.lambda_min;
    if (f.alpha == "adaptive") {
        p.adaptive_alpha = true;
    } else if (f.alpha.rfind("fixed:", 0) == 0) {
        p.adaptive_alpha = false;
        try {
            p.alpha = std::stod(f.alpha.substr(6));
        } catch (const std::exception&) {
            throw CLI::ValidationError("--alpha", "expected fixed:<number>");
        }
    } else {
        throw CLI::ValidationError("--alpha", "expected fixed:A or adaptive");
    }
    p.init = f.init == "zero" ? InitMode::zero : InitMode::lowpass;
    p.validate();
    return p;
}

// exact: floored 9/7, S* S = I; clamped: the drivers' default; full: both cones, plain 9/7
ShearletConfig make_config(const Common& c, const std::string& fallback) {
    const std::string n = c.norm.empty() ? fallback : c.norm;
    if (n == "clamped") return reconstruction_config();
    if (n == "full") {
        ShearletConfig f;
        f.base = FilterPair1D::cdf97();
        f.norm = Normalization::full_cone;
        return f;
    }
    return ShearletConfig{};
}

DriverOptions make_driver(const Common& c, int height, int channels, int disparity_sign) {
    DriverOptions d;
    d.system = make_config(c, "clamped");
    d.disparity_sign = disparity_sign;
    if (!c.cache_dir.empty()) {
        const ShearletConfig cfg = d.system;
        const fs::path dir = c.cache_dir;
        d.provider = [cfg, dir](int rows, int cols, int J) { return cached_or_built(dir, rows, cols, J, cfg); };
    }
    if (c.verbose) {
        // middle scanline, first channel
        d.observed_job = (height / 2) * channels;
        d.observer = [](const IterationInfo& it) {
            std::printf("iter=%d lambda=%.9g alpha=%.9g residual=%.9g\n", it.n, it.lambda, it.alpha, it.residual);
            std::fflush(stdout);
        };
        d.progress = [](int done, int total) {
            if (done == total || done % 64 == 0) std::fprintf(stderr, "epi %d/%d\n", done, total);
        };
    }
    return d;
}

std::string view_pattern(const LightField& lf, const std::string& ext) {
    return lf.n_s > 1 ? "view_%02d_%02d" + ext : "view_%03d" + ext;
}

int cmd_build_system(int rows, int cols, int scales, const std::string& cache, const Common& c) {
    const auto t0 = std::chrono::steady_clock::now();
    const ShearletSystem sys = build_system(rows, cols, scales, make_config(c, "exact"));
    const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const auto [A, B] = frame_bounds(sys);
    std::printf("rows=%d cols=%d scales=%d elements=%d A=%.9g B=%.9g build_s=%.3f\n", rows, cols, scales, sys.eta(), A,
                B, dt);
    if (!cache.empty()) {
        cache_system(sys, cache);
        std::printf("cache=%s\n", cache.c_str());
    }
    return 0;
}

int cmd_reconstruct(const std::string& manifest_path, int dmax, int dmax_chroma, const IterFlags& f,
                    const std::string& out, bool fullparallax, const Common& c) {
    const DatasetManifest m = load_manifest(manifest_path);
    const IterationParams p = make_params(f);
    const fs::path dir = out;
    fs::create_directories(dir);
    auto run = [&](const LightField& lf, int d) {
        const DriverOptions drv = make_driver(c, lf.height, lf.channels, m.disparity_sign);
        if (fullparallax || lf.n_s > 1) return reconstruct_full_parallax(lf, d, d, p, drv);
        return reconstruct_hpo(lf, d, p, drv);
    };
    const auto t0 = std::chrono::steady_clock::now();
    int written = 0;
    if (m.channel_layout == "YUV") {
        const std::vector<LightField> planes = load_planes(m);
        for (std::size_t i = 0; i < planes.size(); ++i) {
            const int d = i == 0 ? dmax : (dmax_chroma > 0 ? dmax_chroma : dmax);
            const LightField dense = run(planes[i], d);
            const fs::path pd = dir / m.planes[i].name;
            fs::create_directories(pd);
            written += save_views(dense, pd, view_pattern(dense, ".png"));
        }
    } else {
        const LightField dense = run(load_views(m), dmax);
        written = save_views(dense, dir, view_pattern(dense, ".png"));
    }
    const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::fprintf(stderr, "wrote %d views to %s in %.1f s\n", written, dir.string().c_str(), dt);
    return 0;
}

int cmd_evaluate(const std::string& manifest_path, int leave_n, const std::string& report, const std::string& diff_dir,
                 double gain, const std::string& mode, const IterFlags& f, const Common& c) {
    const DatasetManifest m = load_manifest(manifest_path);
    // manifest d_max is the disparity between views kept at the manifest's leave_n
    const int d = std::max(1, int(std::ceil(double(m.d_max_for(0)) * leave_n / std::max(1, m.leave_n))));
    LightField lf;
    if (m.channel_layout == "YUV")
        lf = load_planes(m).at(0);
    else
        lf = load_views(m);
    EvalConfig cfg;
    cfg.params = make_params(f);
    cfg.mode = mode == "luma" ? PsnrMode::luma : PsnrMode::rgb_mean;
    cfg.driver = make_driver(c, lf.height, lf.channels, m.disparity_sign);
    cfg.keep_estimates = !diff_dir.empty();
    EvalReport r = leave_n_out(lf, leave_n, d, cfg, m.name);
    if (m.channel_layout == "YUV") r.notes += (r.notes.empty() ? "" : "; ") + std::string("scored on the Y plane");
    if (report.empty()) {
        std::cout << report_csv(r);
    } else {
        write_report(r, report);
        std::fprintf(stderr, "mean_psnr=%.4f views=%zu report=%s\n", r.mean_psnr, r.per_view.size(), report.c_str());
    }
    if (!diff_dir.empty()) {
        fs::create_directories(diff_dir);
        for (const auto& [idx, est] : r.estimates) {
            const Image dm = diff_map(est, lf.views[idx], gain, lf.peak());
            char name[64];
            std::snprintf(name, sizeof name, "diff_%03d.png", idx);
            write_image(fs::path(diff_dir) / name, dm, lf.bit_depth);
        }
    }
    return 0;
}

int cmd_refocus(const std::string& manifest_path, double slope, const std::string& out) {
    const DatasetManifest m = load_manifest(manifest_path);
    const LightField lf = m.channel_layout == "YUV" ? load_planes(m).at(0) : load_views(m);
    const Image img = refocus(lf, slope * m.disparity_sign);
    const fs::path p = out;
    if (p.extension() == ".pfm")
        write_pfm(p, img);
    else
        write_image(p, img, lf.bit_depth);
    return 0;
}

int cmd_plan_sampling(double zmin, double focal, double pitch, double zmax, double step) {
    CameraGeometry g;
    g.z_min = zmin;
    g.z_max = zmax > 0 ? zmax : zmin;
    g.focal = focal;
    g.delta_v = pitch;
    g.delta_t = step > 0 ? step : 1;
    const double bound = camera_step_bound(g);
    std::printf("camera_step_bound=%.9g\n", bound);
    if (step > 0) {
        const double dnear = disparity(g, g.z_min), dfar = disparity(g, g.z_max);
        std::printf("disparity_near=%.6g disparity_far=%.6g d_max=%d\n", dnear, dfar, int(std::ceil(dnear - 1e-12)));
    }
    return 0;
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream in(s);
    while (std::getline(in, cur, sep))
        if (!cur.empty()) out.push_back(cur);
    return out;
}

// "pos:disp:intensity[:width];..." or "random:COUNT[:SEED]"
std::vector<SyntheticLine> parse_lines(const std::string& spec, int width, double maxd) {
    const auto parts = split(spec, ';');
    if (parts.size() == 1 && parts[0].rfind("random", 0) == 0) {
        const auto f = split(parts[0], ':');
        if (f.size() < 2) throw CLI::ValidationError("--lines", "random needs a count: random:COUNT[:SEED]");
        return random_lines(std::stoi(f[1]), width, maxd, f.size() > 2 ? std::stoull(f[2]) : 1);
    }
    std::vector<SyntheticLine> lines;
    for (const auto& p : parts) {
        const auto f = split(p, ':');
        if (f.size() < 3 || f.size() > 4)
            throw CLI::ValidationError("--lines", "expected pos:disp:intensity[:width], got '" + p + "'");
        SyntheticLine l;
        l.position = std::stod(f[0]);
        l.disparity = std::stod(f[1]);
        l.intensity = std::stod(f[2]);
        if (f.size() == 4) l.width = std::stod(f[3]);
        lines.push_back(l);
    }
    return lines;
}

int cmd_synth(const std::string& spec, const std::string& out, int width, int height, double maxd, double texture,
              std::uint64_t seed) {
    SyntheticOptions o;
    o.max_disparity = maxd;
    o.texture_amplitude = texture;
    const SyntheticEpi e = make_synthetic_epi(width, height, parse_lines(spec, width, maxd), seed, o);
    write_pfm(out, e.epi);
    fs::path side = out;
    side.replace_extension(".json");
    std::ofstream(side) << nlohmann::json::parse(e.description).dump(2) << "\n";
    std::cout << e.description << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Light field reconstruction by shearlet-domain sparse inpainting of epipolar-plane images"};
    app.require_subcommand(1);
    Common c;
    app.add_flag("-v,--verbose", c.verbose, "per-iteration log for the middle scanline");
    app.add_option("--threads", c.threads, "worker count (0: OpenMP default)")->check(CLI::NonNegativeNumber);
    app.add_option("--cache-dir", c.cache_dir, "reuse shearlet systems stored here");
    app.add_option("--normalization", c.norm, "duals: exact (build-system default), clamped (reconstruction default) or full")
        ->check(CLI::IsMember({"exact", "clamped", "full"}));

    int rows = 0, cols = 0, scales = 0;
    std::string cache;
    auto* bs = app.add_subcommand("build-system", "build a shearlet system and print its frame bounds");
    bs->add_option("--rows", rows)->required()->check(CLI::PositiveNumber);
    bs->add_option("--cols", cols)->required()->check(CLI::PositiveNumber);
    bs->add_option("--scales", scales)->required()->check(CLI::Range(1, 8));
    bs->add_option("--cache", cache, "write the system to this file");

    std::string manifest, out;
    int dmax = 1, dmax_chroma = 0;
    bool fullparallax = false;
    IterFlags rf;
    auto* rc = app.add_subcommand("reconstruct", "densify a coarse light field");
    rc->add_option("--manifest", manifest)->required()->check(CLI::ExistingFile);
    rc->add_option("--dmax", dmax)->required()->check(CLI::PositiveNumber);
    rc->add_option("--dmax-chroma", dmax_chroma)->check(CLI::PositiveNumber);
    rc->add_option("--out", out)->required();
    rc->add_flag("--fullparallax", fullparallax);
    add_iter_flags(rc, rf);

    int leave_n = 2;
    std::string report, diff_dir, mode = "rgb";
    double gain = 10;
    IterFlags ef;
    auto* ev = app.add_subcommand("evaluate", "leave-N-out PSNR against the held-out views");
    ev->add_option("--manifest", manifest)->required()->check(CLI::ExistingFile);
    ev->add_option("--leave-n", leave_n)->required()->check(CLI::PositiveNumber);
    ev->add_option("--report", report, "CSV path (a .json sidecar is written next to it)");
    auto* dd = ev->add_option("--diff-maps", diff_dir, "directory for scaled difference maps");
    ev->add_option("--gain", gain)->needs(dd);
    ev->add_option("--psnr", mode, "rgb (per channel mean) or luma")->check(CLI::IsMember({"rgb", "luma"}));
    add_iter_flags(ev, ef);

    double slope = 0;
    auto* rf_cmd = app.add_subcommand("refocus", "shift-and-add refocusing");
    rf_cmd->add_option("--manifest", manifest)->required()->check(CLI::ExistingFile);
    rf_cmd->add_option("--slope", slope, "pixels per view")->required();
    rf_cmd->add_option("--out", out)->required();

    double zmin = 0, focal = 0, pitch = 0, zmax = 0, step = 0;
    auto* ps = app.add_subcommand("plan-sampling", "largest camera step keeping disparity <= 1 px");
    ps->add_option("--zmin", zmin)->required()->check(CLI::PositiveNumber);
    ps->add_option("--focal", focal)->required()->check(CLI::PositiveNumber);
    ps->add_option("--pixel-pitch", pitch)->required()->check(CLI::PositiveNumber);
    ps->add_option("--zmax", zmax, "farthest depth")->check(CLI::PositiveNumber);
    ps->add_option("--camera-step", step, "report disparities for this step")->check(CLI::PositiveNumber);

    std::string lines;
    int width = 256, height = 256;
    double maxd = 1, texture = 0.05;
    std::uint64_t seed = 1;
    auto* se = app.add_subcommand("synth-epi", "synthetic Lambertian EPI (dense ground truth)");
    se->add_option("--lines", lines, "pos:disp:intensity[:width];... or random:COUNT[:SEED]")->required();
    se->add_option("--out", out)->required();
    se->add_option("--width", width)->check(CLI::PositiveNumber);
    se->add_option("--height", height)->check(CLI::PositiveNumber);
    se->add_option("--max-disparity", maxd, "px per dense row");
    se->add_option("--texture", texture, "background texture amplitude");
    se->add_option("--seed", seed, "texture seed");

    CLI11_PARSE(app, argc, argv);
    if (c.threads > 0) set_worker_count(c.threads);

    try {
        if (*bs) return cmd_build_system(rows, cols, scales, cache, c);
        if (*rc) return cmd_reconstruct(manifest, dmax, dmax_chroma, rf, out, fullparallax, c);
        if (*ev) return cmd_evaluate(manifest, leave_n, report, diff_dir, gain, mode, ef, c);
        if (*rf_cmd) return cmd_refocus(manifest, slope, out);
        if (*ps) return cmd_plan_sampling(zmin, focal, pitch, zmax, step);
        if (*se) return cmd_synth(lines, out, width, height, maxd, texture, seed);
    } catch (const CLI::Error& e) {
        return app.exit(e);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
