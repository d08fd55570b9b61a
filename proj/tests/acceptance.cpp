// One PASS/FAIL line per acceptance criterion; exit status 1 if any fails.
// Dataset runs need --datasets and the views the manifests point at.
#include <CLI11.hpp>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "epishear/dataset_io.hpp"
#include "epishear/harness.hpp"
#include "epishear/lightfield.hpp"
#include "epishear/parallel.hpp"
#include "epishear/reconstruct.hpp"
#include "epishear/shearlet.hpp"

using namespace epishear;
namespace fs = std::filesystem;

namespace {

int failures = 0;

void report(int id, bool ok, const std::string& what, const std::string& detail) {
    std::printf("%s  %2d  %-34s %s\n", ok ? "PASS" : "FAIL", id, what.c_str(), detail.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
}

void skip(int id, const std::string& what, const std::string& why) {
    std::printf("SKIP  %2d  %-34s %s\n", id, what.c_str(), why.c_str());
    std::fflush(stdout);
}

std::string fmt(const char* f, auto... a) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, a...);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Grid random_grid(int rows, int cols, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> U(-1, 1);
    Grid g(rows, cols);
    for (double& v : g.data) v = U(rng);
    return g;
}

double max_abs(const Grid& g) {
    double m = 0;
    for (double v : g.data) m = std::max(m, std::abs(v));
    return m;
}

// ---- 1 ----
void round_trip() {
    double worst = 0, slowest = 0;
    bool ok = true;
    std::uint64_t seed = 1;
    for (auto [r, c] : {std::pair{64, 64}, std::pair{96, 128}})
        for (int J = 2; J <= 4; ++J) {
            const Grid f = random_grid(r, c, seed++);
            const auto t0 = std::chrono::steady_clock::now();
            const ShearletSystem sys = build_system(r, c, J);
            const Grid g = synthesize(sys, analyze(sys, f));
            const double dt = seconds_since(t0);
            double e = 0;
            for (std::size_t i = 0; i < f.data.size(); ++i) e = std::max(e, std::abs(g.data[i] - f.data[i]));
            e /= max_abs(f);
            worst = std::max(worst, e);
            slowest = std::max(slowest, dt);
            ok = ok && e <= 1e-8 && dt < 1.0;
        }
    report(1, ok, "frame round trip", fmt("max rel err %.2e (<= 1e-8), slowest case %.3f s (< 1 s)", worst, slowest));
}

// ---- 2 ----
// recorded from the default configuration at J=2, 256x256
constexpr double golden_A = 0.0142892732, golden_B = 1.1790377;

void frame_bounds_check() {
    const ShearletSystem sys = build_system(256, 256, 2);
    const auto [A, B] = frame_bounds(sys);
    const bool in_range = A > 0 && B < 2;
    const bool golden = std::abs(A - golden_A) <= 0.1 * golden_A && std::abs(B - golden_B) <= 0.1 * golden_B;
    report(2, in_range && golden, "frame bounds J=2 256x256",
           fmt("A=%.10g B=%.8g (A>0, B<2; golden %.10g / %.8g within 10%%)", A, B, golden_A, golden_B));
}

// ---- 3 ----
void element_counts() {
    bool ok = true;
    std::string s;
    for (int J = 1; J <= 6; ++J) {
        int expect = 1;
        for (int j = 0; j < J; ++j) expect += (1 << (j + 1)) + 1;
        const int got = element_count(J);
        const int listed = int(element_list(J).size());
        const int built = J <= 4 ? build_system(64, 64, J).eta() : got;
        ok = ok && got == expect && listed == expect && built == expect;
        s += fmt("%sJ%d=%d", J > 1 ? " " : "", J, got);
    }
    report(3, ok, "element count", s);
}

// ---- 4 and 5 ----
// 256x256 line EPI, disparities in [0, 1] px per row (16 px between given
// rows), rows 0, 16, ..., 240 given; rows past 240 are padding and not scored
struct SynthInstance {
    Grid truth, y;
    SamplingMask mask;
    int scored_rows = 0;
};

constexpr int instance_seed = 1;

SynthInstance synth_instance() {
    constexpr int N = 256, step = 16;
    SynthInstance in;
    in.truth = make_synthetic_epi(N, N, random_lines(10, N, 1.0, instance_seed), instance_seed).epi;
    const int m = (N - 1) / step + 1;
    in.scored_rows = (m - 1) * step + 1;
    in.mask = build_mask(in.scored_rows, step, m).padded(N);
    in.y = in.truth;
    apply_mask(in.y, in.mask);
    return in;
}

double scored_psnr(const Grid& x, const SynthInstance& in) {
    double s = 0;
    for (int r = 0; r < in.scored_rows; ++r)
        for (int c = 0; c < x.cols; ++c) {
            const double d = x(r, c) - in.truth(r, c);
            s += d * d;
        }
    return 10 * std::log10(1.0 / (s / (double(in.scored_rows) * x.cols)));
}

void synthetic_end_to_end(const SynthInstance& in, const ShearletSystem& sys) {
    IterationParams p;
    p.n_iter = 100;
    const int prev = worker_count();
    set_worker_count(1);
    const auto t0 = std::chrono::steady_clock::now();
    const ReconResult r = reconstruct_epi(in.y, in.mask, sys, p);
    const double dt = seconds_since(t0);
    set_worker_count(prev);
    const double q = scored_psnr(r.x, in);
    report(4, !r.diverged && q >= 35.0 && dt <= 60.0, "synthetic line EPI, 100 iterations",
           fmt("PSNR %.2f dB (>= 35), %.1f s single worker (<= 60)", q, dt));
}

void adaptive_dominance(const SynthInstance& in, const ShearletSystem& sys) {
    auto run = [&](bool adaptive, double alpha, bool& diverged) {
        IterationParams p;
        p.n_iter = 50;
        p.adaptive_alpha = adaptive;
        p.alpha = alpha;
        const ReconResult r = reconstruct_epi(in.y, in.mask, sys, p);
        diverged = r.diverged;
        return scored_psnr(r.x, in);
    };
    bool div = false;
    const double qa = run(true, 1, div);
    bool ok = !div;
    double best = -1e9;
    std::string s = fmt("adaptive %.2f", qa);
    for (double a : {1.0, 5.0, 10.0}) {
        bool d = false;
        const double q = run(false, a, d);
        if (!d) best = std::max(best, q);
        s += fmt(", a=%g %.2f%s", a, q, d ? " (diverged)" : "");
    }
    bool d20 = false;
    const double q20 = run(false, 20, d20);
    s += fmt(", a=20 %.2f%s", q20, d20 ? " (diverged)" : "");
    ok = ok && qa >= best - 0.5 && (d20 || q20 <= qa - 5.0);
    report(5, ok, "adaptive step size, 50 iterations", s);
}

// ---- 6 ----
void input_preservation() {
    bool ok = true;
    // driver runs
    const LightField hpo = make_synthetic_lightfield(5, 4, 64, 4, 4.0, 3);
    IterationParams p;
    p.n_iter = 20;
    const LightField dense = reconstruct_hpo(hpo, 4, p);
    for (int i = 0; i < hpo.n_t; ++i) ok = ok && dense.view(0, i * 4).data == hpo.view(0, i).data;

    LightField grid(3, 3, 16, 16, 3, 8);
    std::mt19937_64 rng(9);
    std::uniform_int_distribution<int> U(0, 255);
    for (auto& v : grid.views)
        for (double& x : v.data) x = U(rng);
    const LightField fp = reconstruct_full_parallax(grid, 2, 2, p);
    for (int s = 0; s < 3; ++s)
        for (int t = 0; t < 3; ++t) ok = ok && fp.view(2 * s, 2 * t).data == grid.view(s, t).data;

    // full mask, lambda_min = 0
    const Grid y = random_grid(64, 64, 77);
    const ShearletSystem sys = build_system(64, 64, 2, reconstruction_config());
    IterationParams q;
    q.n_iter = 30;
    q.lambda_min = 0.0;
    const ReconResult r = reconstruct_epi(y, build_mask(64, 1, 64), sys, q);
    double e = 0;
    for (std::size_t i = 0; i < y.data.size(); ++i) e = std::max(e, std::abs(r.x.data[i] - y.data[i]));
    report(6, ok && e <= 1e-6, "input preservation",
           fmt("driver inputs %s, full-mask max err %.2e (<= 1e-6)", ok ? "bit-identical" : "CHANGED", e));
}

// ---- 7 ----
void full_parallax_counts() {
    IterationParams p;
    p.n_iter = 3;
    std::string s;
    bool ok = true;
    for (auto [n, d] : {std::pair{5, 4}, std::pair{9, 2}}) {
        const LightField in(n, n, 8, 8, 1, 8);
        const LightField out = reconstruct_full_parallax(in, d, d, p);
        ok = ok && out.n_s == 17 && out.n_t == 17 && out.views.size() == 289;
        s += fmt("%s%dx%d -> %dx%d (%zu views)", s.empty() ? "" : ", ", n, n, out.n_s, out.n_t, out.views.size());
    }
    report(7, ok, "full-parallax grid arithmetic", s);
}

// ---- 8 ----
LightField point_lf(int n, int size, double d) {
    LightField lf(n, n, size, size, 1, 8);
    const int c = size / 2, mid = n / 2;
    for (int s = 0; s < n; ++s)
        for (int t = 0; t < n; ++t) {
            const double y = c + d * (s - mid), x = c + d * (t - mid);
            const int y0 = int(std::floor(y)), x0 = int(std::floor(x));
            const double fy = y - y0, fx = x - x0;
            Image& im = lf.view(s, t);
            im.at(y0, x0, 0) += 255 * (1 - fy) * (1 - fx);
            im.at(y0, x0 + 1, 0) += 255 * (1 - fy) * fx;
            im.at(y0 + 1, x0, 0) += 255 * fy * (1 - fx);
            im.at(y0 + 1, x0 + 1, 0) += 255 * fy * fx;
        }
    return lf;
}

double window_fraction(const Image& im, int cy, int cx) {
    double in = 0, all = 0;
    for (int y = 0; y < im.height; ++y)
        for (int x = 0; x < im.width; ++x) {
            const double e = im.at(y, x, 0) * im.at(y, x, 0);
            all += e;
            if (std::abs(y - cy) <= 1 && std::abs(x - cx) <= 1) in += e;
        }
    return in / all;
}

void refocus_oracle() {
    const double d = 2.0;
    const LightField lf = point_lf(7, 41, d);
    const double at = window_fraction(refocus(lf, d), 20, 20);
    const double lo = window_fraction(refocus(lf, d - 1), 20, 20);
    const double hi = window_fraction(refocus(lf, d + 1), 20, 20);
    report(8, at >= 0.9 && lo < 0.9 && hi < 0.9, "refocus point source",
           fmt("3x3 energy at slope %.1f: %.3f (>= 0.9); at %.1f: %.3f, at %.1f: %.3f (< 0.9)", d, at, d - 1, lo,
               d + 1, hi));
}

// ---- 9 ----
void datasets(bool enabled, const fs::path& manifests) {
    if (!enabled) {
        skip(9, "dataset reproduction", "long run; pass --datasets to enable");
        return;
    }
    struct Run {
        const char* file;
        double bound;
        int n, d;  // d = 0: derive from the manifest
    };
    bool any = false, ok = true;
    std::string s;
    for (const Run& run : {Run{"teddy.json", 30.0, 2, 0}, Run{"truck.json", 36.0, 4, 4}}) {
        DatasetManifest m;
        LightField lf;
        try {
            m = load_manifest(manifests / run.file);
            lf = load_views(m);
        } catch (const std::exception& e) {
            s += fmt("%s%s: not loaded (%s)", s.empty() ? "" : "; ", run.file, e.what());
            continue;
        }
        any = true;
        EvalConfig cfg;
        cfg.driver.disparity_sign = m.disparity_sign;
        const int d = run.d ? run.d : m.d_max_for(0) * run.n / std::max(1, m.leave_n);
        const EvalReport r = leave_n_out(lf, run.n, d, cfg, m.name);
        ok = ok && r.mean_psnr >= run.bound;
        s += fmt("%s%s n=%d d=%d: %.2f dB (>= %g), %.0f s", s.empty() ? "" : "; ", m.name.c_str(), run.n, d,
                 r.mean_psnr, run.bound, r.wall_time);
    }
    if (!any)
        skip(9, "dataset reproduction", s);
    else
        report(9, ok, "dataset reproduction", s);
}

// ---- 10 ----
void unit_properties() {
    bool ok = true;
    CoefficientStack c;
    c.rows = 1;
    c.cols = 3;
    c.planes.push_back(Grid(1, 3));
    c.planes[0](0, 0) = 3;
    c.planes[0](0, 1) = -1;
    c.planes[0](0, 2) = 0.5;
    const CoefficientStack t = hard_threshold(c, 1.0);
    const bool thr = t.planes[0](0, 0) == 3 && t.planes[0](0, 1) == -1 && t.planes[0](0, 2) == 0;
    ok = ok && thr;

    bool sched = true;
    const double expect[] = {10, 7, 4, 1};
    for (int n = 0; n < 4; ++n) sched = sched && std::abs(lambda_schedule(10, 1, 4, n) - expect[n]) <= 1e-12;
    sched = sched && lambda_schedule(10, 1, 1, 0) == 10;
    ok = ok && sched;

    Image a(4, 4, 3, 100), b(4, 4, 3, 101);
    const double q = psnr(a, b, 255);
    const bool ps = std::abs(q - 20 * std::log10(255.0)) <= 1e-10 && std::abs(q - 48.1308) <= 5e-4;
    ok = ok && ps;

    CameraGeometry g;
    g.focal = 1;
    g.z_min = 2;
    g.z_max = 10;
    g.delta_v = 0.01;
    const double bound = camera_step_bound(g);
    g.delta_t = bound;
    const bool geo = std::abs(bound - 0.02) <= 1e-15 && std::abs(disparity(g, g.z_min) - 1.0) <= 1e-12;
    ok = ok && geo;
    report(10, ok, "unit properties",
           fmt("threshold |x|=lambda kept %s, schedule [10 7 4 1] %s, PSNR %.4f dB, step bound %.4g", thr ? "ok" : "BAD",
               sched ? "ok" : "BAD", q, bound));
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"acceptance checks"};
    bool with_datasets = false;
    std::string manifests = EPISHEAR_MANIFEST_DIR;
    app.add_flag("--datasets", with_datasets, "also run the Teddy and Truck reproductions");
    app.add_option("--manifests", manifests, "directory holding teddy.json and truck.json");
    CLI11_PARSE(app, argc, argv);

    auto guarded = [](int id, const char* what, auto&& f) {
        try {
            f();
        } catch (const std::exception& e) {
            report(id, false, what, std::string("threw: ") + e.what());
        }
    };
    guarded(1, "frame round trip", round_trip);
    guarded(2, "frame bounds J=2 256x256", frame_bounds_check);
    guarded(3, "element count", element_counts);
    guarded(4, "synthetic line EPI", [] {
        const SynthInstance in = synth_instance();
        const ShearletSystem sys = build_system(256, 256, 4, reconstruction_config());
        synthetic_end_to_end(in, sys);
        adaptive_dominance(in, sys);
    });
    guarded(6, "input preservation", input_preservation);
    guarded(7, "full-parallax grid arithmetic", full_parallax_counts);
    guarded(8, "refocus point source", refocus_oracle);
    guarded(9, "dataset reproduction", [&] { datasets(with_datasets, manifests); });
    guarded(10, "unit properties", unit_properties);
    std::printf("%d failed\n", failures);
    return failures ? 1 : 0;
}
