#include "epishear/shearlet.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "epishear/parallel.hpp"

namespace epishear {

namespace {

constexpr double kPi = std::numbers::pi;

// Evaluates f at (a1, a2); on Nyquist samples the +pi and -pi readings are
// averaged so the sampled response stays even (and its DFT real).
template <class F>
double sym_eval(F&& f, double a1, double a2, bool nyq1, bool nyq2) {
    if (!nyq1 && !nyq2) return f(a1, a2);
    if (nyq1 && nyq2) return 0.25 * (f(kPi, kPi) + f(kPi, -kPi) + f(-kPi, kPi) + f(-kPi, -kPi));
    if (nyq1) return 0.5 * (f(kPi, a2) + f(-kPi, a2));
    return 0.5 * (f(a1, kPi) + f(a1, -kPi));
}

struct ElementEval {
    const FilterPair1D& base;
    const FanFilter& fan;
    int J;

    // psi_{j,0}(a1, a2 + s a1)
    double psi(int j, double s, double a1, double a2) const {
        const double b2 = a2 + s * a1;
        const double p = fan.response(std::ldexp(a1, J - j - 1), std::ldexp(b2, J + 1));
        if (p == 0.0) return 0.0;
        return p * cascade_g_response(base, J - j, a1) * cascade_h_response(base, J + 1, b2);
    }
    double lowpass(double a1, double a2) const {
        return cascade_h_response(base, J, a1) * cascade_h_response(base, J, a2);
    }
};

}  // namespace

ShearletConfig reconstruction_config() {
    ShearletConfig c;
    c.base = FilterPair1D::cdf97();
    c.dual_floor = 0.3;
    return c;
}

int element_count(int scales) {
    if (scales < 0) throw std::invalid_argument("element_count: negative scales");
    int n = 1;
    for (int j = 0; j < scales; ++j) n += (1 << (j + 1)) + 1;
    return n;
}

std::vector<ElementIndex> element_list(int scales) {
    std::vector<ElementIndex> out{{-1, 0}};
    for (int j = 0; j < scales; ++j)
        for (int k = 0; k <= (1 << (j + 1)); ++k) out.push_back({j, k});
    return out;
}

const Fft2& ShearletSystem::fft() const {
    if (!fft_) throw std::logic_error("ShearletSystem: not finalized");
    return *fft_;
}

void ShearletSystem::finalize() { fft_ = std::make_shared<const Fft2>(rows, cols); }

ShearletSystem build_system(int rows, int cols, int scales, const ShearletConfig& cfg) {
    if (scales < 1) throw std::invalid_argument("build_system: scales must be >= 1");
    if (rows < (1 << scales) || cols < (1 << scales))
        throw std::invalid_argument("build_system: grid " + std::to_string(rows) + "x" + std::to_string(cols) +
                                    " too small for " + std::to_string(scales) + " scales");
    cfg.base.validate();
    const FanFilter fan(cfg.fan_order);
    const ElementEval ev{cfg.base, fan, scales};

    ShearletSystem sys;
    sys.rows = rows;
    sys.cols = cols;
    sys.scales = scales;
    sys.norm = cfg.norm;
    sys.elements = element_list(scales);
    const int hc = sys.half_cols();
    const std::size_t n = sys.half_size();
    const int eta = sys.eta();
    sys.analysis.assign(eta, std::vector<double>(n));

    auto fill = [&](std::vector<double>& out, auto&& f) {
        for (int r = 0; r < rows; ++r) {
            const double a2 = dft_freq(r, rows);
            const bool nyq2 = rows % 2 == 0 && r == rows / 2;
            for (int c = 0; c < hc; ++c) {
                const bool nyq1 = cols % 2 == 0 && c == cols / 2;
                out[std::size_t(r) * hc + c] = sym_eval(f, dft_freq(c, cols), a2, nyq1, nyq2);
            }
        }
    };

    parallel_for(eta, [&](int e) {
        const ElementIndex id = sys.elements[e];
        if (id.lowpass()) {
            fill(sys.analysis[e], [&](double a1, double a2) { return ev.lowpass(a1, a2); });
        } else {
            const double s = double(id.k) / double(1 << (id.j + 1));
            fill(sys.analysis[e], [&](double a1, double a2) { return ev.psi(id.j, s, a1, a2); });
        }
    });

    sys.frame.assign(n, 0.0);
    if (cfg.norm == Normalization::used_elements) {
        for (int e = 0; e < eta; ++e)
            for (std::size_t i = 0; i < n; ++i) sys.frame[i] += sys.analysis[e][i] * sys.analysis[e][i];
    } else {
        // both cones and negative shears; the low-pass appears once
        std::vector<std::pair<int, int>> jobs;
        for (int j = 0; j < scales; ++j)
            for (int k = -(1 << (j + 1)); k <= (1 << (j + 1)); ++k) jobs.push_back({j, k});
        std::vector<std::vector<double>> parts(jobs.size(), std::vector<double>(n));
        parallel_for(int(jobs.size()), [&](int q) {
            const int j = jobs[q].first;
            const double s = double(jobs[q].second) / double(1 << (j + 1));
            fill(parts[q], [&](double a1, double a2) {
                const double h = ev.psi(j, s, a1, a2);
                const double v = ev.psi(j, s, a2, a1);
                return h * h + v * v;
            });
        });
        for (std::size_t i = 0; i < n; ++i) sys.frame[i] = sys.analysis[0][i] * sys.analysis[0][i];
        for (const auto& p : parts)
            for (std::size_t i = 0; i < n; ++i) sys.frame[i] += p[i];
    }

    if (!(cfg.dual_floor >= 0) || !std::isfinite(cfg.dual_floor))
        throw std::invalid_argument("build_system: dual_floor must be finite and >= 0");
    const auto [A, B] = frame_bounds(sys);
    if (!std::isfinite(B) || (cfg.dual_floor == 0 && !(A > 1e-12 * B)))
        throw SingularSystem("build_system: frame function vanishes (min " + std::to_string(A) + ", max " +
                             std::to_string(B) + ")");

    sys.dual.assign(eta, std::vector<double>(n));
    for (int e = 0; e < eta; ++e)
        for (std::size_t i = 0; i < n; ++i) sys.dual[e][i] = sys.analysis[e][i] / std::max(sys.frame[i], cfg.dual_floor);
    sys.finalize();
    return sys;
}

std::pair<double, double> frame_bounds(const ShearletSystem& sys) {
    if (sys.frame.empty()) return {0.0, 0.0};
    const auto [lo, hi] = std::minmax_element(sys.frame.begin(), sys.frame.end());
    return {*lo, *hi};
}

namespace {

void check_grid(const ShearletSystem& sys, int rows, int cols, const char* what) {
    if (rows != sys.rows || cols != sys.cols)
        throw std::invalid_argument(std::string(what) + ": expected " + std::to_string(sys.rows) + "x" +
                                    std::to_string(sys.cols) + ", got " + std::to_string(rows) + "x" +
                                    std::to_string(cols));
}

void filter_plane(const ShearletSystem& sys, const Spectrum& F, int e, Spectrum& tmp, Grid& out,
                  std::vector<cplx>& scratch) {
    tmp.rows = F.rows;
    tmp.cols = F.cols;
    tmp.data.resize(F.data.size());
    const auto& E = sys.analysis[e];
    for (std::size_t i = 0; i < F.data.size(); ++i) tmp.data[i] = F.data[i] * E[i];
    sys.fft().inverse(tmp, out, scratch);
}

// sum_e C_e * D_e per bin, always in element order
void accumulate(const ShearletSystem& sys, const std::vector<Spectrum>& C, Spectrum& acc, std::size_t lo,
                std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) {
        cplx s = 0;
        for (int e = 0; e < sys.eta(); ++e) s += C[e].data[i] * sys.dual[e][i];
        acc.data[i] = s;
    }
}

}  // namespace

CoefficientStack analyze_serial(const ShearletSystem& sys, const Grid& epi) {
    check_grid(sys, epi.rows, epi.cols, "analyze");
    const Spectrum F = sys.fft().forward(epi);
    CoefficientStack out{sys.rows, sys.cols, std::vector<Grid>(sys.eta(), Grid(sys.rows, sys.cols))};
    Spectrum tmp;
    std::vector<cplx> scratch;
    for (int e = 0; e < sys.eta(); ++e) filter_plane(sys, F, e, tmp, out.planes[e], scratch);
    return out;
}

CoefficientStack analyze(const ShearletSystem& sys, const Grid& epi) {
    check_grid(sys, epi.rows, epi.cols, "analyze");
    const Spectrum F = sys.fft().forward(epi);
    CoefficientStack out{sys.rows, sys.cols, std::vector<Grid>(sys.eta(), Grid(sys.rows, sys.cols))};
    parallel_for(sys.eta(), [&](int e) {
        thread_local Spectrum tmp;
        thread_local std::vector<cplx> scratch;
        filter_plane(sys, F, e, tmp, out.planes[e], scratch);
    });
    return out;
}

Grid synthesize_serial(const ShearletSystem& sys, const CoefficientStack& coeffs) {
    if (int(coeffs.planes.size()) != sys.eta()) throw std::invalid_argument("synthesize: plane count mismatch");
    std::vector<Spectrum> C(sys.eta());
    for (int e = 0; e < sys.eta(); ++e) {
        check_grid(sys, coeffs.planes[e].rows, coeffs.planes[e].cols, "synthesize");
        sys.fft().forward(coeffs.planes[e], C[e]);
    }
    Spectrum acc{sys.rows, sys.cols, std::vector<cplx>(sys.half_size())};
    accumulate(sys, C, acc, 0, acc.data.size());
    return sys.fft().inverse(acc);
}

Grid synthesize(const ShearletSystem& sys, const CoefficientStack& coeffs) {
    if (int(coeffs.planes.size()) != sys.eta()) throw std::invalid_argument("synthesize: plane count mismatch");
    for (const auto& p : coeffs.planes) check_grid(sys, p.rows, p.cols, "synthesize");
    std::vector<Spectrum> C(sys.eta());
    parallel_for(sys.eta(), [&](int e) { sys.fft().forward(coeffs.planes[e], C[e]); });
    Spectrum acc{sys.rows, sys.cols, std::vector<cplx>(sys.half_size())};
    const std::size_t hc = std::size_t(sys.half_cols());
    parallel_for(sys.rows, [&](int r) { accumulate(sys, C, acc, r * hc, (r + 1) * hc); });
    return sys.fft().inverse(acc);
}

namespace {
Grid response_to_filter(const ShearletSystem& sys, const std::vector<double>& resp) {
    Spectrum s{sys.rows, sys.cols, std::vector<cplx>(resp.begin(), resp.end())};
    return sys.fft().inverse(s);
}
}  // namespace

Grid element_filter(const ShearletSystem& sys, int index) { return response_to_filter(sys, sys.analysis.at(index)); }
Grid dual_filter(const ShearletSystem& sys, int index) { return response_to_filter(sys, sys.dual.at(index)); }

Grid digital_shear(const Grid& img, int k, int j) {
    if (j < 0) throw std::invalid_argument("digital_shear: negative j");
    if (k < 0) throw std::invalid_argument("digital_shear: negative k");
    const double s = std::ldexp(double(k), -j);
    const int n = img.cols;
    Grid out(img.rows, n);
    if (n == 0) return out;
    const Fft1 fft(n);
    parallel_for(img.rows, [&](int t) {
        std::vector<cplx> a(n), b(n);
        for (int v = 0; v < n; ++v) a[v] = img(t, v);
        fft.forward(a.data(), b.data());
        for (int f = 0; f < n; ++f) {
            if (n % 2 == 0 && f == n / 2) {
                b[f] *= std::cos(kPi * s * t);
            } else {
                const double w = dft_freq(f, n);
                b[f] *= std::polar(1.0, -w * s * t);
            }
        }
        fft.backward(b.data(), a.data());
        for (int v = 0; v < n; ++v) out(t, v) = a[v].real() / n;
    });
    return out;
}

Grid digital_shear_refined(const Grid& img, int k, int j) {
    if (j < 0) throw std::invalid_argument("digital_shear_refined: negative j");
    if (k < 0) throw std::invalid_argument("digital_shear_refined: negative k");
    const int n = img.cols;
    const int up = 1 << j;
    const int L = n * up;
    Grid out(img.rows, n);
    if (n == 0) return out;
    const Fft1 fft(L);
    // tau_j: ideal low-pass at pi/2^j on the refined grid
    auto tau = [&](std::vector<cplx>& X, double gain, double nyq_weight) {
        for (int q = 0; q < L; ++q) {
            const int qs = q <= L / 2 ? q : q - L;
            const int aq = std::abs(qs);
            if (2 * aq < n) X[q] *= gain;
            else if (2 * aq == n) X[q] *= (up == 1 ? gain : gain * nyq_weight);
            else X[q] = 0;
        }
    };
    std::vector<cplx> u(L), U(L), z(L);
    for (int t = 0; t < img.rows; ++t) {
        std::fill(u.begin(), u.end(), cplx(0));
        for (int m = 0; m < n; ++m) u[std::size_t(m) * up] = img(t, m);
        fft.forward(u.data(), U.data());
        tau(U, double(up), 0.5);
        fft.backward(U.data(), z.data());
        const long shift = (long(k) * t) % L;
        for (int m = 0; m < L; ++m) u[(m + shift) % L] = z[m] / double(L);
        fft.forward(u.data(), U.data());
        tau(U, 1.0, 1.0);
        fft.backward(U.data(), z.data());
        for (int m = 0; m < n; ++m) out(t, m) = z[std::size_t(m) * up].real() / L;
    }
    return out;
}

}  // namespace epishear
