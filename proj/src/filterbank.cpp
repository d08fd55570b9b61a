#include "epishear/filterbank.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "epishear/fft.hpp"

namespace epishear {

namespace {

constexpr double kPi = std::numbers::pi;

std::vector<double> upsample(const std::vector<double>& f, int factor) {
    if (factor == 1) return f;
    std::vector<double> out((f.size() - 1) * factor + 1, 0.0);
    for (std::size_t i = 0; i < f.size(); ++i) out[i * factor] = f[i];
    return out;
}

std::vector<double> convolve(const std::vector<double>& a, const std::vector<double>& b) {
    std::vector<double> out(a.size() + b.size() - 1, 0.0);
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t k = 0; k < b.size(); ++k) out[i + k] += a[i] * b[k];
    return out;
}

double peak_gain(const std::vector<double>& taps) {
    double m = 0;
    for (int i = 0; i <= 4096; ++i) m = std::max(m, std::abs(filter_response(taps, kPi * i / 4096)));
    return m;
}

FilterPair1D normalized(std::vector<double> h, std::vector<double> g) {
    double s = 0;
    for (double v : h) s += v;
    for (double& v : h) v /= s;
    const double pk = peak_gain(g);
    for (double& v : g) v /= pk;
    FilterPair1D p{std::move(h), std::move(g)};
    p.validate();
    return p;
}

}  // namespace

double filter_response(const std::vector<double>& taps, double w) {
    const int c = int(taps.size()) / 2;
    double acc = taps[c];
    for (int n = 1; n <= c; ++n) acc += 2.0 * taps[c + n] * std::cos(w * n);
    return acc;
}

void FilterPair1D::validate() const {
    auto check = [](const std::vector<double>& f, const char* name) {
        if (f.empty()) throw std::invalid_argument(std::string(name) + " is empty");
        if (f.size() % 2 == 0) throw std::invalid_argument(std::string(name) + " must have odd length");
        for (std::size_t i = 0; i < f.size(); ++i) {
            if (!std::isfinite(f[i])) throw std::invalid_argument(std::string(name) + " has non-finite taps");
            if (std::abs(f[i] - f[f.size() - 1 - i]) > 1e-12 * (1 + std::abs(f[i])))
                throw std::invalid_argument(std::string(name) + " must be symmetric");
        }
    };
    check(h, "h");
    check(g, "g");
    if (std::abs(filter_response(h, 0.0)) < 1e-12) throw std::invalid_argument("h has zero DC gain");
    if (std::abs(filter_response(g, 0.0)) > 1e-12) throw std::invalid_argument("g has nonzero DC gain");
}

FilterPair1D FilterPair1D::cdf97() {
    return normalized({0.026748757410810, -0.016864118442875, -0.078223266528988, 0.266864118442872,
                       0.602949018236358, 0.266864118442872, -0.078223266528988, -0.016864118442875,
                       0.026748757410810},
                      {0.091271763114250, -0.057543526228500, -0.591271763114247, 1.115087052456994,
                       -0.591271763114247, -0.057543526228500, 0.091271763114250});
}

FilterPair1D FilterPair1D::cdf97_floored(double c) {
    if (!(c >= 0.0 && c < 1.0)) throw std::invalid_argument("floor must be in [0, 1)");
    FilterPair1D p = cdf97();
    for (double& v : p.h) v *= (1.0 - c);
    p.h[p.h.size() / 2] += c;
    p.validate();
    return p;
}

FilterPair1D FilterPair1D::legall53() {
    return normalized({-1, 2, 6, 2, -1}, {-1, 2, -1});
}

FilterPair1D default_filter_pair() { return FilterPair1D::cdf97_floored(0.2); }

std::vector<CascadeSet> cascade_filters(const FilterPair1D& base, int max_level) {
    if (max_level < 0) throw std::invalid_argument("cascade_filters: negative level");
    base.validate();
    std::vector<CascadeSet> out;
    out.push_back({0, {1.0}, {}});
    for (int j = 1; j <= max_level; ++j) {
        const int up = 1 << (j - 1);
        const auto& prev = out.back().h;
        CascadeSet s;
        s.level = j;
        s.h = convolve(prev, upsample(base.h, up));
        s.g = convolve(upsample(base.g, up), prev);
        out.push_back(std::move(s));
    }
    return out;
}

double cascade_h_response(const FilterPair1D& base, int j, double w) {
    double acc = 1.0;
    for (int k = 0; k < j; ++k) acc *= filter_response(base.h, std::ldexp(w, k));
    return acc;
}

double cascade_g_response(const FilterPair1D& base, int j, double w) {
    if (j < 1) throw std::invalid_argument("cascade_g_response: level must be >= 1");
    return filter_response(base.g, std::ldexp(w, j - 1)) * cascade_h_response(base, j - 1, w);
}

FanFilter::FanFilter(int order) : order_(order) {
    if (order < 1) throw std::invalid_argument("FanFilter: order must be >= 1");
    // expand (1-x)^N sum_k C(N-1+k,k) x^k into powers of x
    const int N = order;
    std::vector<double> a(N, 0.0);
    for (int k = 0; k < N; ++k) a[k] = std::tgamma(N + k) / (std::tgamma(k + 1) * std::tgamma(N));
    std::vector<double> b(N + 1, 0.0);
    for (int k = 0; k <= N; ++k) b[k] = std::tgamma(N + 1) / (std::tgamma(k + 1) * std::tgamma(N - k + 1)) * ((k % 2) ? -1 : 1);
    poly_.assign(2 * N, 0.0);
    for (int i = 0; i < N; ++i)
        for (int k = 0; k <= N; ++k) poly_[i + k] += a[i] * b[k];

    // P is a trig polynomial of degree 2N-1 per axis; sampling it on a
    // 4N grid and inverting gives the taps without aliasing.
    const int M = 4 * N;
    const int half = 2 * N - 1;
    Grid samples(M, M);
    for (int p = 0; p < M; ++p)
        for (int q = 0; q < M; ++q) samples(p, q) = response(2 * kPi * p / M, 2 * kPi * q / M);
    taps_ = Grid(2 * half + 1, 2 * half + 1);
    for (int m1 = -half; m1 <= half; ++m1)
        for (int m2 = -half; m2 <= half; ++m2) {
            double acc = 0;
            for (int p = 0; p < M; ++p)
                for (int q = 0; q < M; ++q) acc += samples(p, q) * std::cos(2 * kPi * (double(p) * m1 + double(q) * m2) / M);
            taps_(m1 + half, m2 + half) = acc / (double(M) * M);
        }
}

double FanFilter::response(double a, double b) const {
    const double t = 0.5 * (std::cos(b) - std::cos(a));
    const double x = 0.5 * (1.0 - t);
    double acc = 0;
    for (std::size_t i = poly_.size(); i-- > 0;) acc = acc * x + poly_[i];
    return acc;
}

double FanFilter::taps_response(double a, double b) const {
    const int half = taps_.rows / 2;
    double re = 0;
    for (int m1 = -half; m1 <= half; ++m1)
        for (int m2 = -half; m2 <= half; ++m2) re += taps_(m1 + half, m2 + half) * std::cos(a * m1 + b * m2);
    return re;
}

Grid fan_response_grid(const FanFilter& fan, int n1, int n2, double scale1, double scale2) {
    if (n1 < 2 || n2 < 2) throw std::invalid_argument("fan_response_grid: grid must be at least 2x2");
    if (!(scale1 > 0) || !(scale2 > 0)) throw std::invalid_argument("fan_response_grid: scales must be positive");
    Grid out(n1, n2);
    for (int i = 0; i < n1; ++i) {
        const double a = dft_freq(i, n1) * scale1;
        for (int k = 0; k < n2; ++k) out(i, k) = fan.response(a, dft_freq(k, n2) * scale2);
    }
    return out;
}

}  // namespace epishear
