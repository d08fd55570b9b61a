#include "epishear/fft.hpp"

#include <fftw3.h>

#include <mutex>
#include <numbers>
#include <stdexcept>

namespace epishear {

namespace {
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}
constexpr unsigned kFlags = FFTW_ESTIMATE | FFTW_UNALIGNED;
}  // namespace

Fft2::Fft2(int rows, int cols) : rows_(rows), cols_(cols) {
    if (rows < 1 || cols < 1) throw std::invalid_argument("Fft2: empty size");
    const int h = cols / 2 + 1;
    std::vector<double> r(std::size_t(rows) * cols);
    std::vector<cplx> c(std::size_t(rows) * h);
    auto* cc = reinterpret_cast<fftw_complex*>(c.data());
    std::lock_guard<std::mutex> lk(planner_mutex());
    fwd_ = fftw_plan_dft_r2c_2d(rows, cols, r.data(), cc, kFlags);
    inv_ = fftw_plan_dft_c2r_2d(rows, cols, cc, r.data(), kFlags | FFTW_DESTROY_INPUT);
    if (!fwd_ || !inv_) throw std::runtime_error("Fft2: planning failed");
}

Fft2::~Fft2() {
    std::lock_guard<std::mutex> lk(planner_mutex());
    if (fwd_) fftw_destroy_plan(static_cast<fftw_plan>(fwd_));
    if (inv_) fftw_destroy_plan(static_cast<fftw_plan>(inv_));
}

void Fft2::forward(const Grid& g, Spectrum& out) const {
    if (g.rows != rows_ || g.cols != cols_) throw std::invalid_argument("Fft2::forward: size mismatch");
    out.rows = rows_;
    out.cols = cols_;
    out.data.resize(std::size_t(rows_) * (cols_ / 2 + 1));
    // r2c does not modify its input
    fftw_execute_dft_r2c(static_cast<fftw_plan>(fwd_), const_cast<double*>(g.data.data()),
                         reinterpret_cast<fftw_complex*>(out.data.data()));
}

Spectrum Fft2::forward(const Grid& g) const {
    Spectrum s;
    forward(g, s);
    return s;
}

void Fft2::inverse(const Spectrum& s, Grid& out, std::vector<cplx>& scratch) const {
    if (s.rows != rows_ || s.cols != cols_) throw std::invalid_argument("Fft2::inverse: size mismatch");
    scratch.assign(s.data.begin(), s.data.end());
    if (out.rows != rows_ || out.cols != cols_) out = Grid(rows_, cols_);
    fftw_execute_dft_c2r(static_cast<fftw_plan>(inv_), reinterpret_cast<fftw_complex*>(scratch.data()),
                         out.data.data());
    const double k = 1.0 / (double(rows_) * cols_);
    for (double& v : out.data) v *= k;
}

Grid Fft2::inverse(const Spectrum& s) const {
    Grid g(rows_, cols_);
    std::vector<cplx> scratch;
    inverse(s, g, scratch);
    return g;
}

Fft1::Fft1(int n) : n_(n) {
    if (n < 1) throw std::invalid_argument("Fft1: empty size");
    std::vector<cplx> a(n), b(n);
    auto* pa = reinterpret_cast<fftw_complex*>(a.data());
    auto* pb = reinterpret_cast<fftw_complex*>(b.data());
    std::lock_guard<std::mutex> lk(planner_mutex());
    fwd_ = fftw_plan_dft_1d(n, pa, pb, FFTW_FORWARD, kFlags);
    bwd_ = fftw_plan_dft_1d(n, pa, pb, FFTW_BACKWARD, kFlags);
    if (!fwd_ || !bwd_) throw std::runtime_error("Fft1: planning failed");
}

Fft1::~Fft1() {
    std::lock_guard<std::mutex> lk(planner_mutex());
    if (fwd_) fftw_destroy_plan(static_cast<fftw_plan>(fwd_));
    if (bwd_) fftw_destroy_plan(static_cast<fftw_plan>(bwd_));
}

void Fft1::forward(const cplx* in, cplx* out) const {
    fftw_execute_dft(static_cast<fftw_plan>(fwd_), reinterpret_cast<fftw_complex*>(const_cast<cplx*>(in)),
                     reinterpret_cast<fftw_complex*>(out));
}

void Fft1::backward(const cplx* in, cplx* out) const {
    fftw_execute_dft(static_cast<fftw_plan>(bwd_), reinterpret_cast<fftw_complex*>(const_cast<cplx*>(in)),
                     reinterpret_cast<fftw_complex*>(out));
}

double dft_freq(int i, int n) {
    const int k = (i < (n + 1) / 2) ? i : i - n;
    return 2.0 * std::numbers::pi * k / n;
}

}  // namespace epishear
