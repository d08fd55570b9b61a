#pragma once

#include <complex>
#include <memory>
#include <vector>

#include "epishear/grid.hpp"

namespace epishear {

using cplx = std::complex<double>;

// Half spectrum of a real grid: rows x (cols/2 + 1), row-major.
struct Spectrum {
    int rows = 0;
    int cols = 0;  // real-domain width
    std::vector<cplx> data;

    int half() const { return cols / 2 + 1; }
    cplx& operator()(int r, int c) { return data[std::size_t(r) * half() + c]; }
    cplx operator()(int r, int c) const { return data[std::size_t(r) * half() + c]; }
};

// 2D real FFT pair for one grid size. Plans are created once (guarded by a
// global mutex, FFTW's planner is not reentrant) and executed with the
// new-array interface, so one object can be shared across threads.
class Fft2 {
public:
    Fft2(int rows, int cols);
    ~Fft2();
    Fft2(const Fft2&) = delete;
    Fft2& operator=(const Fft2&) = delete;

    int rows() const { return rows_; }
    int cols() const { return cols_; }

    Spectrum forward(const Grid& g) const;
    void forward(const Grid& g, Spectrum& out) const;
    // unnormalized c2r divided by rows*cols; `scratch` is clobbered
    Grid inverse(const Spectrum& s) const;
    void inverse(const Spectrum& s, Grid& out, std::vector<cplx>& scratch) const;

private:
    int rows_, cols_;
    void* fwd_ = nullptr;
    void* inv_ = nullptr;
};

// 1D complex DFT of arbitrary length (unnormalized), used by the literal
// refined-grid shear.
class Fft1 {
public:
    explicit Fft1(int n);
    ~Fft1();
    Fft1(const Fft1&) = delete;
    Fft1& operator=(const Fft1&) = delete;

    int size() const { return n_; }
    void forward(const cplx* in, cplx* out) const;
    void backward(const cplx* in, cplx* out) const;

private:
    int n_;
    void* fwd_ = nullptr;
    void* bwd_ = nullptr;
};

// 2*pi*fftfreq(n)[i]; the Nyquist bin maps to -pi
double dft_freq(int i, int n);

}  // namespace epishear
