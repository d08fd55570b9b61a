#pragma once

#include <vector>

#include "epishear/grid.hpp"

namespace epishear {

// Symmetric odd-length 1D filters, centered on the middle tap.
struct FilterPair1D {
    std::vector<double> h;  // scaling (low-pass)
    std::vector<double> g;  // wavelet (high-pass)

    // throws if either filter is empty, even-length or not symmetric,
    // or if DC gains are wrong (h(0) must be nonzero, g(0) zero)
    void validate() const;

    // CDF 9/7 analysis pair; h scaled to unit DC gain, g to unit peak gain
    static FilterPair1D cdf97();
    // low-pass mixed with an impulse: h' = (1-c) h + c delta.
    // Keeps h'(pi) = c so the frame function stays away from zero.
    static FilterPair1D cdf97_floored(double c = 0.2);
    static FilterPair1D legall53();
};

FilterPair1D default_filter_pair();

// frequency response of a centered symmetric filter (real)
double filter_response(const std::vector<double>& taps, double w);

struct CascadeSet {
    int level = 0;
    std::vector<double> h;  // h_j
    std::vector<double> g;  // g_j (empty for j = 0)
};

// h_0 = delta, h_j = h_{j-1} * (h up 2^{j-1}), g_j = (g up 2^{j-1}) * h_{j-1}
std::vector<CascadeSet> cascade_filters(const FilterPair1D& base, int max_level);

// product-form responses; these are what the shearlet system samples
double cascade_h_response(const FilterPair1D& base, int j, double w);
double cascade_g_response(const FilterPair1D& base, int j, double w);

// Maxflat fan via the McClellan substitution x = (1 - (cos b - cos a)/2) / 2
// into P(x) = (1-x)^N sum_{k<N} C(N-1+k, k) x^k. Passband |b| <= |a|.
class FanFilter {
public:
    explicit FanFilter(int order = 3);

    int order() const { return order_; }
    double response(double a, double b) const;
    // (4N-1) x (4N-1) taps, centered; rows index the first frequency argument
    const Grid& taps() const { return taps_; }
    // response recomputed from the taps, for checking
    double taps_response(double a, double b) const;

private:
    int order_;
    std::vector<double> poly_;  // coefficients of P in x
    Grid taps_;
};

// P(xi1*scale1, xi2*scale2) on the n1 x n2 DFT grid (rows: xi1, cols: xi2).
// P is 2pi-periodic, so scaled arguments wrap automatically.
Grid fan_response_grid(const FanFilter& fan, int n1, int n2, double scale1, double scale2);

}  // namespace epishear
