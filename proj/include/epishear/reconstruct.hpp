#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "epishear/grid.hpp"
#include "epishear/shearlet.hpp"

namespace epishear {

struct SamplingMask {
    int n_t = 0;
    int step = 1;                    // d_max
    std::vector<int> measured_rows;  // sorted
    std::vector<char> measured;      // per row flag, size n_t

    bool is_measured(int r) const { return measured[r] != 0; }
    // extend to `rows`; the appended rows are unknown
    SamplingMask padded(int rows) const;
};

// rows {0, d_max, ..., (m-1) d_max}
SamplingMask build_mask(int n_t, int d_max, int m);
SamplingMask mask_from_rows(int n_t, int step, std::vector<int> rows);

enum class InitMode { zero, lowpass };

// which coefficients restrict beta when picking the adaptive step
enum class SupportRule {
    analysis,     // nonzero coefficients of analyze(x_n)
    thresholded,  // coefficients kept by the previous thresholding
};

struct IterationParams {
    int n_iter = 100;
    std::optional<double> lambda_max;  // default: lambda_max_fraction * max|analyze(alpha_0 y)|
    std::optional<double> lambda_min;  // default: lambda_min_ratio * lambda_max
    double lambda_max_fraction = 0.9;
    double lambda_min_ratio = 1e-3;
    bool adaptive_alpha = true;
    double alpha = 1.0;  // used when not adaptive
    InitMode init = InitMode::lowpass;
    SupportRule support = SupportRule::thresholded;
    bool threshold_lowpass = false;
    bool reimpose_each = false;

    void validate() const;
};

struct IterationInfo {
    int n;
    double lambda;
    double alpha;
    double residual;
};
using IterationObserver = std::function<void(const IterationInfo&)>;

struct ReconResult {
    Grid x;
    bool diverged = false;
    int iterations = 0;
    double residual = 0;
};

// keep |c| >= lambda
void hard_threshold_inplace(CoefficientStack& c, double lambda);
CoefficientStack hard_threshold(const CoefficientStack& c, double lambda);

double lambda_schedule(double lambda_max, double lambda_min, int n_iter, int n);
double lambda_schedule(const IterationParams& p, int n);

// ||beta||^2 / ||H S* beta||^2 with beta = analyze(y - H x) restricted to
// `support`; an empty support counts as full, 0/0 gives 1
double adaptive_alpha(const Grid& x, const Grid& y, const SamplingMask& mask, const ShearletSystem& sys);
double adaptive_alpha(const CoefficientStack& residual_coeffs, const std::vector<std::vector<char>>* support,
                      const SamplingMask& mask, const ShearletSystem& sys);

// (phi * y) / (phi * mask), zero where the mask is too thin
Grid lowpass_init(const Grid& y, const SamplingMask& mask, const ShearletSystem& sys);

void apply_mask(Grid& g, const SamplingMask& mask);

ReconResult reconstruct_epi(const Grid& y, const SamplingMask& mask, const ShearletSystem& sys,
                            const IterationParams& params, const IterationObserver& observer = {});

}  // namespace epishear
