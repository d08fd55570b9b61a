#include "epishear/reconstruct.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "epishear/parallel.hpp"

namespace epishear {

SamplingMask mask_from_rows(int n_t, int step, std::vector<int> rows) {
    if (n_t < 1) throw std::invalid_argument("mask: n_t must be positive");
    std::sort(rows.begin(), rows.end());
    rows.erase(std::unique(rows.begin(), rows.end()), rows.end());
    SamplingMask m;
    m.n_t = n_t;
    m.step = step;
    m.measured.assign(n_t, 0);
    for (int r : rows) {
        if (r < 0 || r >= n_t) throw std::invalid_argument("mask: row " + std::to_string(r) + " out of range");
        m.measured[r] = 1;
    }
    m.measured_rows = std::move(rows);
    return m;
}

SamplingMask build_mask(int n_t, int d_max, int m) {
    if (m < 2) throw std::invalid_argument("build_mask: need at least 2 measured rows");
    if (d_max < 1) throw std::invalid_argument("build_mask: d_max must be >= 1");
    if (n_t < (m - 1) * d_max + 1)
        throw std::invalid_argument("build_mask: n_t=" + std::to_string(n_t) + " cannot hold " + std::to_string(m) +
                                    " rows at step " + std::to_string(d_max));
    std::vector<int> rows(m);
    for (int i = 0; i < m; ++i) rows[i] = i * d_max;
    return mask_from_rows(n_t, d_max, std::move(rows));
}

SamplingMask SamplingMask::padded(int rows) const {
    if (rows < n_t) throw std::invalid_argument("mask: cannot pad to fewer rows");
    return mask_from_rows(rows, step, measured_rows);
}

void IterationParams::validate() const {
    if (n_iter < 1) throw std::invalid_argument("n_iter must be >= 1");
    if (!adaptive_alpha && !(alpha > 0)) throw std::invalid_argument("fixed alpha must be positive");
    if (lambda_max && *lambda_max < 0) throw std::invalid_argument("lambda_max must be >= 0");
    if (lambda_min && *lambda_min < 0) throw std::invalid_argument("lambda_min must be >= 0");
    if (lambda_max && lambda_min && *lambda_min > *lambda_max)
        throw std::invalid_argument("lambda_min exceeds lambda_max");
}

void hard_threshold_inplace(CoefficientStack& c, double lambda) {
    if (lambda < 0) throw std::invalid_argument("hard_threshold: negative lambda");
    for (auto& p : c.planes)
        for (double& v : p.data)
            if (std::abs(v) < lambda) v = 0.0;
}

CoefficientStack hard_threshold(const CoefficientStack& c, double lambda) {
    CoefficientStack out = c;
    hard_threshold_inplace(out, lambda);
    return out;
}

double lambda_schedule(double lambda_max, double lambda_min, int n_iter, int n) {
    if (n_iter < 1 || n < 0 || n >= n_iter) throw std::out_of_range("lambda_schedule: n out of range");
    if (n_iter == 1) return lambda_max;
    if (n == n_iter - 1) return lambda_min;
    return lambda_max + (lambda_min - lambda_max) * (double(n) / double(n_iter - 1));
}

double lambda_schedule(const IterationParams& p, int n) {
    if (!p.lambda_max || !p.lambda_min) throw std::invalid_argument("lambda_schedule: lambda range not resolved");
    return lambda_schedule(*p.lambda_max, *p.lambda_min, p.n_iter, n);
}

void apply_mask(Grid& g, const SamplingMask& mask) {
    if (g.rows != mask.n_t) throw std::invalid_argument("apply_mask: row count mismatch");
    for (int r = 0; r < g.rows; ++r)
        if (!mask.is_measured(r)) std::fill(g.row(r), g.row(r) + g.cols, 0.0);
}

namespace {

double masked_norm2(const Grid& g, const SamplingMask& mask) {
    double s = 0;
    for (int r = 0; r < g.rows; ++r) {
        if (!mask.is_measured(r)) continue;
        const double* p = g.row(r);
        for (int c = 0; c < g.cols; ++c) s += p[c] * p[c];
    }
    return s;
}

double residual_norm(const Grid& y, const Grid& x, const SamplingMask& mask) {
    double s = 0;
    for (int r = 0; r < y.rows; ++r) {
        if (!mask.is_measured(r)) continue;
        for (int c = 0; c < y.cols; ++c) {
            const double d = y(r, c) - x(r, c);
            s += d * d;
        }
    }
    return std::sqrt(s);
}

using Support = std::vector<std::vector<char>>;

Support support_of(const CoefficientStack& c) {
    double mx = 0;
    for (const auto& p : c.planes) mx = std::max(mx, p.max_abs());
    const double tol = 1e-12 * mx;
    Support s(c.planes.size());
    for (std::size_t e = 0; e < c.planes.size(); ++e) {
        s[e].resize(c.planes[e].size());
        for (std::size_t i = 0; i < s[e].size(); ++i) s[e][i] = std::abs(c.planes[e].data[i]) > tol;
    }
    return s;
}

bool support_empty(const Support& s) {
    for (const auto& p : s)
        for (char v : p)
            if (v) return false;
    return true;
}

void check_inputs(const Grid& y, const SamplingMask& mask, const ShearletSystem& sys) {
    if (y.rows != sys.rows || y.cols != sys.cols)
        throw std::invalid_argument("reconstruct: EPI " + std::to_string(y.rows) + "x" + std::to_string(y.cols) +
                                    " does not match system " + std::to_string(sys.rows) + "x" +
                                    std::to_string(sys.cols));
    if (mask.n_t != y.rows) throw std::invalid_argument("reconstruct: mask rows do not match EPI");
}

}  // namespace

double adaptive_alpha(const CoefficientStack& R, const Support* support, const SamplingMask& mask,
                      const ShearletSystem& sys) {
    CoefficientStack beta = R;
    if (support && !support_empty(*support)) {
        for (std::size_t e = 0; e < beta.planes.size(); ++e) {
            auto& d = beta.planes[e].data;
            const auto& s = (*support)[e];
            for (std::size_t i = 0; i < d.size(); ++i)
                if (!s[i]) d[i] = 0.0;
        }
    }
    double num = 0;
    for (const auto& p : beta.planes)
        for (double v : p.data) num += v * v;
    if (num == 0.0) return 1.0;
    const double den = masked_norm2(synthesize(sys, beta), mask);
    if (den == 0.0 || !std::isfinite(den)) return 1.0;
    return num / den;
}

double adaptive_alpha(const Grid& x, const Grid& y, const SamplingMask& mask, const ShearletSystem& sys) {
    check_inputs(y, mask, sys);
    require_same_shape(x, y, "adaptive_alpha");
    Grid r(y.rows, y.cols);
    for (int i = 0; i < y.rows; ++i)
        if (mask.is_measured(i))
            for (int c = 0; c < y.cols; ++c) r(i, c) = y(i, c) - x(i, c);
    const Support s = support_of(analyze(sys, x));
    return adaptive_alpha(analyze(sys, r), &s, mask, sys);
}

Grid lowpass_init(const Grid& y, const SamplingMask& mask, const ShearletSystem& sys) {
    check_inputs(y, mask, sys);
    Grid m(y.rows, y.cols);
    for (int r = 0; r < y.rows; ++r)
        if (mask.is_measured(r)) std::fill(m.row(r), m.row(r) + y.cols, 1.0);
    const auto& fft = sys.fft();
    Spectrum Y = fft.forward(y), M = fft.forward(m);
    const auto& phi = sys.analysis[0];
    for (std::size_t i = 0; i < Y.data.size(); ++i) {
        Y.data[i] *= phi[i];
        M.data[i] *= phi[i];
    }
    const Grid num = fft.inverse(Y), den = fft.inverse(M);
    const double cut = 1e-3 * den.max_abs();
    Grid x(y.rows, y.cols);
    for (std::size_t i = 0; i < x.size(); ++i) x.data[i] = den.data[i] > cut ? num.data[i] / den.data[i] : 0.0;
    return x;
}

ReconResult reconstruct_epi(const Grid& y_in, const SamplingMask& mask, const ShearletSystem& sys,
                            const IterationParams& params, const IterationObserver& observer) {
    check_inputs(y_in, mask, sys);
    params.validate();
    Grid y = y_in;
    apply_mask(y, mask);

    ReconResult res;
    res.x = params.init == InitMode::lowpass ? lowpass_init(y, mask, sys) : Grid(y.rows, y.cols);
    Grid& x = res.x;

    double res0 = residual_norm(y, x, mask);
    if (res0 == 0.0) res0 = std::sqrt(masked_norm2(y, mask));
    const int first = params.threshold_lowpass ? 0 : 1;
    double lam_max = params.lambda_max.value_or(0.0), lam_min = params.lambda_min.value_or(0.0);
    Support kept;
    Grid r(y.rows, y.cols);

    for (int n = 0; n < params.n_iter; ++n) {
        for (int i = 0; i < y.rows; ++i) {
            double* rp = r.row(i);
            if (!mask.is_measured(i)) continue;
            for (int c = 0; c < y.cols; ++c) rp[c] = y(i, c) - x(i, c);
        }
        const CoefficientStack R = analyze(sys, r);
        CoefficientStack c = analyze(sys, x);

        double alpha = params.alpha;
        if (params.adaptive_alpha) {
            if (params.support == SupportRule::analysis) {
                const Support s = support_of(c);
                alpha = adaptive_alpha(R, &s, mask, sys);
            } else {
                alpha = adaptive_alpha(R, kept.empty() ? nullptr : &kept, mask, sys);
            }
        }

        if (n == 0 && (!params.lambda_max || !params.lambda_min)) {
            if (!params.lambda_max) {
                Grid ay = y;
                for (double& v : ay.data) v *= alpha;
                const CoefficientStack cy = analyze(sys, ay);
                double mx = 0;
                for (int e = first; e < sys.eta(); ++e) mx = std::max(mx, cy.planes[e].max_abs());
                lam_max = params.lambda_max_fraction * mx;
            }
            if (!params.lambda_min) lam_min = params.lambda_min_ratio * lam_max;
            lam_min = std::min(lam_min, lam_max);
        }
        const double lam = lambda_schedule(lam_max, lam_min, params.n_iter, n);

        if (params.support == SupportRule::thresholded) kept.assign(sys.eta(), {});
        for (int e = 0; e < sys.eta(); ++e) {
            auto& d = c.planes[e].data;
            const auto& rd = R.planes[e].data;
            for (std::size_t i = 0; i < d.size(); ++i) d[i] += alpha * rd[i];
            if (e >= first)
                for (double& v : d)
                    if (std::abs(v) < lam) v = 0.0;
            if (params.support == SupportRule::thresholded) {
                kept[e].resize(d.size());
                for (std::size_t i = 0; i < d.size(); ++i) kept[e][i] = d[i] != 0.0;
            }
        }
        x = synthesize(sys, c);
        if (params.reimpose_each)
            for (int i : mask.measured_rows) std::copy(y.row(i), y.row(i) + y.cols, x.row(i));

        const double rn = residual_norm(y, x, mask);
        res.iterations = n + 1;
        res.residual = rn;
        if (observer) observer({n, lam, alpha, rn});
        if (!std::isfinite(rn) || (res0 > 0 && rn > 10.0 * res0)) {
            res.diverged = true;
            break;
        }
    }
    for (int i : mask.measured_rows) std::copy(y.row(i), y.row(i) + y.cols, x.row(i));
    return res;
}

}  // namespace epishear
