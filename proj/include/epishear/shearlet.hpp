#pragma once

#include <memory>
#include <stdexcept>
#include <utility>
#include <vector>

#include "epishear/fft.hpp"
#include "epishear/filterbank.hpp"
#include "epishear/grid.hpp"

namespace epishear {

// How the frame function (and so the duals) is accumulated.
enum class Normalization {
    used_elements,  // exactly the elements in the system: S* S = I
    full_cone,      // both cones, all shears |k| <= 2^{j+1}, as in the original construction
};

struct ShearletConfig {
    FilterPair1D base = default_filter_pair();
    int fan_order = 3;
    Normalization norm = Normalization::used_elements;
    // duals divide by max(frame, dual_floor); 0 is the plain inverse.
    // S* S = I wherever the frame function reaches the floor
    double dual_floor = 0;
};

// what the light field drivers use unless told otherwise: plain 9/7 pair,
// used-element frame function clamped at 0.3
ShearletConfig reconstruction_config();

struct ElementIndex {
    int j = -1;  // -1 marks the low-pass element
    int k = 0;
    bool lowpass() const { return j < 0; }
    bool operator==(const ElementIndex&) const = default;
};

class SingularSystem : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// 1 + sum_{j<J} (2^{j+1} + 1)
int element_count(int scales);
std::vector<ElementIndex> element_list(int scales);

// Frequency responses are real and even, so everything is stored on the
// r2c half grid: rows x (cols/2 + 1). Row frequencies are xi2 (t axis),
// column frequencies xi1 (v axis).
class ShearletSystem {
public:
    int rows = 0, cols = 0, scales = 0;
    Normalization norm = Normalization::used_elements;
    std::vector<ElementIndex> elements;
    std::vector<std::vector<double>> analysis;
    std::vector<std::vector<double>> dual;
    std::vector<double> frame;

    int eta() const { return int(elements.size()); }
    int half_cols() const { return cols / 2 + 1; }
    std::size_t half_size() const { return std::size_t(rows) * half_cols(); }
    const Fft2& fft() const;

    // derived from `analysis` and `frame`; also used after cache loads
    void finalize();

private:
    std::shared_ptr<const Fft2> fft_;
};

ShearletSystem build_system(int rows, int cols, int scales, const ShearletConfig& cfg = {});

// min / max of the frame function
std::pair<double, double> frame_bounds(const ShearletSystem& sys);

struct CoefficientStack {
    int rows = 0, cols = 0;
    std::vector<Grid> planes;
};

// OpenMP over elements; results are bit-identical to the serial versions
CoefficientStack analyze(const ShearletSystem& sys, const Grid& epi);
Grid synthesize(const ShearletSystem& sys, const CoefficientStack& coeffs);
CoefficientStack analyze_serial(const ShearletSystem& sys, const Grid& epi);
Grid synthesize_serial(const ShearletSystem& sys, const CoefficientStack& coeffs);

// spatial filter of one element (inverse DFT of its analysis response)
Grid element_filter(const ShearletSystem& sys, int index);
Grid dual_filter(const ShearletSystem& sys, int index);

// out(t, v) = in(t, v - s t) with s = k / 2^j, band-limited along v.
// digital_shear applies the phase ramp per row; digital_shear_refined is the
// literal chain: upsample by 2^j, ideal low-pass at pi/2^j, integer shift of
// k*t on the refined grid, low-pass again, downsample.
Grid digital_shear(const Grid& img, int k, int j);
Grid digital_shear_refined(const Grid& img, int k, int j);

}  // namespace epishear
