#pragma once

#include <complex>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace wavecluster {

// Scales 2^{o_min + m / voices}, m = 0..(o_max - o_min) * voices, in samples.
struct ScaleGrid {
    std::vector<double> scales;
    int voices_per_octave = 8;
    int octave_min = 1;
    int octave_max = 6;

    std::size_t size() const { return scales.size(); }
    bool operator==(const ScaleGrid&) const = default;
};

ScaleGrid make_scale_grid(int octave_min, int octave_max, int voices);

enum class CwtNormalization {
    L1,  // prefactor 1/a
    L2,  // prefactor 1/sqrt(a), unit-energy wavelets
};

constexpr double kMorletOmega0 = 6.0;

// psi(u) = pi^{-1/4} exp(i w0 u) exp(-u^2 / 2)
std::complex<double> morlet(double u, double omega0 = kMorletOmega0);

using ComplexMatrix = Eigen::MatrixXcd;

// Rows are scales, columns are time positions.
struct Spectrum {
    ComplexMatrix values;
    ScaleGrid grid;
    double omega0 = kMorletOmega0;
    CwtNormalization normalization = CwtNormalization::L1;
    // Rows whose scale exceeds N/2 samples: dominated by wrap-around.
    std::vector<bool> cone_warning;

    Eigen::Index scales() const { return values.rows(); }
    Eigen::Index length() const { return values.cols(); }
};

struct CwtOptions {
    double omega0 = kMorletOmega0;
    CwtNormalization normalization = CwtNormalization::L1;
};

// W(k, j) = a_j^{-p} sum_i z_i psi*((i - k) / a_j) with the curve extended
// periodically, i.e. circular correlation against the periodized wavelet.
Spectrum cwt_morlet(std::span<const double> curve, const ScaleGrid& grid,
                    const CwtOptions& options = {});

// Time/scale smoothing: Gaussian of standard deviation time_factor * a_j
// samples along each row (circular), then a boxcar of
// round_odd(scale_factor * voices) rows down each column. Both kernels sum
// to one; the scale direction uses half-sample symmetric reflection at the
// ends of the grid.
struct SmoothingOptions {
    double time_factor = 1.0;
    double scale_factor = 0.6;
};

std::size_t scale_window_rows(const ScaleGrid& grid, const SmoothingOptions& options = {});

ComplexMatrix smooth_spectrum(const ComplexMatrix& field, const ScaleGrid& grid,
                              const SmoothingOptions& options = {});
Eigen::MatrixXd smooth_spectrum(const Eigen::MatrixXd& field, const ScaleGrid& grid,
                                const SmoothingOptions& options = {});

// Binary layout: int32 rows, int32 cols, then rows*cols (re, im) pairs of
// little-endian float64 in row-major order.
void write_spectrum_binary(std::ostream& out, const ComplexMatrix& values);
ComplexMatrix read_spectrum_binary(std::istream& in);
// |W| as CSV, one scale per row, scale value in the first column.
void write_spectrum_magnitude_csv(std::ostream& out, const Spectrum& spectrum);

}  // namespace wavecluster
