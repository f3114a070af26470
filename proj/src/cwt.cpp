#include "wavecluster/cwt.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <istream>
#include <numbers>
#include <ostream>

#include <unsupported/Eigen/FFT>

#include "wavecluster/core_data.hpp"
#include "wavecluster/error.hpp"

namespace wavecluster {

ScaleGrid make_scale_grid(int octave_min, int octave_max, int voices) {
    if (octave_min >= octave_max)
        throw InvalidArgument("octave_min must be smaller than octave_max");
    if (voices < 1) throw InvalidArgument("voices per octave must be at least 1");
    ScaleGrid grid;
    grid.voices_per_octave = voices;
    grid.octave_min = octave_min;
    grid.octave_max = octave_max;
    const int count = (octave_max - octave_min) * voices + 1;
    grid.scales.reserve(static_cast<std::size_t>(count));
    for (int m = 0; m < count; ++m)
        grid.scales.push_back(
            std::exp2(octave_min + static_cast<double>(m) / static_cast<double>(voices)));
    return grid;
}

std::complex<double> morlet(double u, double omega0) {
    static const double norm = std::pow(std::numbers::pi, -0.25);
    return norm * std::exp(-0.5 * u * u) * std::polar(1.0, omega0 * u);
}

namespace {

// Beyond |u| = 8.6 the Gaussian envelope is below 1e-16.
constexpr double kMorletSupport = 8.6;

// conj(psi_per((m) / a)) for m = 0..N-1 where psi_per sums every period.
std::vector<std::complex<double>> periodized_kernel(std::size_t n, double scale, double omega0) {
    std::vector<std::complex<double>> kernel(n);
    const double span = kMorletSupport * scale;
    const double period = static_cast<double>(n);
    const long wraps = static_cast<long>(std::ceil(span / period)) + 1;
    for (std::size_t m = 0; m < n; ++m) {
        std::complex<double> acc = 0.0;
        for (long r = -wraps; r <= wraps; ++r) {
            const double offset = static_cast<double>(m) + static_cast<double>(r) * period;
            if (std::abs(offset) > span) continue;
            acc += std::conj(morlet(offset / scale, omega0));
        }
        kernel[m] = acc;
    }
    return kernel;
}

std::size_t round_to_odd(double width) {
    // nearest odd integer, minimum 1
    const double k = std::round((width - 1.0) / 2.0);
    return k <= 0.0 ? 1 : 2 * static_cast<std::size_t>(k) + 1;
}

struct Tap {
    std::size_t offset;
    double weight;
};

// Gaussian weights over circular offsets 0..N-1, truncated where the
// envelope drops below 1e-16 and renormalized to unit sum.
std::vector<Tap> circular_gaussian(std::size_t n, double sigma) {
    std::vector<Tap> taps;
    double total = 0.0;
    for (std::size_t m = 0; m < n; ++m) {
        const double d = static_cast<double>(std::min(m, n - m));
        if (d > kMorletSupport * sigma) continue;
        const double w = std::exp(-0.5 * d * d / (sigma * sigma));
        taps.push_back({m, w});
        total += w;
    }
    for (auto& t : taps) t.weight /= total;
    return taps;
}

// Half-sample symmetric reflection into [0, n).
std::size_t reflect_index(long i, long n) {
    const long period = 2 * n;
    long r = i % period;
    if (r < 0) r += period;
    return static_cast<std::size_t>(r < n ? r : period - 1 - r);
}

void check_rows(Eigen::Index rows, const ScaleGrid& grid) {
    if (static_cast<std::size_t>(rows) != grid.size())
        throw InvalidArgument("field has " + std::to_string(rows) + " rows but the grid has " +
                              std::to_string(grid.size()) + " scales");
}

// Transforms of the circular Gaussians for every scale of a grid. Pairwise
// measures smooth thousands of fields on one grid, so the last set is kept
// per thread; a rebuilt set is identical, so caching cannot change results.
const std::vector<std::vector<std::complex<double>>>& gaussian_spectra(std::size_t n, const ScaleGrid& grid,
                                                                       const SmoothingOptions& options) {
    struct Cache {
        std::size_t n = 0;
        double time_factor = 0.0;
        std::vector<double> scales;
        std::vector<std::vector<std::complex<double>>> spectra;
    };
    thread_local Cache cache;
    if (cache.n == n && cache.time_factor == options.time_factor && cache.scales == grid.scales)
        return cache.spectra;
    Eigen::FFT<double> fft;
    std::vector<std::complex<double>> kernel(n);
    cache.spectra.assign(grid.size(), {});
    for (std::size_t j = 0; j < grid.size(); ++j) {
        std::fill(kernel.begin(), kernel.end(), std::complex<double>{});
        for (const auto& t : circular_gaussian(n, options.time_factor * grid.scales[j])) kernel[t.offset] = t.weight;
        fft.fwd(cache.spectra[j], kernel);
    }
    cache.n = n;
    cache.time_factor = options.time_factor;
    cache.scales = grid.scales;
    return cache.spectra;
}

// Circular correlation of every row with its scale's Gaussian, computed in
// the frequency domain. Real fields take the same route (with a zero
// imaginary part), so the real and complex smoothers agree bit for bit.
ComplexMatrix smooth_time(const ComplexMatrix& field, const ScaleGrid& grid, const SmoothingOptions& options) {
    const auto n = static_cast<std::size_t>(field.cols());
    const auto& spectra = gaussian_spectra(n, grid, options);
    Eigen::FFT<double> fft;
    std::vector<std::complex<double>> row(n), row_spec, back;
    ComplexMatrix out(field.rows(), field.cols());
    for (Eigen::Index j = 0; j < field.rows(); ++j) {
        const auto& kernel_spec = spectra[static_cast<std::size_t>(j)];
        for (std::size_t k = 0; k < n; ++k) row[k] = field(j, static_cast<Eigen::Index>(k));
        fft.fwd(row_spec, row);
        for (std::size_t k = 0; k < n; ++k) row_spec[k] *= std::conj(kernel_spec[k]);
        fft.inv(back, row_spec);
        for (std::size_t k = 0; k < n; ++k) out(j, static_cast<Eigen::Index>(k)) = back[k];
    }
    return out;
}

// Boxcar across scales with half-sample symmetric reflection at the ends.
template <typename Matrix>
Matrix smooth_scale(Matrix time_smoothed, const ScaleGrid& grid, const SmoothingOptions& options) {
    using Scalar = typename Matrix::Scalar;
    const Eigen::Index rows = time_smoothed.rows();
    const Eigen::Index cols = time_smoothed.cols();
    const auto width = static_cast<long>(scale_window_rows(grid, options));
    if (width == 1) return time_smoothed;
    const long half = width / 2;
    const double weight = 1.0 / static_cast<double>(width);
    Matrix out(rows, cols);
    for (Eigen::Index j = 0; j < rows; ++j) {
        for (Eigen::Index k = 0; k < cols; ++k) {
            Scalar acc{};
            for (long o = -half; o <= half; ++o)
                acc += time_smoothed(static_cast<Eigen::Index>(reflect_index(j + o, rows)), k);
            out(j, k) = weight * acc;
        }
    }
    return out;
}

}  // namespace

Spectrum cwt_morlet(std::span<const double> curve, const ScaleGrid& grid, const CwtOptions& options) {
    const std::size_t n = curve.size();
    if (n < 8) throw InvalidArgument("CWT needs at least 8 samples, got " + std::to_string(n));
    if (grid.scales.empty()) throw InvalidArgument("empty scale grid");
    if (grid.scales.front() < 1.0)
        throw InvalidArgument("smallest scale must be at least one sample");

    Spectrum out;
    out.grid = grid;
    out.omega0 = options.omega0;
    out.normalization = options.normalization;
    out.values.resize(static_cast<Eigen::Index>(grid.size()), static_cast<Eigen::Index>(n));
    out.cone_warning.assign(grid.size(), false);

    Eigen::FFT<double> fft;
    std::vector<std::complex<double>> signal(curve.begin(), curve.end());
    std::vector<std::complex<double>> curve_spec, kernel_spec, product(n), back;
    fft.fwd(curve_spec, signal);
    for (std::size_t j = 0; j < grid.size(); ++j) {
        const double a = grid.scales[j];
        out.cone_warning[j] = a > static_cast<double>(n) / 2.0;
        const double prefactor =
            options.normalization == CwtNormalization::L1 ? 1.0 / a : 1.0 / std::sqrt(a);
        // W[k] = sum_m x[(k + m) mod N] psi[m]: a circular correlation, so
        // its transform is X times the conjugated transform of conj(psi).
        auto kernel = periodized_kernel(n, a, options.omega0);
        for (auto& v : kernel) v = std::conj(v);
        fft.fwd(kernel_spec, kernel);
        for (std::size_t k = 0; k < n; ++k) product[k] = curve_spec[k] * std::conj(kernel_spec[k]);
        fft.inv(back, product);
        for (std::size_t k = 0; k < n; ++k)
            out.values(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k)) = prefactor * back[k];
    }
    return out;
}

std::size_t scale_window_rows(const ScaleGrid& grid, const SmoothingOptions& options) {
    return round_to_odd(options.scale_factor * grid.voices_per_octave);
}

ComplexMatrix smooth_spectrum(const ComplexMatrix& field, const ScaleGrid& grid,
                              const SmoothingOptions& options) {
    check_rows(field.rows(), grid);
    return smooth_scale(smooth_time(field, grid, options), grid, options);
}

Eigen::MatrixXd smooth_spectrum(const Eigen::MatrixXd& field, const ScaleGrid& grid,
                                const SmoothingOptions& options) {
    check_rows(field.rows(), grid);
    const ComplexMatrix as_complex = field.cast<std::complex<double>>();
    return smooth_scale(Eigen::MatrixXd(smooth_time(as_complex, grid, options).real()), grid, options);
}

namespace {

template <typename T>
void put_le(std::ostream& out, T value) {
    static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);
    unsigned char bytes[sizeof(T)];
    std::memcpy(bytes, &value, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
    out.write(reinterpret_cast<const char*>(bytes), sizeof(T));
}

template <typename T>
T get_le(std::istream& in) {
    unsigned char bytes[sizeof(T)];
    if (!in.read(reinterpret_cast<char*>(bytes), sizeof(T)))
        throw DataError("binary matrix is truncated");
    if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
    T value;
    std::memcpy(&value, bytes, sizeof(T));
    return value;
}

}  // namespace

void write_spectrum_binary(std::ostream& out, const ComplexMatrix& values) {
    put_le<std::int32_t>(out, static_cast<std::int32_t>(values.rows()));
    put_le<std::int32_t>(out, static_cast<std::int32_t>(values.cols()));
    for (Eigen::Index r = 0; r < values.rows(); ++r)
        for (Eigen::Index c = 0; c < values.cols(); ++c) {
            put_le<double>(out, values(r, c).real());
            put_le<double>(out, values(r, c).imag());
        }
}

ComplexMatrix read_spectrum_binary(std::istream& in) {
    const auto rows = get_le<std::int32_t>(in);
    const auto cols = get_le<std::int32_t>(in);
    if (rows < 0 || cols < 0) throw DataError("binary matrix has negative dimensions");
    ComplexMatrix values(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r)
        for (Eigen::Index c = 0; c < cols; ++c) {
            const double re = get_le<double>(in);
            const double im = get_le<double>(in);
            values(r, c) = {re, im};
        }
    return values;
}

void write_spectrum_magnitude_csv(std::ostream& out, const Spectrum& spectrum) {
    out << "scale";
    for (Eigen::Index k = 0; k < spectrum.length(); ++k) out << ",t" << k;
    out << '\n';
    for (Eigen::Index j = 0; j < spectrum.scales(); ++j) {
        out << format_double(spectrum.grid.scales[static_cast<std::size_t>(j)]);
        for (Eigen::Index k = 0; k < spectrum.length(); ++k)
            out << ',' << format_double(std::abs(spectrum.values(j, k)));
        out << '\n';
    }
}

}  // namespace wavecluster
