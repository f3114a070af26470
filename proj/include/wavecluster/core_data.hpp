#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace wavecluster {

// A long equispaced signal X(t) observed every `sampling_step` time units.
struct SampledSignal {
    std::vector<double> values;
    double sampling_step = 1.0;

    // Throws InvalidArgument when empty, non-finite, or step <= 0.
    void validate() const;
};

// Equal-length curves Z_1..Z_n. `origin_index[i]` is the position of the
// first sample of curve i in the source signal, when the curves were sliced.
struct FunctionalDataset {
    std::vector<std::vector<double>> curves;
    std::size_t segment_length = 0;
    std::vector<std::size_t> origin_index;

    std::size_t size() const { return curves.size(); }
    std::size_t length() const { return curves.empty() ? 0 : curves.front().size(); }

    void validate() const;
};

struct SliceResult {
    FunctionalDataset dataset;
    std::size_t remainder = 0;  // trailing samples dropped (< delta)
};

// Cuts the signal into floor(len / delta) contiguous non-overlapping curves.
SliceResult slice_series(const SampledSignal& signal, std::size_t delta);

struct ResampleResult {
    std::vector<double> values;
    bool downsampled = false;
};

// Natural cubic spline through the samples at abscissae i/(N-1), evaluated
// on 2^levels equispaced points of [0, 1].
ResampleResult resample_dyadic(std::span<const double> curve, unsigned levels);

// Natural cubic spline on equispaced knots over [0, 1]. Exposed for reuse by
// the resampler tests.
class NaturalCubicSpline {
public:
    explicit NaturalCubicSpline(std::span<const double> samples);
    double operator()(double x) const;

private:
    std::vector<double> y_;
    std::vector<double> second_;  // second derivatives at the knots
    double h_ = 0.0;
};

bool is_power_of_two(std::size_t n);
// log2(n) for exact powers of two; nullopt otherwise.
std::optional<unsigned> exact_log2(std::size_t n);

// ---- CSV ----------------------------------------------------------------

// Reads a single-column signal (a header line is skipped when non-numeric).
SampledSignal read_signal_csv(std::istream& in, double sampling_step = 1.0);
// One curve per row; an optional non-numeric header row is skipped.
FunctionalDataset read_dataset_csv(std::istream& in);
void write_dataset_csv(std::ostream& out, const FunctionalDataset& dataset);

void write_labels_csv(std::ostream& out, std::span<const int> labels);
std::vector<int> read_labels_csv(std::istream& in);

// Shortest decimal text that parses back to the same double, always with
// '.' as decimal point.
std::string format_double(double value);

}  // namespace wavecluster
