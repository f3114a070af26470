#include "wavecluster/core_data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <string_view>

#include "wavecluster/error.hpp"

namespace wavecluster {

void SampledSignal::validate() const {
    if (values.empty()) throw InvalidArgument("signal is empty");
    if (!(sampling_step > 0.0) || !std::isfinite(sampling_step))
        throw InvalidArgument("sampling_step must be a positive finite number");
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (!std::isfinite(values[i]))
            throw InvalidArgument("signal value at index " + std::to_string(i) + " is not finite");
    }
}

void FunctionalDataset::validate() const {
    if (curves.empty()) throw InvalidArgument("dataset has no curves");
    const std::size_t n = curves.front().size();
    if (n < 2) throw InvalidArgument("curves must have at least 2 samples");
    for (std::size_t i = 0; i < curves.size(); ++i) {
        if (curves[i].size() != n)
            throw InvalidArgument("curve " + std::to_string(i) + " has length " +
                                  std::to_string(curves[i].size()) + ", expected " +
                                  std::to_string(n));
        for (double v : curves[i])
            if (!std::isfinite(v))
                throw InvalidArgument("curve " + std::to_string(i) + " has a non-finite value");
    }
    if (!origin_index.empty() && origin_index.size() != curves.size())
        throw InvalidArgument("origin_index size does not match curve count");
}

SliceResult slice_series(const SampledSignal& signal, std::size_t delta) {
    signal.validate();
    if (delta < 2) throw InvalidArgument("delta must be at least 2");
    if (delta > signal.values.size())
        throw InvalidArgument("delta (" + std::to_string(delta) + ") exceeds signal length (" +
                              std::to_string(signal.values.size()) + ")");
    const std::size_t count = signal.values.size() / delta;
    SliceResult out;
    out.remainder = signal.values.size() - count * delta;
    out.dataset.segment_length = delta;
    out.dataset.curves.reserve(count);
    out.dataset.origin_index.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        auto first = signal.values.begin() + static_cast<std::ptrdiff_t>(i * delta);
        out.dataset.curves.emplace_back(first, first + static_cast<std::ptrdiff_t>(delta));
        out.dataset.origin_index.push_back(i * delta);
    }
    return out;
}

bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

std::optional<unsigned> exact_log2(std::size_t n) {
    if (!is_power_of_two(n)) return std::nullopt;
    unsigned j = 0;
    while ((std::size_t{1} << j) < n) ++j;
    return j;
}

NaturalCubicSpline::NaturalCubicSpline(std::span<const double> samples)
    : y_(samples.begin(), samples.end()), second_(samples.size(), 0.0) {
    const std::size_t n = y_.size();
    if (n < 4) throw InvalidArgument("cubic spline needs at least 4 samples");
    h_ = 1.0 / static_cast<double>(n - 1);
    // Thomas algorithm on the interior equations
    //   M[i-1] + 4 M[i] + M[i+1] = 6 (y[i-1] - 2 y[i] + y[i+1]) / h^2,  M[0] = M[n-1] = 0.
    const std::size_t m = n - 2;
    std::vector<double> diag(m, 4.0), rhs(m);
    for (std::size_t i = 0; i < m; ++i)
        rhs[i] = 6.0 * (y_[i] - 2.0 * y_[i + 1] + y_[i + 2]) / (h_ * h_);
    for (std::size_t i = 1; i < m; ++i) {
        const double w = 1.0 / diag[i - 1];
        diag[i] -= w;
        rhs[i] -= w * rhs[i - 1];
    }
    second_[m] = rhs[m - 1] / diag[m - 1];
    for (std::size_t i = m - 1; i-- > 0;)
        second_[i + 1] = (rhs[i] - second_[i + 2]) / diag[i];
}

double NaturalCubicSpline::operator()(double x) const {
    const std::size_t n = y_.size();
    x = std::clamp(x, 0.0, 1.0);
    std::size_t k = static_cast<std::size_t>(x / h_);
    if (k >= n - 1) k = n - 2;
    const double left = static_cast<double>(k) * h_;
    const double a = (left + h_ - x) / h_;
    const double b = 1.0 - a;
    return a * y_[k] + b * y_[k + 1] +
           ((a * a * a - a) * second_[k] + (b * b * b - b) * second_[k + 1]) * (h_ * h_) / 6.0;
}

ResampleResult resample_dyadic(std::span<const double> curve, unsigned levels) {
    if (curve.size() < 4)
        throw InvalidArgument("resample_dyadic needs at least 4 samples, got " +
                              std::to_string(curve.size()));
    if (levels == 0 || levels > 30) throw InvalidArgument("levels must be in [1, 30]");
    const std::size_t target = std::size_t{1} << levels;
    ResampleResult out;
    out.downsampled = target < curve.size();
    if (target == curve.size()) {
        out.values.assign(curve.begin(), curve.end());
        return out;
    }
    NaturalCubicSpline spline(curve);
    out.values.resize(target);
    const double step = 1.0 / static_cast<double>(target - 1);
    for (std::size_t i = 0; i < target; ++i)
        out.values[i] = spline(static_cast<double>(i) * step);
    return out;
}

// ---- CSV ----------------------------------------------------------------

std::string format_double(double value) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, value);
    if (ec != std::errc{}) throw DataError("cannot format number");
    return std::string(buf, end);
}

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
        s.remove_suffix(1);
    return s;
}

std::optional<double> parse_number(std::string_view field) {
    field = trim(field);
    if (field.empty()) return std::nullopt;
    if (field.front() == '+') field.remove_prefix(1);
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    if (ec != std::errc{} || ptr != field.data() + field.size()) return std::nullopt;
    return v;
}

std::vector<std::string_view> split(std::string_view line, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (;;) {
        const std::size_t pos = line.find(sep, start);
        if (pos == std::string_view::npos) {
            out.push_back(line.substr(start));
            return out;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
}

// Parses every field of a row; nullopt when any field is non-numeric.
std::optional<std::vector<double>> parse_row(std::string_view line) {
    std::vector<double> row;
    for (auto field : split(line, ',')) {
        auto v = parse_number(field);
        if (!v) return std::nullopt;
        row.push_back(*v);
    }
    return row;
}

bool skippable(std::string_view line) {
    line = trim(line);
    return line.empty() || line.front() == '#';
}

}  // namespace

SampledSignal read_signal_csv(std::istream& in, double sampling_step) {
    SampledSignal signal;
    signal.sampling_step = sampling_step;
    std::string line;
    std::size_t line_no = 0;
    bool first_data_line = true;
    while (std::getline(in, line)) {
        ++line_no;
        if (skippable(line)) continue;
        auto fields = split(line, ',');
        auto v = parse_number(fields.front());
        if (!v) {
            if (first_data_line) {
                first_data_line = false;
                continue;
            }
            throw DataError("line " + std::to_string(line_no) + ": not a number: '" +
                            std::string(trim(fields.front())) + "'");
        }
        first_data_line = false;
        signal.values.push_back(*v);
    }
    if (signal.values.empty()) throw DataError("signal CSV has no numeric rows");
    return signal;
}

FunctionalDataset read_dataset_csv(std::istream& in) {
    FunctionalDataset ds;
    std::string line;
    std::size_t line_no = 0;
    bool first_data_line = true;
    while (std::getline(in, line)) {
        ++line_no;
        if (skippable(line)) continue;
        auto row = parse_row(line);
        if (!row) {
            if (first_data_line) {
                first_data_line = false;
                continue;
            }
            throw DataError("line " + std::to_string(line_no) + ": non-numeric field");
        }
        first_data_line = false;
        if (!ds.curves.empty() && row->size() != ds.curves.front().size())
            throw DataError("line " + std::to_string(line_no) + ": expected " +
                            std::to_string(ds.curves.front().size()) + " fields, got " +
                            std::to_string(row->size()));
        ds.curves.push_back(std::move(*row));
    }
    if (ds.curves.empty()) throw DataError("dataset CSV has no numeric rows");
    ds.segment_length = ds.curves.front().size();
    return ds;
}

void write_dataset_csv(std::ostream& out, const FunctionalDataset& dataset) {
    for (const auto& curve : dataset.curves) {
        for (std::size_t i = 0; i < curve.size(); ++i) {
            if (i) out << ',';
            out << format_double(curve[i]);
        }
        out << '\n';
    }
}

void write_labels_csv(std::ostream& out, std::span<const int> labels) {
    out << "id,label\n";
    for (std::size_t i = 0; i < labels.size(); ++i) out << i << ',' << labels[i] << '\n';
}

std::vector<int> read_labels_csv(std::istream& in) {
    std::vector<int> labels;
    std::string line;
    std::size_t line_no = 0;
    bool first_data_line = true;
    while (std::getline(in, line)) {
        ++line_no;
        if (skippable(line)) continue;
        auto row = parse_row(line);
        if (!row) {
            if (first_data_line) {
                first_data_line = false;
                continue;
            }
            throw DataError("line " + std::to_string(line_no) + ": non-numeric label row");
        }
        first_data_line = false;
        const double v = row->size() >= 2 ? (*row)[1] : row->front();  // id,label[,...]
        if (v != std::floor(v)) throw DataError("line " + std::to_string(line_no) + ": label is not an integer");
        labels.push_back(static_cast<int>(v));
    }
    return labels;
}

}  // namespace wavecluster
