#include "wavecluster/dissimilarity.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <istream>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>

#include "wavecluster/error.hpp"
#include "wavecluster/parallel.hpp"

namespace wavecluster {

namespace {

constexpr double kTinyPower = 1e-300;

void require_same_grid(const Spectrum& wz, const Spectrum& wx) {
    if (!(wz.grid == wx.grid) || wz.values.rows() != wx.values.rows() ||
        wz.values.cols() != wx.values.cols())
        throw InvalidArgument("spectra are on different scale grids or lengths");
}

ComplexMatrix cross_spectrum(const Spectrum& wz, const Spectrum& wx) {
    return wz.values.cwiseProduct(wx.values.conjugate());
}

Eigen::MatrixXd power(const Spectrum& w) { return w.values.cwiseAbs2(); }

// Per-row sums of moduli in one fixed summation order, shared by the cross
// and power terms so that a self-pair gives WER^2 = 1 exactly.
template <typename Matrix>
Eigen::VectorXd abs_row_sums(const Matrix& m) {
    Eigen::VectorXd out(m.rows());
    for (Eigen::Index j = 0; j < m.rows(); ++j) {
        double acc = 0.0;
        for (Eigen::Index k = 0; k < m.cols(); ++k) acc += std::abs(m(j, k));
        out(j) = acc;
    }
    return out;
}

}  // namespace

std::string to_string(Measure m) {
    switch (m) {
        case Measure::WER: return "WER";
        case Measure::MCA: return "MCA";
        case Measure::EuclidFeatures: return "euclid-features";
        case Measure::EuclidRaw: return "euclid-raw";
    }
    return "?";
}

Measure measure_from_string(const std::string& s) {
    std::string lower;
    for (char c : s) lower.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    if (lower == "wer") return Measure::WER;
    if (lower == "mca") return Measure::MCA;
    if (lower == "euclid-features") return Measure::EuclidFeatures;
    if (lower == "euclid-raw") return Measure::EuclidRaw;
    throw InvalidArgument("unknown measure '" + s + "' (expected wer, mca, euclid-features or euclid-raw)");
}

void DissimilarityMatrix::validate() const {
    if (values.rows() != values.cols()) throw InvalidArgument("dissimilarity matrix is not square");
    for (Eigen::Index i = 0; i < values.rows(); ++i) {
        if (values(i, i) != 0.0)
            throw InvalidArgument("dissimilarity diagonal entry " + std::to_string(i) + " is not zero");
        for (Eigen::Index j = 0; j < values.cols(); ++j) {
            const double v = values(i, j);
            if (!std::isfinite(v) || v < 0.0)
                throw InvalidArgument("dissimilarity entry (" + std::to_string(i) + "," +
                                      std::to_string(j) + ") is negative or not finite");
            if (std::abs(v - values(j, i)) > 1e-9)
                throw InvalidArgument("dissimilarity matrix is not symmetric at (" +
                                      std::to_string(i) + "," + std::to_string(j) + ")");
        }
    }
}

CoherenceField wavelet_coherence(const Spectrum& wz, const Spectrum& wx,
                                 const SmoothingOptions& smoothing) {
    require_same_grid(wz, wx);
    const ComplexMatrix cross = smooth_spectrum(cross_spectrum(wz, wx), wz.grid, smoothing);
    const Eigen::MatrixXd pz = smooth_spectrum(power(wz), wz.grid, smoothing);
    const Eigen::MatrixXd px = smooth_spectrum(power(wx), wx.grid, smoothing);

    CoherenceField out;
    out.grid = wz.grid;
    out.values.resize(cross.rows(), cross.cols());
    for (Eigen::Index j = 0; j < cross.rows(); ++j) {
        for (Eigen::Index k = 0; k < cross.cols(); ++k) {
            const double a = std::abs(pz(j, k));
            const double b = std::abs(px(j, k));
            double r = 0.0;
            if (a >= kTinyPower && b >= kTinyPower)
                r = std::abs(cross(j, k)) / (std::sqrt(a) * std::sqrt(b));
            out.max_before_clip = std::max(out.max_before_clip, r);
            out.values(j, k) = std::clamp(r, 0.0, 1.0);
        }
    }
    return out;
}

Eigen::VectorXd scale_coherence(const Spectrum& wz, const Spectrum& wx,
                                const SmoothingOptions& smoothing) {
    require_same_grid(wz, wx);
    const ComplexMatrix cross = smooth_spectrum(cross_spectrum(wz, wx), wz.grid, smoothing);
    const Eigen::VectorXd pz = smoothed_power_sums(wz, smoothing);
    const Eigen::VectorXd px = smoothed_power_sums(wx, smoothing);
    Eigen::VectorXd out(cross.rows());
    for (Eigen::Index j = 0; j < cross.rows(); ++j) {
        const double den = pz(j) * px(j);
        out(j) = den > 0.0 ? cross.row(j).cwiseAbs2().sum() / den : 0.0;
    }
    return out;
}

Eigen::VectorXd smoothed_power_sums(const Spectrum& w, const SmoothingOptions& smoothing) {
    return abs_row_sums(smooth_spectrum(power(w), w.grid, smoothing));
}

double wer_distance(const Spectrum& wz, const Spectrum& wx, const SmoothingOptions& smoothing) {
    return wer_distance(wz, wx, smoothed_power_sums(wz, smoothing),
                        smoothed_power_sums(wx, smoothing), smoothing);
}

double wer_distance(const Spectrum& wz, const Spectrum& wx, const Eigen::VectorXd& power_z,
                    const Eigen::VectorXd& power_x, const SmoothingOptions& smoothing) {
    require_same_grid(wz, wx);
    const ComplexMatrix cross = smooth_spectrum(cross_spectrum(wz, wx), wz.grid, smoothing);
    const Eigen::VectorXd sums = abs_row_sums(cross);
    double numerator = 0.0;
    double denominator = 0.0;
    for (Eigen::Index j = 0; j < cross.rows(); ++j) {
        const double s = sums(j);
        numerator += s * s;
        denominator += power_z(j) * power_x(j);
    }
    if (!(denominator > 0.0))
        throw DegenerateInput("WER distance undefined: a spectrum has zero power");
    const double wer2 = std::min(1.0, numerator / denominator);
    const double cells = static_cast<double>(cross.rows()) * static_cast<double>(cross.cols());
    return std::sqrt(cells * std::max(0.0, 1.0 - wer2));
}

McaResult mca_analysis(const Spectrum& wz, const Spectrum& wx, double theta) {
    if (!(theta > 0.0 && theta <= 1.0)) throw InvalidArgument("theta must lie in (0, 1]");
    require_same_grid(wz, wx);

    const ComplexMatrix q = wz.values * wx.values.adjoint();
    Eigen::BDCSVD<ComplexMatrix> svd(q, Eigen::ComputeFullU | Eigen::ComputeFullV);

    McaResult out;
    out.theta = theta;
    out.singular_values = svd.singularValues();
    out.u = svd.matrixU();
    out.v = svd.matrixV();
    out.frobenius_sq = q.squaredNorm();

    const double total = out.singular_values.squaredNorm();
    if (!(total > 0.0)) throw DegenerateInput("MCA undefined: cross-covariance matrix is zero");

    // Phase convention: the largest-modulus entry of u_j is real positive;
    // v_j gets the same rotation so that u_j lambda_j v_j^H is unchanged.
    for (Eigen::Index j = 0; j < out.u.cols(); ++j) {
        Eigen::Index arg = 0;
        double best = -1.0;
        for (Eigen::Index i = 0; i < out.u.rows(); ++i) {
            const double m = std::abs(out.u(i, j));
            if (m > best) {
                best = m;
                arg = i;
            }
        }
        if (best <= 0.0) continue;
        const std::complex<double> phase = std::conj(out.u(arg, j)) / best;
        out.u.col(j) *= phase;
        out.v.col(j) *= phase;
        out.u(arg, j) = best;
    }

    double cumulative = 0.0;
    Eigen::Index retained = 0;
    while (retained < out.singular_values.size()) {
        const double l = out.singular_values(retained);
        cumulative += l * l;
        ++retained;
        if (cumulative >= theta * total * (1.0 - 1e-12)) break;
    }
    out.retained = retained;

    out.patterns_z = out.u.leftCols(retained).adjoint() * wz.values;
    out.patterns_x = out.v.leftCols(retained).adjoint() * wx.values;
    const Eigen::Index n = wz.values.cols();
    const ComplexMatrix diff = out.patterns_z - out.patterns_x;
    const ComplexMatrix increments = diff.rightCols(n - 1) - diff.leftCols(n - 1);

    out.direction_distances.resize(retained);
    double weighted = 0.0;
    double weights = 0.0;
    for (Eigen::Index j = 0; j < retained; ++j) {
        const double dj = increments.row(j).norm();
        const double w = out.singular_values(j) * out.singular_values(j);
        out.direction_distances(j) = dj;
        weighted += w * dj * dj;
        weights += w;
    }
    out.distance = weighted / weights;
    return out;
}

double mca_distance(const Spectrum& wz, const Spectrum& wx, double theta) {
    return mca_analysis(wz, wx, theta).distance;
}

DissimilarityMatrix euclidean_dissimilarity(const Eigen::MatrixXd& rows, Measure tag) {
    const Eigen::Index n = rows.rows();
    DissimilarityMatrix out;
    out.measure = tag;
    out.values = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = i + 1; j < n; ++j) {
            const double d = (rows.row(i) - rows.row(j)).norm();
            out.values(i, j) = d;
            out.values(j, i) = d;
        }
    return out;
}

DissimilarityMatrix build_dissimilarity_matrix(const FunctionalDataset& dataset, Measure measure,
                                               const DissimilarityConfig& config) {
    dataset.validate();
    const std::size_t n = dataset.size();
    if (n < 2) throw InvalidArgument("need at least 2 curves for a dissimilarity matrix");

    if (measure == Measure::EuclidRaw) {
        Eigen::MatrixXd rows(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(dataset.length()));
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t t = 0; t < dataset.length(); ++t)
                rows(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(t)) = dataset.curves[i][t];
        return euclidean_dissimilarity(rows, measure);
    }
    if (measure == Measure::EuclidFeatures) {
        const auto features = extract_features(dataset.curves, config.filter, config.feature_kind);
        return euclidean_dissimilarity(features.values, measure);
    }

    std::vector<Spectrum> spectra(n);
    parallel_for(n, [&](std::size_t i) { spectra[i] = cwt_morlet(dataset.curves[i], config.grid, config.cwt); });
    std::vector<Eigen::VectorXd> powers;
    if (measure == Measure::WER) {
        powers.resize(n);
        parallel_for(n, [&](std::size_t i) { powers[i] = smoothed_power_sums(spectra[i], config.smoothing); });
    }

    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    pairs.reserve(n * (n - 1) / 2);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) pairs.emplace_back(i, j);

    std::vector<double> results(pairs.size(), 0.0);
    std::vector<std::optional<std::string>> failures(pairs.size());
    parallel_for(pairs.size(), [&](std::size_t p) {
        const auto [i, j] = pairs[p];
        try {
            results[p] = measure == Measure::WER
                             ? wer_distance(spectra[i], spectra[j], powers[i], powers[j], config.smoothing)
                             : mca_distance(spectra[i], spectra[j], config.theta);
        } catch (const DegenerateInput& e) {
            failures[p] = e.what();
        }
    });
    for (std::size_t p = 0; p < pairs.size(); ++p) {
        if (failures[p])
            throw DegenerateInput("pair (" + std::to_string(pairs[p].first) + ", " +
                                  std::to_string(pairs[p].second) + "): " + *failures[p]);
    }

    DissimilarityMatrix out;
    out.measure = measure;
    out.values = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (std::size_t p = 0; p < pairs.size(); ++p) {
        const auto i = static_cast<Eigen::Index>(pairs[p].first);
        const auto j = static_cast<Eigen::Index>(pairs[p].second);
        out.values(i, j) = results[p];
        out.values(j, i) = results[p];
    }
    return out;
}

void write_dissimilarity_csv(std::ostream& out, const DissimilarityMatrix& d) {
    out << "# measure=" << to_string(d.measure) << '\n';
    for (Eigen::Index i = 0; i < d.values.rows(); ++i) {
        for (Eigen::Index j = 0; j < d.values.cols(); ++j) {
            if (j) out << ',';
            out << format_double(d.values(i, j));
        }
        out << '\n';
    }
}

DissimilarityMatrix read_dissimilarity_csv(std::istream& in) {
    std::string first;
    if (!std::getline(in, first)) throw DataError("dissimilarity CSV is empty");
    const std::string prefix = "# measure=";
    if (first.rfind(prefix, 0) != 0) throw DataError("dissimilarity CSV lacks the '# measure=' header");
    std::string tag = first.substr(prefix.size());
    while (!tag.empty() && (tag.back() == '\r' || tag.back() == ' ')) tag.pop_back();
    DissimilarityMatrix out;
    try {
        out.measure = measure_from_string(tag);
    } catch (const InvalidArgument& e) {
        throw DataError(e.what());
    }
    const auto rows = read_dataset_csv(in);
    if (rows.length() != rows.size()) throw DataError("dissimilarity CSV is not square");
    const auto n = static_cast<Eigen::Index>(rows.size());
    out.values.resize(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j)
            out.values(i, j) = rows.curves[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    try {
        out.validate();
    } catch (const InvalidArgument& e) {
        throw DataError(e.what());
    }
    return out;
}

void write_dissimilarity_binary(std::ostream& out, const DissimilarityMatrix& d) {
    write_spectrum_binary(out, d.values.cast<std::complex<double>>());
}

DissimilarityMatrix read_dissimilarity_binary(std::istream& in, Measure measure) {
    const ComplexMatrix raw = read_spectrum_binary(in);
    if (raw.rows() != raw.cols()) throw DataError("binary dissimilarity matrix is not square");
    if (raw.size() > 0 && raw.imag().cwiseAbs().maxCoeff() != 0.0)
        throw DataError("binary dissimilarity matrix has nonzero imaginary parts");
    DissimilarityMatrix out;
    out.measure = measure;
    out.values = raw.real();
    try {
        out.validate();
    } catch (const InvalidArgument& e) {
        throw DataError(e.what());
    }
    return out;
}

}  // namespace wavecluster
