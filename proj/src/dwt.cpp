#include "wavecluster/dwt.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <istream>
#include <ostream>

#include "wavecluster/core_data.hpp"
#include "wavecluster/error.hpp"

namespace wavecluster {

std::vector<double> WaveletFilter::highpass() const {
    const std::size_t len = lowpass.size();
    std::vector<double> g(len);
    for (std::size_t k = 0; k < len; ++k)
        g[k] = (k % 2 == 0 ? 1.0 : -1.0) * lowpass[len - 1 - k];
    return g;
}

void WaveletFilter::validate() const {
    constexpr double tol = 1e-10;
    const std::size_t len = lowpass.size();
    if (len < 2 || len % 2 != 0)
        throw InvalidArgument("filter '" + name + "' must have an even number of taps");
    double sum = 0.0;
    for (double h : lowpass) sum += h;
    if (std::abs(sum - std::sqrt(2.0)) > tol)
        throw InvalidArgument("filter '" + name + "' taps do not sum to sqrt(2)");
    for (std::size_t shift = 0; shift < len; shift += 2) {
        double dot = 0.0;
        for (std::size_t k = 0; k + shift < len; ++k) dot += lowpass[k] * lowpass[k + shift];
        const double expected = shift == 0 ? 1.0 : 0.0;
        if (std::abs(dot - expected) > tol)
            throw InvalidArgument("filter '" + name + "' fails orthonormality at shift " +
                                  std::to_string(shift));
    }
}

WaveletFilter WaveletFilter::haar() {
    const double s = 1.0 / std::sqrt(2.0);
    return {"haar", {s, s}};
}

WaveletFilter WaveletFilter::symmlet6() {
    // Least-asymmetric Daubechies filter with 6 vanishing moments, from the
    // spectral factorization carried out in extended precision. The widely
    // tabulated 16-digit values are off by ~1e-12, which leaks a constant
    // offset into the detail coefficients at that relative level.
    return {"symmlet6",
            {-0.007800708325032380414220998, 0.001767711864254007741006009,
             0.04472490177078138466299238, -0.02106029251237084799153774,
             -0.07263752278637658346403941, 0.3379294217281658327144258,
             0.7876411410286509960718449, 0.491055941927973733041948,
             -0.04831174258569805497104869, -0.1179901111485200254042429,
             0.003490712084222162515316225, 0.01540410932704482429924526}};
}

WaveletFilter WaveletFilter::by_name(const std::string& name) {
    if (name == "haar") return haar();
    if (name == "symmlet6" || name == "sym6") return symmlet6();
    throw InvalidArgument("unknown wavelet '" + name + "' (expected haar or symmlet6)");
}

std::vector<double> WaveletDecomposition::flatten() const {
    std::vector<double> out;
    for (const auto& d : details) out.insert(out.end(), d.begin(), d.end());
    out.push_back(approx);
    return out;
}

WaveletDecomposition dwt_forward(std::span<const double> curve, const WaveletFilter& filter) {
    const auto levels = exact_log2(curve.size());
    if (!levels || *levels == 0)
        throw InvalidArgument("DWT needs a length that is a power of two >= 2, got " +
                              std::to_string(curve.size()) +
                              "; resample the curve with resample_dyadic first");
    const auto& h = filter.lowpass;
    const auto g = filter.highpass();
    const std::size_t taps = h.size();

    WaveletDecomposition out;
    out.filter = filter;
    out.details.resize(*levels);
    std::vector<double> smooth(curve.begin(), curve.end());
    for (unsigned level = *levels; level-- > 0;) {
        const std::size_t n = smooth.size();
        const std::size_t half = n / 2;
        std::vector<double> coarse(half, 0.0), detail(half, 0.0);
        for (std::size_t k = 0; k < half; ++k) {
            double a = 0.0, d = 0.0;
            for (std::size_t m = 0; m < taps; ++m) {
                const double x = smooth[(2 * k + m) % n];
                a += h[m] * x;
                d += g[m] * x;
            }
            coarse[k] = a;
            detail[k] = d;
        }
        out.details[level] = std::move(detail);
        smooth = std::move(coarse);
    }
    out.approx = smooth.front();
    return out;
}

std::vector<double> dwt_inverse(const WaveletDecomposition& decomp) {
    const unsigned levels = decomp.levels();
    if (levels == 0) throw InvalidArgument("decomposition has no detail levels");
    for (unsigned j = 0; j < levels; ++j) {
        if (decomp.details[j].size() != (std::size_t{1} << j))
            throw InvalidArgument("detail level " + std::to_string(j) + " has " +
                                  std::to_string(decomp.details[j].size()) +
                                  " coefficients, expected " + std::to_string(1u << j));
    }
    const auto& h = decomp.filter.lowpass;
    const auto g = decomp.filter.highpass();
    const std::size_t taps = h.size();

    std::vector<double> smooth{decomp.approx};
    for (unsigned j = 0; j < levels; ++j) {
        const auto& detail = decomp.details[j];
        const std::size_t half = smooth.size();
        const std::size_t n = 2 * half;
        std::vector<double> fine(n, 0.0);
        for (std::size_t k = 0; k < half; ++k) {
            for (std::size_t m = 0; m < taps; ++m)
                fine[(2 * k + m) % n] += h[m] * smooth[k] + g[m] * detail[k];
        }
        smooth = std::move(fine);
    }
    return smooth;
}

std::string to_string(FeatureKind kind) {
    switch (kind) {
        case FeatureKind::AC: return "AC";
        case FeatureKind::RC: return "RC";
        case FeatureKind::LogitRC: return "logitRC";
    }
    return "?";
}

FeatureKind feature_kind_from_string(const std::string& s) {
    std::string lower;
    for (char c : s)
        if (c != '-' && c != '_') lower.push_back(static_cast<char>(std::tolower(c)));
    if (lower == "ac") return FeatureKind::AC;
    if (lower == "rc") return FeatureKind::RC;
    if (lower == "logitrc") return FeatureKind::LogitRC;
    throw InvalidArgument("unknown feature kind '" + s + "' (expected ac, rc or logit-rc)");
}

std::string FeatureMatrix::scale_label(Eigen::Index col) const {
    return "j" + std::to_string(col) + "_L" + std::to_string(cols() - col);
}

std::vector<double> energy_contributions(const WaveletDecomposition& decomp) {
    std::vector<double> ac(decomp.levels());
    for (unsigned j = 0; j < decomp.levels(); ++j) {
        double e = 0.0;
        for (double d : decomp.details[j]) e += d * d;
        ac[j] = e;
    }
    return ac;
}

RelativeContributions relative_contributions(std::span<const double> ac, double clamp) {
    double total = 0.0;
    for (double v : ac) {
        if (v < 0.0 || !std::isfinite(v))
            throw InvalidArgument("energy contributions must be finite and nonnegative");
        total += v;
    }
    if (total <= 0.0)
        throw DegenerateInput("total detail energy is zero (constant curve); relative "
                              "contributions are undefined");
    RelativeContributions out;
    out.rc.reserve(ac.size());
    out.logit_rc.reserve(ac.size());
    for (double v : ac) {
        const double p = v / total;
        const double q = std::clamp(p, clamp, 1.0 - clamp);
        out.rc.push_back(p);
        out.logit_rc.push_back(std::log(q / (1.0 - q)));
    }
    return out;
}

FeatureMatrix extract_features(const std::vector<std::vector<double>>& curves,
                               const WaveletFilter& filter, FeatureKind kind) {
    if (curves.empty()) throw InvalidArgument("no curves to featurize");
    const auto levels = exact_log2(curves.front().size());
    if (!levels || *levels == 0)
        throw InvalidArgument("curve length " + std::to_string(curves.front().size()) +
                              " is not a power of two; resample first");
    FeatureMatrix out;
    out.kind = kind;
    out.values.resize(static_cast<Eigen::Index>(curves.size()), *levels);
    for (std::size_t i = 0; i < curves.size(); ++i) {
        if (curves[i].size() != curves.front().size())
            throw InvalidArgument("curve " + std::to_string(i) + " has a different length");
        const auto ac = energy_contributions(dwt_forward(curves[i], filter));
        std::vector<double> row;
        if (kind == FeatureKind::AC) {
            row = ac;
        } else {
            // Rounding leaves a constant curve with a tiny detail residue;
            // detail energy below this floor counts as zero.
            double detail = 0.0, norm2 = 0.0;
            for (double v : ac) detail += v;
            for (double v : curves[i]) norm2 += v * v;
            if (detail <= kDetailEnergyFloor * norm2)
                throw DegenerateInput("curve " + std::to_string(i) +
                                      ": total detail energy is zero (constant curve); relative "
                                      "contributions are undefined");
            try {
                auto rel = relative_contributions(ac);
                row = kind == FeatureKind::RC ? std::move(rel.rc) : std::move(rel.logit_rc);
            } catch (const DegenerateInput& e) {
                throw DegenerateInput("curve " + std::to_string(i) + ": " + e.what());
            }
        }
        for (unsigned j = 0; j < *levels; ++j)
            out.values(static_cast<Eigen::Index>(i), j) = row[j];
    }
    return out;
}

void write_feature_csv(std::ostream& out, const FeatureMatrix& features) {
    const std::string kind = to_string(features.kind);
    for (Eigen::Index j = 0; j < features.cols(); ++j) {
        if (j) out << ',';
        out << kind << '_' << features.scale_label(j);
    }
    out << '\n';
    for (Eigen::Index i = 0; i < features.rows(); ++i) {
        for (Eigen::Index j = 0; j < features.cols(); ++j) {
            if (j) out << ',';
            out << format_double(features.values(i, j));
        }
        out << '\n';
    }
}

FeatureMatrix read_feature_csv(std::istream& in) {
    std::string header;
    if (!std::getline(in, header)) throw DataError("feature CSV is empty");
    const auto underscore = header.find('_');
    if (underscore == std::string::npos) throw DataError("feature CSV header lacks a kind prefix");
    FeatureMatrix out;
    try {
        out.kind = feature_kind_from_string(header.substr(0, underscore));
    } catch (const InvalidArgument& e) {
        throw DataError(std::string("feature CSV header: ") + e.what());
    }
    auto rows = read_dataset_csv(in);
    out.values.resize(static_cast<Eigen::Index>(rows.size()),
                      static_cast<Eigen::Index>(rows.length()));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < rows.length(); ++j)
            out.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                rows.curves[i][j];
    return out;
}

}  // namespace wavecluster
