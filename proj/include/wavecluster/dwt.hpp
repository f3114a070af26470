#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace wavecluster {

// Orthonormal lowpass filter h; the highpass is the quadrature mirror
// g[k] = (-1)^k h[L-1-k].
struct WaveletFilter {
    std::string name;
    std::vector<double> lowpass;

    std::vector<double> highpass() const;
    // Throws InvalidArgument unless sum h^2 = 1, sum h = sqrt(2) and the
    // even shifts are orthogonal, all to 1e-10.
    void validate() const;

    static WaveletFilter haar();
    static WaveletFilter symmlet6();
    // "haar" or "symmlet6" (alias "sym6").
    static WaveletFilter by_name(const std::string& name);
};

// Periodized DWT of a 2^J-point curve. details[j] holds d_j with 2^j
// entries; j = 0 is the coarsest scale, j = J-1 the finest.
struct WaveletDecomposition {
    std::vector<std::vector<double>> details;
    double approx = 0.0;  // c_0
    WaveletFilter filter;

    unsigned levels() const { return static_cast<unsigned>(details.size()); }
    // (d_0, d_1, ..., d_{J-1}, c_0), the coefficient ordering of W = 𝒲 z.
    std::vector<double> flatten() const;
};

WaveletDecomposition dwt_forward(std::span<const double> curve, const WaveletFilter& filter);
std::vector<double> dwt_inverse(const WaveletDecomposition& decomp);

enum class FeatureKind { AC, RC, LogitRC };

std::string to_string(FeatureKind kind);
FeatureKind feature_kind_from_string(const std::string& s);

// n x J scale-energy features; column j is scale j (coarsest first).
struct FeatureMatrix {
    Eigen::MatrixXd values;
    FeatureKind kind = FeatureKind::AC;

    Eigen::Index rows() const { return values.rows(); }
    Eigen::Index cols() const { return values.cols(); }
    // Label "j<j>_L<J-j>": our index and the finest-first level number
    // (1 = finest) used in some of the literature.
    std::string scale_label(Eigen::Index col) const;
};

constexpr double kLogitClamp = 1e-6;
// Relative detail energy (detail / curve energy) treated as zero.
constexpr double kDetailEnergyFloor = 1e-20;

// cont_j = ||d_j||^2; the approximation coefficient is not included.
std::vector<double> energy_contributions(const WaveletDecomposition& decomp);

struct RelativeContributions {
    std::vector<double> rc;
    std::vector<double> logit_rc;
};

// Throws DegenerateInput when the total detail energy is zero.
RelativeContributions relative_contributions(std::span<const double> ac,
                                             double clamp = kLogitClamp);

// Runs the DWT on every curve (which must share a 2^J length) and stacks
// the requested feature rows. Row-level failures name the curve index.
FeatureMatrix extract_features(const std::vector<std::vector<double>>& curves,
                               const WaveletFilter& filter, FeatureKind kind);

void write_feature_csv(std::ostream& out, const FeatureMatrix& features);
FeatureMatrix read_feature_csv(std::istream& in);

}  // namespace wavecluster
