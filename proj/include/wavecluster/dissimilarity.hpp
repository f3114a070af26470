#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "wavecluster/core_data.hpp"
#include "wavecluster/cwt.hpp"
#include "wavecluster/dwt.hpp"

namespace wavecluster {

// Local correlation R(a, tau) in [0, 1] between two spectra.
struct CoherenceField {
    Eigen::MatrixXd values;
    ScaleGrid grid;
    // Largest value seen before clipping to [0, 1].
    double max_before_clip = 0.0;
};

enum class Measure { WER, MCA, EuclidFeatures, EuclidRaw };

std::string to_string(Measure m);
Measure measure_from_string(const std::string& s);

struct DissimilarityMatrix {
    Eigen::MatrixXd values;
    Measure measure = Measure::WER;

    Eigen::Index size() const { return values.rows(); }
    // Throws InvalidArgument unless square, symmetric to 1e-9, zero diagonal
    // and nonnegative.
    void validate() const;
};

struct McaResult {
    Eigen::VectorXd singular_values;  // nonincreasing
    ComplexMatrix u;                  // columns u_j, phase-normalized
    ComplexMatrix v;
    ComplexMatrix patterns_z;  // retained x N, row j is u_j^H W_z
    ComplexMatrix patterns_x;
    Eigen::VectorXd direction_distances;  // d_j for the retained directions
    Eigen::Index retained = 0;
    double theta = 0.95;
    double frobenius_sq = 0.0;  // ||Q||_F^2
    double distance = 0.0;
};

constexpr double kDefaultTheta = 0.95;

CoherenceField wavelet_coherence(const Spectrum& wz, const Spectrum& wx,
                                 const SmoothingOptions& smoothing = {});

// Time-averaged squared coherence per scale; a diagnostic only.
Eigen::VectorXd scale_coherence(const Spectrum& wz, const Spectrum& wx,
                                const SmoothingOptions& smoothing = {});

// Smoothed-spectrum sums reused across pairs: for each scale, the time sum
// of |S(|W|^2)|.
Eigen::VectorXd smoothed_power_sums(const Spectrum& w, const SmoothingOptions& smoothing = {});

// sqrt(J_s N (1 - WER^2)).
double wer_distance(const Spectrum& wz, const Spectrum& wx, const SmoothingOptions& smoothing = {});
double wer_distance(const Spectrum& wz, const Spectrum& wx, const Eigen::VectorXd& power_z,
                    const Eigen::VectorXd& power_x, const SmoothingOptions& smoothing = {});

McaResult mca_analysis(const Spectrum& wz, const Spectrum& wx, double theta = kDefaultTheta);
double mca_distance(const Spectrum& wz, const Spectrum& wx, double theta = kDefaultTheta);

struct DissimilarityConfig {
    ScaleGrid grid = make_scale_grid(1, 6, 8);
    CwtOptions cwt;
    SmoothingOptions smoothing;
    double theta = kDefaultTheta;
    // euclid-features only
    WaveletFilter filter = WaveletFilter::symmlet6();
    FeatureKind feature_kind = FeatureKind::AC;
};

DissimilarityMatrix build_dissimilarity_matrix(const FunctionalDataset& dataset, Measure measure,
                                               const DissimilarityConfig& config = {});
// Pairwise Euclidean distances between rows.
DissimilarityMatrix euclidean_dissimilarity(const Eigen::MatrixXd& rows, Measure tag);

void write_dissimilarity_csv(std::ostream& out, const DissimilarityMatrix& d);
DissimilarityMatrix read_dissimilarity_csv(std::istream& in);
// Same layout as write_spectrum_binary with zero imaginary parts.
void write_dissimilarity_binary(std::ostream& out, const DissimilarityMatrix& d);
DissimilarityMatrix read_dissimilarity_binary(std::istream& in, Measure measure);

}  // namespace wavecluster
