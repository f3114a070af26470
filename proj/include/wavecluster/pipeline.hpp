#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "wavecluster/clustering.hpp"
#include "wavecluster/dissimilarity.hpp"
#include "wavecluster/dwt.hpp"
#include "wavecluster/evaluation.hpp"
#include "wavecluster/feature_select.hpp"
#include "wavecluster/simulation.hpp"

namespace wavecluster {

enum class Pipeline { Features, Spectrum };

std::string to_string(Pipeline p);
Pipeline pipeline_from_string(const std::string& s);

// Everything a command needs; serializes to the JSON config file format.
struct RunConfig {
    Pipeline pipeline = Pipeline::Features;
    FeatureKind features = FeatureKind::LogitRC;
    std::optional<Measure> measure;  // spectrum pipeline only
    std::string wavelet = "symmlet6";
    int octave_min = 1;
    int octave_max = 6;
    int voices = 8;
    double omega0 = kMorletOmega0;
    double theta = kDefaultTheta;
    std::optional<int> k;
    int k_max = 10;
    int select_k_max = 6;
    bool select = true;
    double screen_quantile = 0.5;
    double penalty = 0.05;
    int restarts = 20;
    std::uint64_t seed = 1;
    int threads = 1;
    std::optional<unsigned> levels;  // resample curves to 2^levels first
    std::size_t delta = 48;
    int replicates = 1;
    std::string input;
    std::string output = "out";
    std::string labels;
    std::string partition;

    void validate() const;
    // Settings that determine results; threads and paths are excluded.
    nlohmann::json to_json(bool include_paths = true) const;
    static RunConfig from_json(const nlohmann::json& j);
    // Overlays only the keys present in `j`.
    void merge_json(const nlohmann::json& j);

    Measure effective_measure() const { return measure.value_or(Measure::WER); }
    DissimilarityConfig dissimilarity_config() const;
};

// Resamples to 2^levels when requested; otherwise requires a power-of-two
// length.
FunctionalDataset prepare_dyadic(const FunctionalDataset& dataset, std::optional<unsigned> levels);

struct FeaturePipelineResult {
    FeatureMatrix features;
    StableSelection selection;        // empty per_k when selection is disabled
    std::vector<int> used_columns;
    Eigen::MatrixXd design;           // columns actually clustered
    std::optional<JumpResult> jump;   // when k was not fixed
    Partition partition;
};

FeaturePipelineResult run_feature_pipeline(const FunctionalDataset& dataset, const RunConfig& config);

struct SpectrumPipelineResult {
    DissimilarityMatrix dissimilarity;
    Partition partition;
};

SpectrumPipelineResult run_spectrum_pipeline(const FunctionalDataset& dataset, const RunConfig& config);

// Seed of benchmark replicate r; replicate 0 is what `simulate` writes.
std::uint64_t replicate_seed(std::uint64_t seed, int replicate);

struct ReplicateOutcome {
    std::vector<int> selected;  // empty when selection found no structure
    std::size_t feature_errors = 0;
    double feature_ari = 0.0;
    std::size_t raw_errors = 0;
    double raw_ari = 0.0;
};

// Simulate, featurize (logit-RC), select, and cluster with k = 3; the raw
// 1024-sample curves are clustered with the same k for comparison.
ReplicateOutcome run_benchmark_replicate(std::uint64_t replicate_seed, const RunConfig& config);

struct PairedTest {
    double mean_difference = 0.0;
    double t_statistic = 0.0;
    double p_value = 1.0;  // one-sided, H1: mean difference < 0
};

// One-sided paired t-test of (a - b) < 0.
PairedTest paired_t_test_less(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace wavecluster
