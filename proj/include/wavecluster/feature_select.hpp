#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "wavecluster/dwt.hpp"

namespace wavecluster {

// 1 - (within SSE of the best two-group split) / (total SS) after mapping
// the column onto [0, 1]. Constant columns score 0.
double clusterability_index(std::span<const double> column);

// Maps each column affinely onto [0, 1]; constant columns become 0.
Eigen::MatrixXd range_normalize(const Eigen::MatrixXd& data);

struct SelectionOptions {
    int k = 3;
    // Features whose index falls below this quantile of the uniform
    // surrogate distribution are screened out.
    double screen_quantile = 0.5;
    double penalty = 0.05;
    int surrogates = 200;
    int restarts = 10;
    std::uint64_t seed = 1;
};

struct SubsetScore {
    std::vector<int> features;  // ascending column indices
    double sse = 0.0;
    double penalized = 0.0;
};

struct SelectionReport {
    int k = 0;
    std::vector<double> clusterability;  // per feature
    double screen_threshold = 0.0;
    std::vector<int> screened_in;
    std::vector<SubsetScore> best_per_size;  // index s holds the best subset of size s+1
    std::vector<int> selected;               // empty when nothing survives screening
    double penalty = 0.0;
    bool no_structure = false;
};

// Subset criterion: for a subset S of the screened-in columns (each
// range-normalized), run k-means on S and charge
//     SSE(S) = sum_{f in S} W_f + sum_{f screened-in, not in S} T_f
// where W_f is the within-cluster sum of squares of column f and T_f its
// total sum of squares. Columns left out count as unexplained variance,
// so SSE(S) cannot grow when S gains a column. The selected subset
// minimizes SSE(S) * (1 + penalty * |S|).
SelectionReport select_features(const Eigen::MatrixXd& features, const SelectionOptions& options);

// Median (or other quantile) clusterability index of n uniform draws.
double uniform_reference_quantile(std::size_t n, double quantile, int surrogates, std::uint64_t seed);

struct StableSelection {
    std::vector<SelectionReport> per_k;  // k = 2..k_max
    std::vector<int> selected;           // most frequent subset across k
};

// Runs select_features for every k in [2, k_max] and keeps the subset that
// is chosen most often (ties to the smaller k at which it first appears).
StableSelection select_features_stable(const Eigen::MatrixXd& features, int k_max,
                                       SelectionOptions options);

void write_selection_json(std::ostream& out, const StableSelection& selection,
                          const std::vector<std::string>& feature_labels);

}  // namespace wavecluster
