#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include <Eigen/Dense>

#include "wavecluster/dissimilarity.hpp"

namespace wavecluster {

struct Partition {
    std::vector<int> labels;  // 0..k-1
    int k = 0;
    Eigen::MatrixXd centers;            // k x p, k-means only
    std::vector<std::size_t> medoids;   // PAM only
    double cost = 0.0;                  // SSE (k-means) or sum of medoid dissimilarities (PAM)
    std::uint64_t seed = 0;
    int restarts = 1;
    int iterations = 0;  // Lloyd iterations of the winning restart, PAM swap count

    bool is_medoid_based() const { return !medoids.empty(); }
};

struct KMeansOptions {
    int restarts = 20;
    int max_iterations = 100;
    std::uint64_t seed = 1;
};

// Restarted Lloyd k-means with k-means++ seeding. Every restart uses its
// own stream derived from the seed; the minimum-SSE restart wins, ties to
// the lowest restart index.
Partition kmeans(const Eigen::MatrixXd& data, int k, const KMeansOptions& options = {});

// Sum of squared distances from each row to its labelled center.
double kmeans_cost(const Eigen::MatrixXd& data, const std::vector<int>& labels,
                   const Eigen::MatrixXd& centers);

struct DistortionCurve {
    std::vector<int> k_values;          // 1..K_max
    std::vector<double> distortion;     // d_K
    // d_K^{-p/2} divided by the largest finite value, so entries lie in
    // [0, 1] (or +inf at a capped K). The common factor does not move the
    // jump.
    std::vector<double> transformed;
    std::vector<double> jumps;          // transformed[K] - transformed[K-1], with Y_0 = 0
    double log_scale = 0.0;             // log of the factor divided out
    double power = 0.0;                 // p/2
    int best_k = 1;
    bool capped = false;                // some d_K was zero
};

struct JumpResult {
    int k = 1;
    DistortionCurve curve;
};

JumpResult choose_k_by_jump(const Eigen::MatrixXd& data, int k_max, const KMeansOptions& options = {});

// BUILD + SWAP partitioning around medoids.
Partition pam(const DissimilarityMatrix& d, int k, std::uint64_t seed = 1);

// Sum over points of the dissimilarity to the nearest medoid.
double pam_cost(const Eigen::MatrixXd& d, const std::vector<std::size_t>& medoids);

// CSV: id,label,distance
void write_partition_csv(std::ostream& out, const Partition& p, const std::vector<double>& distances);
// Distance from each observation to its own center (k-means) or medoid.
std::vector<double> distances_to_representative(const Eigen::MatrixXd& data, const Partition& p);
std::vector<double> distances_to_medoid(const DissimilarityMatrix& d, const Partition& p);
void write_distortion_csv(std::ostream& out, const DistortionCurve& curve);

}  // namespace wavecluster
